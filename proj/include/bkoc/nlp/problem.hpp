#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bkoc::nlp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One scalar constraint lower <= fn(x) <= upper. Equalities use
/// lower == upper. deps lists the decision-variable indices fn reads;
/// an empty list means the row is dense. An optional analytic gradient
/// returns d fn / d x restricted to deps (or all of x when deps is empty).
struct ConstraintRow {
    std::function<double(Eigen::Ref<const Eigen::VectorXd>)> fn;
    double lower = -kInf;
    double upper = kInf;
    std::vector<int> deps;
    std::function<Eigen::VectorXd(Eigen::Ref<const Eigen::VectorXd>)> grad;
    std::string label;

    bool is_equality() const { return lower == upper; }
    double violation(double value) const {
        double v = 0.0;
        if (value < lower) v = lower - value;
        if (value > upper) v = std::max(v, value - upper);
        return v;
    }
};

struct NlpProblem {
    int n = 0;
    Eigen::VectorXd x0;
    Eigen::VectorXd lower_bounds;  // size n; -inf allowed
    Eigen::VectorXd upper_bounds;  // size n; +inf allowed
    std::function<double(Eigen::Ref<const Eigen::VectorXd>)> objective;
    std::function<Eigen::VectorXd(Eigen::Ref<const Eigen::VectorXd>)> objective_gradient;
    std::vector<ConstraintRow> constraints;

    void validate() const {
        if (n < 1) throw std::invalid_argument("NlpProblem: n must be >= 1");
        if (!objective) throw std::invalid_argument("NlpProblem: objective must be set");
        if (x0.size() != n) throw std::invalid_argument("NlpProblem: x0 has wrong size");
        if (!x0.allFinite()) throw std::invalid_argument("NlpProblem: x0 must be finite");
        if (lower_bounds.size() != n || upper_bounds.size() != n)
            throw std::invalid_argument("NlpProblem: bounds have wrong size");
        for (int i = 0; i < n; ++i)
            if (!(lower_bounds[i] <= upper_bounds[i]))
                throw std::invalid_argument("NlpProblem: inconsistent bounds at variable " +
                                            std::to_string(i));
        for (const auto& row : constraints) {
            if (!row.fn) throw std::invalid_argument("NlpProblem: constraint without callable");
            if (!(row.lower <= row.upper))
                throw std::invalid_argument("NlpProblem: inconsistent constraint bounds");
            for (int d : row.deps)
                if (d < 0 || d >= n)
                    throw std::invalid_argument("NlpProblem: constraint dep out of range");
        }
    }

    Eigen::VectorXd eval_constraints(Eigen::Ref<const Eigen::VectorXd> x) const {
        Eigen::VectorXd c(static_cast<Eigen::Index>(constraints.size()));
        for (std::size_t r = 0; r < constraints.size(); ++r)
            c[static_cast<Eigen::Index>(r)] = constraints[r].fn(x);
        return c;
    }

    /// Max-norm violation of constraint rows at the given values.
    double max_violation(Eigen::Ref<const Eigen::VectorXd> c) const {
        double v = 0.0;
        for (std::size_t r = 0; r < constraints.size(); ++r)
            v = std::max(v, constraints[r].violation(c[static_cast<Eigen::Index>(r)]));
        return v;
    }

    /// Sum of violations (the l1 measure used by the merit function).
    double total_violation(Eigen::Ref<const Eigen::VectorXd> c) const {
        double v = 0.0;
        for (std::size_t r = 0; r < constraints.size(); ++r)
            v += constraints[r].violation(c[static_cast<Eigen::Index>(r)]);
        return v;
    }
};

enum class SolveStatus { Converged, IterationLimit, Infeasible, NumericalFailure };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::IterationLimit: return "iteration-limit";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

struct IterationRecord {
    int iteration = 0;
    double objective = 0.0;
    double violation = 0.0;
    double merit = 0.0;
    double step_length = 0.0;
    double penalty = 0.0;
    double merit_decrease = 0.0;  // merit(x_k) - merit(x_{k+1}) at the same penalty
};

struct NlpSolution {
    Eigen::VectorXd x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double constraint_violation = 0.0;
    double kkt_residual = std::numeric_limits<double>::quiet_NaN();
    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
    double wall_time_s = 0.0;
    Eigen::VectorXd multipliers;        // one per constraint row
    Eigen::VectorXd bound_multipliers;  // one per variable
    int al_fallback_steps = 0;
    std::vector<IterationRecord> history;
};

}  // namespace bkoc::nlp
