#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "bkoc/nlp/problem.hpp"

namespace bkoc::nlp {

/// Default central-difference step for coordinate value v:
/// cbrt(machine epsilon) * (1 + |v|).
inline double fd_step(double v) {
    constexpr double cbrt_eps = 6.055454452393343e-6;
    return cbrt_eps * (1.0 + std::abs(v));
}

/// Central finite-difference gradient. step <= 0 selects the default
/// per-coordinate step.
template <typename F>
Eigen::VectorXd fd_gradient(F&& f, Eigen::Ref<const Eigen::VectorXd> x, double step = 0.0) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step > 0.0 ? step : fd_step(x[i]);
        const double xi = x[i];
        probe[i] = xi + h;
        const double fp = f(probe);
        probe[i] = xi - h;
        const double fm = f(probe);
        probe[i] = xi;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("fd_gradient: non-finite value probing coordinate " +
                                     std::to_string(i));
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Finite-difference Jacobian of the constraint rows with column grouping:
/// columns whose rows never overlap are perturbed together, and only affected
/// rows are re-evaluated. Rows with an analytic gradient skip differencing.
class FdJacobian {
  public:
    explicit FdJacobian(const NlpProblem& problem) : problem_(&problem) {
        const int n = problem.n;
        const auto m = static_cast<int>(problem.constraints.size());
        rows_of_col_.assign(n, {});
        fd_rows_.clear();
        for (int r = 0; r < m; ++r) {
            const auto& row = problem.constraints[r];
            if (row.grad) continue;  // analytic rows do not join the coloring
            fd_rows_.push_back(r);
            if (row.deps.empty()) {
                for (int c = 0; c < n; ++c) rows_of_col_[c].push_back(r);
            } else {
                for (int c : row.deps) rows_of_col_[c].push_back(r);
            }
        }
        build_coloring();
    }

    int color_count() const { return static_cast<int>(colors_.size()); }

    Eigen::MatrixXd evaluate(Eigen::Ref<const Eigen::VectorXd> x,
                             Eigen::Ref<const Eigen::VectorXd> c_at_x) const {
        (void)c_at_x;  // values at x are not needed by central differences
        const auto m = static_cast<Eigen::Index>(problem_->constraints.size());
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, problem_->n);

        Eigen::VectorXd probe = x;
        for (const auto& color : colors_) {
            // Perturb every column of the color at once.
            for (int c : color) probe[c] = x[c] + fd_step(x[c]);
            eval_rows_into(probe, scratch_plus_, color);
            for (int c : color) probe[c] = x[c] - fd_step(x[c]);
            eval_rows_into(probe, scratch_minus_, color);
            for (int c : color) probe[c] = x[c];

            for (int c : color) {
                const double h = fd_step(x[c]);
                for (int r : rows_of_col_[c])
                    jac(r, c) = (scratch_plus_[r] - scratch_minus_[r]) / (2.0 * h);
            }
        }

        for (std::size_t r = 0; r < problem_->constraints.size(); ++r) {
            const auto& row = problem_->constraints[r];
            if (!row.grad) continue;
            const Eigen::VectorXd g = row.grad(x);
            if (row.deps.empty()) {
                jac.row(static_cast<Eigen::Index>(r)) = g.transpose();
            } else {
                for (std::size_t k = 0; k < row.deps.size(); ++k)
                    jac(static_cast<Eigen::Index>(r), row.deps[k]) =
                        g[static_cast<Eigen::Index>(k)];
            }
        }
        return jac;
    }

  private:
    void build_coloring() {
        // Greedy grouping: a column joins a color if none of its rows are
        // already claimed by that color.
        const int n = problem_->n;
        const auto m = problem_->constraints.size();
        std::vector<std::vector<char>> color_rows;
        for (int c = 0; c < n; ++c) {
            if (rows_of_col_[c].empty()) continue;  // column touches no FD row
            bool placed = false;
            for (std::size_t k = 0; k < colors_.size() && !placed; ++k) {
                bool conflict = false;
                for (int r : rows_of_col_[c]) {
                    if (color_rows[k][static_cast<std::size_t>(r)]) {
                        conflict = true;
                        break;
                    }
                }
                if (!conflict) {
                    colors_[k].push_back(c);
                    for (int r : rows_of_col_[c]) color_rows[k][static_cast<std::size_t>(r)] = 1;
                    placed = true;
                }
            }
            if (!placed) {
                colors_.push_back({c});
                color_rows.emplace_back(m, 0);
                for (int r : rows_of_col_[c])
                    color_rows.back()[static_cast<std::size_t>(r)] = 1;
            }
        }
    }

    void eval_rows_into(Eigen::Ref<const Eigen::VectorXd> x, std::vector<double>& out,
                        const std::vector<int>& color) const {
        out.resize(problem_->constraints.size());
        // Only rows touched by the color's columns are re-evaluated.
        for (int c : color)
            for (int r : rows_of_col_[c]) out[static_cast<std::size_t>(r)] =
                problem_->constraints[static_cast<std::size_t>(r)].fn(x);
    }

    const NlpProblem* problem_;
    std::vector<std::vector<int>> rows_of_col_;
    std::vector<int> fd_rows_;
    std::vector<std::vector<int>> colors_;
    mutable std::vector<double> scratch_plus_, scratch_minus_;
};

}  // namespace bkoc::nlp
