#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <vector>

#include "bkoc/nlp/finite_diff.hpp"
#include "bkoc/nlp/problem.hpp"
#include "bkoc/nlp/qp.hpp"

namespace bkoc::nlp {

struct SqpOptions {
    double tol = 1e-6;
    int max_iter = 500;
    double armijo = 0.1;
    int max_line_search = 30;
    std::ostream* iteration_log = nullptr;  // CSV: iteration,objective,violation,merit,step,penalty
};

namespace detail {

struct QpAssembly {
    QpProblem qp;
    // Row bookkeeping for multiplier extraction.
    std::vector<int> eq_of_row;              // constraint row -> eq index or -1
    std::vector<int> up_of_row, lo_of_row;   // constraint row -> ineq index or -1
    std::vector<int> fixed_eq_of_var;        // variable -> eq index (fixed vars) or -1
    std::vector<int> ub_of_var, lb_of_var;   // variable -> ineq index or -1
};

inline QpAssembly assemble_qp(const NlpProblem& prob, const Eigen::MatrixXd& b_mat,
                              const Eigen::VectorXd& g, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& c, const Eigen::MatrixXd& jac) {
    const int n = prob.n;
    const auto m = static_cast<int>(prob.constraints.size());

    QpAssembly a;
    a.eq_of_row.assign(m, -1);
    a.up_of_row.assign(m, -1);
    a.lo_of_row.assign(m, -1);
    a.fixed_eq_of_var.assign(n, -1);
    a.ub_of_var.assign(n, -1);
    a.lb_of_var.assign(n, -1);

    int n_eq = 0, n_in = 0;
    for (int r = 0; r < m; ++r) {
        const auto& row = prob.constraints[r];
        if (row.is_equality()) {
            a.eq_of_row[r] = n_eq++;
        } else {
            if (std::isfinite(row.upper)) a.up_of_row[r] = n_in++;
            if (std::isfinite(row.lower)) a.lo_of_row[r] = n_in++;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (prob.lower_bounds[i] == prob.upper_bounds[i]) {
            a.fixed_eq_of_var[i] = n_eq++;
        } else {
            if (std::isfinite(prob.upper_bounds[i])) a.ub_of_var[i] = n_in++;
            if (std::isfinite(prob.lower_bounds[i])) a.lb_of_var[i] = n_in++;
        }
    }

    a.qp.H = b_mat;
    a.qp.g = g;
    a.qp.E = Eigen::MatrixXd::Zero(n_eq, n);
    a.qp.b = Eigen::VectorXd::Zero(n_eq);
    a.qp.A = Eigen::MatrixXd::Zero(n_in, n);
    a.qp.d = Eigen::VectorXd::Zero(n_in);

    for (int r = 0; r < m; ++r) {
        const auto& row = prob.constraints[r];
        if (a.eq_of_row[r] >= 0) {
            a.qp.E.row(a.eq_of_row[r]) = jac.row(r);
            a.qp.b[a.eq_of_row[r]] = row.lower - c[r];
        }
        if (a.up_of_row[r] >= 0) {
            a.qp.A.row(a.up_of_row[r]) = jac.row(r);
            a.qp.d[a.up_of_row[r]] = row.upper - c[r];
        }
        if (a.lo_of_row[r] >= 0) {
            a.qp.A.row(a.lo_of_row[r]) = -jac.row(r);
            a.qp.d[a.lo_of_row[r]] = c[r] - row.lower;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (a.fixed_eq_of_var[i] >= 0) {
            a.qp.E(a.fixed_eq_of_var[i], i) = 1.0;
            a.qp.b[a.fixed_eq_of_var[i]] = prob.lower_bounds[i] - x[i];
        }
        if (a.ub_of_var[i] >= 0) {
            a.qp.A(a.ub_of_var[i], i) = 1.0;
            a.qp.d[a.ub_of_var[i]] = prob.upper_bounds[i] - x[i];
        }
        if (a.lb_of_var[i] >= 0) {
            a.qp.A(a.lb_of_var[i], i) = -1.0;
            a.qp.d[a.lb_of_var[i]] = x[i] - prob.lower_bounds[i];
        }
    }
    return a;
}

}  // namespace detail

/// Sequential quadratic programming with an l1 merit line search, Powell-
/// damped BFGS updates, and an augmented-Lagrangian step whenever the QP
/// subproblem cannot be solved (inconsistent linearization).
class SqpSolver {
  public:
    explicit SqpSolver(SqpOptions options = {}) : opts_(options) {}

    NlpSolution solve(const NlpProblem& prob) const {
        prob.validate();
        const auto t_start = std::chrono::steady_clock::now();

        const int n = prob.n;
        const auto m = static_cast<int>(prob.constraints.size());

        Eigen::VectorXd x = prob.x0.cwiseMax(prob.lower_bounds).cwiseMin(prob.upper_bounds);
        Eigen::MatrixXd b_mat = Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd bound_mult = Eigen::VectorXd::Zero(n);
        double penalty = 1.0;
        double rho_al = 10.0;
        int consecutive_fallbacks = 0;
        bool b_is_identity = true;

        FdJacobian jac_machine(prob);

        NlpSolution sol;
        sol.status = SolveStatus::IterationLimit;

        double f = prob.objective(x);
        Eigen::VectorXd c = prob.eval_constraints(x);

        // Pending BFGS data: step taken last iteration, Lagrangian gradient at
        // the old point with the new multipliers.
        bool pending = false;
        Eigen::VectorXd s_prev, grad_l_old, lambda_pend;

        if (opts_.iteration_log)
            (*opts_.iteration_log) << "iteration,objective,violation,merit,step,penalty\n";

        int iter = 0;
        for (iter = 1; iter <= opts_.max_iter; ++iter) {
            if (!std::isfinite(f) || !c.allFinite()) {
                sol.status = SolveStatus::NumericalFailure;
                break;
            }

            Eigen::VectorXd g = prob.objective_gradient
                                    ? prob.objective_gradient(x)
                                    : fd_gradient(prob.objective, x);
            Eigen::MatrixXd jac = jac_machine.evaluate(x, c);
            if (!g.allFinite() || !jac.allFinite()) {
                sol.status = SolveStatus::NumericalFailure;
                break;
            }

            if (pending) {
                const Eigen::VectorXd y =
                    (g + jac.transpose() * lambda_pend) - grad_l_old;
                bfgs_update(b_mat, s_prev, y, b_is_identity);
                pending = false;
            }

            const double viol_inf = prob.max_violation(c);
            const double stat = stationarity(prob, x, g, jac, lambda);
            if (viol_inf <= opts_.tol && stat <= opts_.tol) {
                sol.status = SolveStatus::Converged;
                break;
            }

            // Quadratic subproblem at the current iterate.
            const auto assembly = detail::assemble_qp(prob, b_mat, g, x, c, jac);
            const QpResult qp = solve_qp(assembly.qp);

            Eigen::VectorXd p;
            Eigen::VectorXd lambda_new = lambda;
            bool al_step = false;
            double dir_deriv = 0.0;

            if (qp.solved) {
                consecutive_fallbacks = 0;
                p = qp.p;
                for (int r = 0; r < m; ++r) {
                    double l = 0.0;
                    if (assembly.eq_of_row[r] >= 0) l = qp.y[assembly.eq_of_row[r]];
                    if (assembly.up_of_row[r] >= 0) l += qp.z[assembly.up_of_row[r]];
                    if (assembly.lo_of_row[r] >= 0) l -= qp.z[assembly.lo_of_row[r]];
                    lambda_new[r] = l;
                }
                for (int i = 0; i < n; ++i) {
                    double nu = 0.0;
                    if (assembly.fixed_eq_of_var[i] >= 0)
                        nu = qp.y[assembly.fixed_eq_of_var[i]];
                    if (assembly.ub_of_var[i] >= 0) nu += qp.z[assembly.ub_of_var[i]];
                    if (assembly.lb_of_var[i] >= 0) nu -= qp.z[assembly.lb_of_var[i]];
                    bound_mult[i] = nu;
                }
                const double lam_norm = m > 0 ? lambda_new.lpNorm<Eigen::Infinity>() : 0.0;
                if (penalty < 1.1 * lam_norm) penalty = 1.1 * lam_norm + 1e-4;
                dir_deriv = g.dot(p) - penalty * prob.total_violation(c);
            } else {
                // Inconsistent (or otherwise unsolved) QP: augmented-
                // Lagrangian step on the linearized model, bounds kept hard.
                ++sol.al_fallback_steps;
                ++consecutive_fallbacks;
                if (consecutive_fallbacks > 8) {
                    sol.status = viol_inf > opts_.tol ? SolveStatus::Infeasible
                                                      : SolveStatus::NumericalFailure;
                    break;
                }
                al_step = true;
                auto [al_qp, al_grad] = build_al_qp(prob, b_mat, g, x, c, jac, lambda, rho_al);
                const QpResult alr = solve_qp(al_qp);
                if (!alr.solved) {
                    sol.status = SolveStatus::NumericalFailure;
                    break;
                }
                p = alr.p;
                dir_deriv = al_grad.dot(p);
                rho_al = std::min(rho_al * 10.0, 1e10);
            }

            // Tiny step with feasibility: accept convergence check next loop.
            const double p_norm = p.lpNorm<Eigen::Infinity>();
            if (p_norm <= 1e-14 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
                lambda = lambda_new;
                const double stat2 = stationarity(prob, x, g, jac, lambda);
                sol.status = (viol_inf <= opts_.tol && stat2 <= opts_.tol)
                                 ? SolveStatus::Converged
                                 : SolveStatus::IterationLimit;
                break;
            }

            auto merit = [&](double fv, const Eigen::VectorXd& cv) {
                return al_step ? al_merit(prob, fv, cv, lambda, rho_al)
                               : fv + penalty * prob.total_violation(cv);
            };

            const double phi0 = merit(f, c);
            double alpha = 1.0;
            double f_try = f;
            Eigen::VectorXd c_try;
            bool accepted = false;
            for (int ls = 0; ls < opts_.max_line_search; ++ls) {
                const Eigen::VectorXd x_try =
                    (x + alpha * p).cwiseMax(prob.lower_bounds).cwiseMin(prob.upper_bounds);
                f_try = prob.objective(x_try);
                c_try = prob.eval_constraints(x_try);
                if (std::isfinite(f_try) && c_try.allFinite()) {
                    const double phi_try = merit(f_try, c_try);
                    if (phi_try <= phi0 + opts_.armijo * alpha * std::min(dir_deriv, 0.0)) {
                        accepted = true;
                        IterationRecord rec;
                        rec.iteration = iter;
                        rec.objective = f_try;
                        rec.violation = prob.max_violation(c_try);
                        rec.merit = phi_try;
                        rec.step_length = alpha;
                        rec.penalty = penalty;
                        rec.merit_decrease = phi0 - phi_try;
                        sol.history.push_back(rec);
                        x = (x + alpha * p)
                                .cwiseMax(prob.lower_bounds)
                                .cwiseMin(prob.upper_bounds);
                        break;
                    }
                }
                alpha *= 0.5;
            }

            if (!accepted) {
                if (!b_is_identity) {
                    // Stale curvature can poison the direction; restart clean.
                    b_mat = Eigen::MatrixXd::Identity(n, n);
                    b_is_identity = true;
                    pending = false;
                    continue;
                }
                sol.status = SolveStatus::NumericalFailure;
                break;
            }

            if (opts_.iteration_log) {
                const auto& rec = sol.history.back();
                (*opts_.iteration_log)
                    << rec.iteration << ',' << rec.objective << ',' << rec.violation << ','
                    << rec.merit << ',' << rec.step_length << ',' << rec.penalty << '\n';
            }

            if (!al_step) {
                s_prev = alpha * p;
                grad_l_old = g + jac.transpose() * lambda_new;
                lambda_pend = lambda_new;
                pending = true;
            }
            lambda = lambda_new;
            f = f_try;
            c = c_try;
        }

        sol.x = x;
        sol.objective = f;
        sol.constraint_violation = prob.max_violation(c);
        sol.multipliers = lambda;
        sol.bound_multipliers = bound_mult;
        sol.iterations = std::min(iter, opts_.max_iter);
        {
            Eigen::VectorXd g_fin = prob.objective_gradient
                                        ? prob.objective_gradient(x)
                                        : fd_gradient(prob.objective, x);
            const Eigen::MatrixXd jac_fin = jac_machine.evaluate(x, c);
            sol.kkt_residual =
                std::max(stationarity(prob, x, g_fin, jac_fin, lambda),
                         sol.constraint_violation);
        }
        if (sol.status == SolveStatus::Converged &&
            (sol.constraint_violation > opts_.tol || !(sol.kkt_residual <= 10 * opts_.tol)))
            sol.status = SolveStatus::IterationLimit;
        sol.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        return sol;
    }

  private:
    static double stationarity(const NlpProblem& prob, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& g, const Eigen::MatrixXd& jac,
                               const Eigen::VectorXd& lambda) {
        const Eigen::VectorXd r =
            prob.constraints.empty() ? g : Eigen::VectorXd(g + jac.transpose() * lambda);
        const Eigen::VectorXd proj =
            (x - r).cwiseMax(prob.lower_bounds).cwiseMin(prob.upper_bounds);
        return (proj - x).lpNorm<Eigen::Infinity>();
    }

    static void bfgs_update(Eigen::MatrixXd& b_mat, const Eigen::VectorXd& s,
                            Eigen::VectorXd y, bool& b_is_identity) {
        const double s_norm2 = s.squaredNorm();
        if (s_norm2 <= 0.0) return;
        const Eigen::VectorXd bs = b_mat * s;
        const double sbs = s.dot(bs);
        double sy = s.dot(y);
        if (sy < 0.2 * sbs) {
            const double theta = 0.8 * sbs / (sbs - sy);
            y = theta * y + (1.0 - theta) * bs;
            sy = s.dot(y);
        }
        if (sy <= 1e-14 * s_norm2 || sbs <= 0.0) return;
        b_mat += (y * y.transpose()) / sy - (bs * bs.transpose()) / sbs;
        b_is_identity = false;
    }

    /// Powell-Hestenes-Rockafellar value of one row for the l1-free merit
    /// used while the fallback is driving.
    static double al_merit(const NlpProblem& prob, double f, const Eigen::VectorXd& c,
                           const Eigen::VectorXd& lambda, double rho) {
        double acc = f;
        for (std::size_t r = 0; r < prob.constraints.size(); ++r) {
            const auto& row = prob.constraints[r];
            const auto ri = static_cast<Eigen::Index>(r);
            const double t = c[ri] + lambda[ri] / rho;
            const double proj = std::clamp(t, row.lower, row.upper);
            acc += 0.5 * rho * (t - proj) * (t - proj) -
                   lambda[ri] * lambda[ri] / (2.0 * rho);
        }
        return acc;
    }

    static std::pair<QpProblem, Eigen::VectorXd> build_al_qp(
        const NlpProblem& prob, const Eigen::MatrixXd& b_mat, const Eigen::VectorXd& g,
        const Eigen::VectorXd& x, const Eigen::VectorXd& c, const Eigen::MatrixXd& jac,
        const Eigen::VectorXd& lambda, double rho) {
        const int n = prob.n;
        QpProblem qp;
        qp.H = b_mat;
        qp.g = g;
        for (std::size_t r = 0; r < prob.constraints.size(); ++r) {
            const auto& row = prob.constraints[r];
            const auto ri = static_cast<Eigen::Index>(r);
            const double t = c[ri] + lambda[ri] / rho;
            double side;
            if (row.is_equality() || t < row.lower)
                side = row.lower;
            else if (t > row.upper)
                side = row.upper;
            else
                continue;  // strictly inside: no penalty curvature
            const double resid = c[ri] - side + lambda[ri] / rho;
            qp.H += rho * jac.row(ri).transpose() * jac.row(ri);
            qp.g += rho * resid * jac.row(ri).transpose();
        }
        const Eigen::VectorXd al_grad = qp.g;

        // Bounds stay hard; they are always mutually consistent.
        int n_rows = 0;
        for (int i = 0; i < n; ++i) {
            if (std::isfinite(prob.upper_bounds[i])) ++n_rows;
            if (std::isfinite(prob.lower_bounds[i])) ++n_rows;
        }
        qp.A = Eigen::MatrixXd::Zero(n_rows, n);
        qp.d = Eigen::VectorXd::Zero(n_rows);
        int k = 0;
        for (int i = 0; i < n; ++i) {
            if (std::isfinite(prob.upper_bounds[i])) {
                qp.A(k, i) = 1.0;
                qp.d[k++] = prob.upper_bounds[i] - x[i];
            }
            if (std::isfinite(prob.lower_bounds[i])) {
                qp.A(k, i) = -1.0;
                qp.d[k++] = x[i] - prob.lower_bounds[i];
            }
        }
        return {qp, al_grad};
    }

    SqpOptions opts_;
};

/// Convenience wrapper matching the documented defaults.
inline NlpSolution solve(const NlpProblem& problem, double tol = 1e-6, int max_iter = 500) {
    SqpOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return SqpSolver(opts).solve(problem);
}

}  // namespace bkoc::nlp
