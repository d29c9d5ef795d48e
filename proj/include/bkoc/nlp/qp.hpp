#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace bkoc::nlp {

/// Convex quadratic program
///   min 0.5 p'Hp + g'p   s.t.  E p = b,  A p <= d.
struct QpProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    Eigen::MatrixXd E;
    Eigen::VectorXd b;
    Eigen::MatrixXd A;
    Eigen::VectorXd d;
};

struct QpResult {
    Eigen::VectorXd p;
    Eigen::VectorXd y;  // equality multipliers
    Eigen::VectorXd z;  // inequality multipliers, >= 0
    bool solved = false;
    int iterations = 0;
};

/// Dense Mehrotra predictor-corrector interior point method. H must be
/// positive definite (the SQP layer guarantees this through damped updates).
inline QpResult solve_qp(const QpProblem& qp, double tol = 1e-10, int max_iter = 60) {
    const Eigen::Index n = qp.g.size();
    const Eigen::Index me = qp.b.size();
    const Eigen::Index mi = qp.d.size();

    QpResult out;
    out.p = Eigen::VectorXd::Zero(n);
    out.y = Eigen::VectorXd::Zero(me);
    out.z = Eigen::VectorXd::Zero(mi);

    const double reg = 1e-11 * std::max(1.0, qp.H.cwiseAbs().maxCoeff());

    // Pure equality-constrained case: one KKT solve.
    if (mi == 0) {
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + me, n + me);
        kkt.topLeftCorner(n, n) = qp.H + reg * Eigen::MatrixXd::Identity(n, n);
        if (me > 0) {
            kkt.topRightCorner(n, me) = qp.E.transpose();
            kkt.bottomLeftCorner(me, n) = qp.E;
            kkt.bottomRightCorner(me, me) = -reg * Eigen::MatrixXd::Identity(me, me);
        }
        Eigen::VectorXd rhs(n + me);
        rhs.head(n) = -qp.g;
        rhs.tail(me) = qp.b;
        const Eigen::VectorXd sol = Eigen::PartialPivLU<Eigen::MatrixXd>(kkt).solve(rhs);
        out.p = sol.head(n);
        out.y = sol.tail(me);
        const double res = (qp.H * out.p + qp.g +
                            (me > 0 ? Eigen::VectorXd(qp.E.transpose() * out.y)
                                    : Eigen::VectorXd::Zero(n)))
                               .lpNorm<Eigen::Infinity>();
        const double feas = me > 0 ? (qp.E * out.p - qp.b).lpNorm<Eigen::Infinity>() : 0.0;
        out.solved = res <= 1e-6 * (1.0 + qp.g.lpNorm<Eigen::Infinity>()) && feas <= 1e-8;
        out.iterations = 1;
        return out;
    }

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(me);
    Eigen::VectorXd s(mi), z(mi);
    for (Eigen::Index i = 0; i < mi; ++i) {
        s[i] = std::max(1.0, std::abs(qp.d[i]));
        z[i] = 1.0;
    }

    const double gscale = 1.0 + qp.g.lpNorm<Eigen::Infinity>();
    Eigen::MatrixXd kkt(n + me, n + me);
    Eigen::VectorXd rhs(n + me);

    for (int iter = 1; iter <= max_iter; ++iter) {
        const Eigen::VectorXd rd =
            qp.H * p + qp.g + (me > 0 ? Eigen::VectorXd(qp.E.transpose() * y)
                                      : Eigen::VectorXd::Zero(n)) +
            qp.A.transpose() * z;
        const Eigen::VectorXd re = me > 0 ? Eigen::VectorXd(qp.E * p - qp.b) : Eigen::VectorXd();
        const Eigen::VectorXd ri = qp.A * p + s - qp.d;
        const double mu = s.dot(z) / static_cast<double>(mi);

        const double res_d = rd.lpNorm<Eigen::Infinity>() / gscale;
        const double res_e = me > 0 ? re.lpNorm<Eigen::Infinity>() : 0.0;
        const double res_i = ri.lpNorm<Eigen::Infinity>();
        if (res_d <= tol && res_e <= tol && res_i <= tol && mu <= tol) {
            out.p = p;
            out.y = y;
            out.z = z;
            out.solved = true;
            out.iterations = iter;
            return out;
        }

        const Eigen::VectorXd w = z.cwiseQuotient(s);  // diag weights z/s
        kkt.setZero();
        kkt.topLeftCorner(n, n) =
            qp.H + qp.A.transpose() * w.asDiagonal() * qp.A +
            reg * Eigen::MatrixXd::Identity(n, n);
        if (me > 0) {
            kkt.topRightCorner(n, me) = qp.E.transpose();
            kkt.bottomLeftCorner(me, n) = qp.E;
            kkt.bottomRightCorner(me, me) = -reg * Eigen::MatrixXd::Identity(me, me);
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);

        auto solve_newton = [&](const Eigen::VectorXd& rc) {
            // rc is the complementarity residual target: Z S e - sigma mu e (+corr).
            Eigen::VectorXd tmp = w.cwiseProduct(ri) - rc.cwiseQuotient(s);
            rhs.head(n) = -rd - qp.A.transpose() * tmp;
            if (me > 0) rhs.tail(me) = -re;
            const Eigen::VectorXd sol = lu.solve(rhs);
            struct Dir {
                Eigen::VectorXd dp, dy, ds, dz;
            } dir;
            dir.dp = sol.head(n);
            dir.dy = me > 0 ? Eigen::VectorXd(sol.tail(me)) : Eigen::VectorXd();
            dir.ds = -ri - qp.A * dir.dp;
            dir.dz = -rc.cwiseQuotient(s) - w.cwiseProduct(dir.ds);
            return dir;
        };

        auto max_step = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
            double a = 1.0;
            for (Eigen::Index i = 0; i < v.size(); ++i)
                if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
            return a;
        };

        // Predictor.
        const Eigen::VectorXd rc_aff = s.cwiseProduct(z);
        const auto aff = solve_newton(rc_aff);
        const double a_aff =
            std::min(max_step(s, aff.ds), max_step(z, aff.dz));
        const double mu_aff = (s + a_aff * aff.ds).dot(z + a_aff * aff.dz) /
                              static_cast<double>(mi);
        const double sigma = std::pow(mu_aff / mu, 3);

        // Corrector.
        const Eigen::VectorXd rc =
            s.cwiseProduct(z) + aff.ds.cwiseProduct(aff.dz) -
            sigma * mu * Eigen::VectorXd::Ones(mi);
        const auto dir = solve_newton(rc);

        const double alpha =
            0.995 * std::min(max_step(s, dir.ds), max_step(z, dir.dz));
        if (!std::isfinite(alpha) || alpha < 1e-13) break;

        p += alpha * dir.dp;
        if (me > 0) y += alpha * dir.dy;
        s += alpha * dir.ds;
        z += alpha * dir.dz;
        out.iterations = iter;
    }

    out.p = p;
    out.y = y;
    out.z = z;
    out.solved = false;
    return out;
}

}  // namespace bkoc::nlp
