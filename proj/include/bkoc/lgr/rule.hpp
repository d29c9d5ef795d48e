#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace bkoc::lgr {

/// Legendre-Gauss-Radau rule of degree N on [-1, +1): N collocation points
/// (the first is -1), N quadrature weights, and the N x (N+1) differentiation
/// matrix over the collocation points plus the noncollocated endpoint +1.
struct LgrRule {
    int degree = 0;
    Eigen::VectorXd points;   // N+1: collocation points then +1
    Eigen::VectorXd weights;  // N
    Eigen::MatrixXd diff;     // N x (N+1)

    Eigen::Index n_colloc() const { return degree; }
};

namespace detail {

/// Legendre P_n(x) and its derivative by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
    double pm1 = 1.0, p = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm1) / k;
        pm1 = p;
        p = pk;
    }
    const double dp = n * (x * p - pm1) / (x * x - 1.0);
    return {p, dp};
}

/// Barycentric weights for a set of support points.
inline Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& pts) {
    const Eigen::Index n = pts.size();
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index l = 0; l < n; ++l) {
            if (l != j) w[j] /= (pts[j] - pts[l]);
        }
    }
    return w;
}

/// Differentiation matrix over all support points via barycentric weights.
inline Eigen::MatrixXd differentiation_matrix_full(const Eigen::VectorXd& pts) {
    const Eigen::Index n = pts.size();
    const Eigen::VectorXd w = barycentric_weights(pts);
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double diag = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            d(i, j) = (w[j] / w[i]) / (pts[i] - pts[j]);
            diag -= d(i, j);
        }
        d(i, i) = diag;
    }
    return d;
}

}  // namespace detail

/// Builds the LGR rule of the given degree (2..64). Interior points start as
/// eigenvalues of the Jacobi(0,1) matrix and are Newton-polished on
/// P_{N-1} + P_N; weights use the closed form w_1 = 2/N^2,
/// w_i = (1 - tau_i) / (N P_{N-1}(tau_i))^2.
inline LgrRule lgr_rule(int degree) {
    if (degree < 2 || degree > 64)
        throw std::invalid_argument("lgr_rule: degree must lie in [2, 64]");
    const int n = degree;

    LgrRule rule;
    rule.degree = n;
    rule.points.resize(n + 1);
    rule.points[0] = -1.0;
    rule.points[n] = 1.0;

    // Interior collocation points: roots of the Jacobi(0,1) polynomial of
    // degree N-1, from the symmetric tridiagonal Jacobi matrix.
    const int m = n - 1;
    if (m > 0) {
        Eigen::VectorXd diag(m), sub(std::max(0, m - 1));
        for (int k = 0; k < m; ++k)
            diag[k] = 1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
        for (int k = 1; k < m; ++k)
            sub[k - 1] = std::sqrt(k * (k + 1.0)) / (2.0 * k + 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        Eigen::VectorXd interior = es.eigenvalues();

        for (int i = 0; i < m; ++i) {
            double x = interior[i];
            for (int it = 0; it < 8; ++it) {
                const auto [pn1, dpn1] = detail::legendre_with_derivative(n - 1, x);
                const auto [pn, dpn] = detail::legendre_with_derivative(n, x);
                const double f = pn1 + pn;
                const double df = dpn1 + dpn;
                const double step = f / df;
                x -= step;
                if (std::abs(step) < 1e-15) break;
            }
            rule.points[i + 1] = x;
        }
    }

    rule.weights.resize(n);
    rule.weights[0] = 2.0 / (static_cast<double>(n) * n);
    for (int i = 1; i < n; ++i) {
        const double tau = rule.points[i];
        const double pn1 = detail::legendre_with_derivative(n - 1, tau).first;
        rule.weights[i] = (1.0 - tau) / (static_cast<double>(n) * n * pn1 * pn1);
    }

    rule.diff = detail::differentiation_matrix_full(rule.points).topRows(n);
    return rule;
}

/// The N x (N+1) Legendre-Gauss-Radau differentiation matrix of a rule.
inline const Eigen::MatrixXd& differentiation_matrix(const LgrRule& rule) { return rule.diff; }

}  // namespace bkoc::lgr
