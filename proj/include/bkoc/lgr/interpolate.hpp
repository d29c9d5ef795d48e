#pragma once

#include <Eigen/Core>
#include <cmath>

#include "bkoc/lgr/rule.hpp"

namespace bkoc::lgr {

/// Barycentric Lagrange evaluation at x of the polynomial through
/// (points[i], values[i]). Exact at the nodes.
inline double lagrange_eval(const Eigen::VectorXd& points, const Eigen::VectorXd& bary,
                            const Eigen::VectorXd& values, double x) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < points.size(); ++j) {
        const double dx = x - points[j];
        if (dx == 0.0) return values[j];
        const double c = bary[j] / dx;
        num += c * values[j];
        den += c;
    }
    return num / den;
}

/// Polynomial interpolant over fixed support points, with exact derivative
/// evaluation through the full differentiation matrix.
class LagrangeInterpolant {
  public:
    explicit LagrangeInterpolant(Eigen::VectorXd points)
        : points_(std::move(points)),
          bary_(detail::barycentric_weights(points_)),
          diff_full_(detail::differentiation_matrix_full(points_)) {}

    const Eigen::VectorXd& points() const { return points_; }

    double value(const Eigen::VectorXd& values, double x) const {
        return lagrange_eval(points_, bary_, values, x);
    }

    /// Derivative of the interpolant at x: the derivative is itself a
    /// polynomial known exactly at the support points as D_full * values.
    double derivative(const Eigen::VectorXd& values, double x) const {
        const Eigen::VectorXd dv = diff_full_ * values;
        return lagrange_eval(points_, bary_, dv, x);
    }

  private:
    Eigen::VectorXd points_;
    Eigen::VectorXd bary_;
    Eigen::MatrixXd diff_full_;
};

}  // namespace bkoc::lgr
