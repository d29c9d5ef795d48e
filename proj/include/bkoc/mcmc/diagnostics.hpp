#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

namespace bkoc::mcmc {

/// Effective sample size of one chain component via Geyer's initial positive
/// sequence on the autocorrelation function.
inline double effective_sample_size(Eigen::Ref<const Eigen::VectorXd> chain) {
    const Eigen::Index n = chain.size();
    if (n < 4) return static_cast<double>(n);
    const double mean = chain.mean();
    Eigen::VectorXd centered = chain.array() - mean;
    const double var0 = centered.squaredNorm() / static_cast<double>(n);
    if (var0 <= 0.0) return static_cast<double>(n);

    auto autocov = [&](Eigen::Index lag) {
        return centered.head(n - lag).dot(centered.tail(n - lag)) / static_cast<double>(n);
    };

    double tail = 0.0;
    const Eigen::Index max_lag = std::min<Eigen::Index>(n - 2, 2000);
    for (Eigen::Index lag = 1; lag + 1 <= max_lag; lag += 2) {
        const double pair = autocov(lag) + autocov(lag + 1);
        if (pair <= 0.0) break;
        tail += pair;
    }
    const double denom = 1.0 + 2.0 * tail / var0;
    return std::max(1.0, static_cast<double>(n) / std::max(denom, 1e-12));
}

struct SplitHalfCheck {
    bool passed = true;
    double worst_discrepancy_in_se = 0.0;  // max over components of |mean1-mean2| / SE
};

/// Compares first- and second-half means of every component at 2 standard
/// errors, with the variance inflated by the estimated autocorrelation time.
inline SplitHalfCheck split_half_check(Eigen::Ref<const Eigen::MatrixXd> draws) {
    SplitHalfCheck result;
    const Eigen::Index n = draws.rows();
    if (n < 8) return result;
    const Eigen::Index half = n / 2;
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
        const auto a = draws.col(j).head(half);
        const auto b = draws.col(j).tail(half);
        const double ma = a.mean(), mb = b.mean();
        const double va = (a.array() - ma).square().sum() / static_cast<double>(half - 1);
        const double vb = (b.array() - mb).square().sum() / static_cast<double>(half - 1);
        const double ess_a = effective_sample_size(a);
        const double ess_b = effective_sample_size(b);
        const double se = std::sqrt(va / ess_a + vb / ess_b);
        if (se <= 0.0) continue;
        const double z = std::abs(ma - mb) / se;
        result.worst_discrepancy_in_se = std::max(result.worst_discrepancy_in_se, z);
    }
    result.passed = result.worst_discrepancy_in_se <= 2.0;
    return result;
}

}  // namespace bkoc::mcmc
