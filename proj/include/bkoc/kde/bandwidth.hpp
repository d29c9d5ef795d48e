#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace bkoc::kde {

namespace detail {

/// Linear-interpolated sample quantile on a sorted range (the common "type 7" rule).
inline double sorted_quantile(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

/// Silverman's normal-reference bandwidth,
///   h = 0.9 * min(sigma, IQR/1.34) * N^(-1/5),
/// with the IQR branch skipped when the interquartile range is degenerate.
inline double bandwidth_select(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("bandwidth_select: need at least 2 samples");

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(n - 1));

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = detail::sorted_quantile(sorted, 0.75) - detail::sorted_quantile(sorted, 0.25);

    double spread = sigma;
    if (iqr > 0.0) spread = std::min(sigma, iqr / 1.34);
    if (!(spread > 0.0))
        throw std::invalid_argument(
            "bandwidth_select: samples have zero spread; supply a bandwidth manually");

    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

}  // namespace bkoc::kde
