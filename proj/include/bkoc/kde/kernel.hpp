#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace bkoc::kde {

/// Kernel families available for the biased-KDE chance-constraint surrogate.
enum class KernelKind { SplitBernstein, Epanechnikov, Gaussian };

inline const char* to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::SplitBernstein: return "split-bernstein";
        case KernelKind::Epanechnikov: return "epanechnikov";
        case KernelKind::Gaussian: return "gaussian";
    }
    return "unknown";
}

inline KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "split-bernstein") return KernelKind::SplitBernstein;
    if (name == "epanechnikov") return KernelKind::Epanechnikov;
    if (name == "gaussian") return KernelKind::Gaussian;
    throw std::invalid_argument("unknown kernel '" + name +
                                "'; expected one of: split-bernstein, epanechnikov, gaussian");
}

/// Kernel density k(eta). Nonnegative, integrates to one over the real line.
/// Split-Bernstein is the one-sided exponential exp(eta) on eta <= 0.
inline double kernel_pdf(KernelKind kind, double eta) {
    switch (kind) {
        case KernelKind::SplitBernstein:
            return eta <= 0.0 ? std::exp(eta) : 0.0;
        case KernelKind::Epanechnikov:
            return (eta <= -1.0 || eta >= 1.0) ? 0.0 : 0.75 * (1.0 - eta * eta);
        case KernelKind::Gaussian:
            return 0.3989422804014326779 * std::exp(-0.5 * eta * eta);
    }
    return 0.0;
}

/// Integrated kernel K(eta) = integral of k from -inf to eta.
/// Nondecreasing from 0 to 1.
inline double integrated_kernel(KernelKind kind, double eta) {
    switch (kind) {
        case KernelKind::SplitBernstein:
            return eta <= 0.0 ? std::exp(eta) : 1.0;
        case KernelKind::Epanechnikov: {
            if (eta <= -1.0) return 0.0;
            if (eta >= 1.0) return 1.0;
            return 0.5 + 0.75 * eta - 0.25 * eta * eta * eta;
        }
        case KernelKind::Gaussian:
            return 0.5 * (1.0 + std::erf(eta * 0.7071067811865475244));
    }
    return 0.0;
}

/// Default bias that makes the integrated kernel dominate the step function:
/// Split-Bernstein already dominates (0), Epanechnikov needs a full bandwidth,
/// the Gaussian tail never closes so 3h covers all but 1 - Phi(3) of it.
inline double default_bias(KernelKind kind, double bandwidth) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    switch (kind) {
        case KernelKind::SplitBernstein: return 0.0;
        case KernelKind::Epanechnikov: return bandwidth;
        case KernelKind::Gaussian: return 3.0 * bandwidth;
    }
    return 0.0;
}

/// A kernel with its bandwidth h and bias B. The estimator evaluates the
/// shifted integrated function K_B(nu) = K(nu + B/h).
struct BiasedKernel {
    KernelKind kind = KernelKind::SplitBernstein;
    double bandwidth = 1.0;  // h > 0
    double bias = 0.0;       // B >= 0

    BiasedKernel() = default;
    BiasedKernel(KernelKind k, double h, double B) : kind(k), bandwidth(h), bias(B) {
        if (!(h > 0.0)) throw std::invalid_argument("BiasedKernel: bandwidth must be positive");
        if (B < 0.0) throw std::invalid_argument("BiasedKernel: bias must be nonnegative");
    }

    /// Kernel with its bounding default bias for the given bandwidth.
    static BiasedKernel with_default_bias(KernelKind k, double h) {
        return BiasedKernel(k, h, default_bias(k, h));
    }
};

/// Biased integrated kernel K_B(nu) = K(nu + B/h); in [0,1], nondecreasing.
inline double biased_integrated_kernel(const BiasedKernel& bk, double nu) {
    return integrated_kernel(bk.kind, nu + bk.bias / bk.bandwidth);
}

/// Density of the biased kernel, k(nu + B/h); the derivative of K_B in nu.
/// Used by the analytic-derivative mode of the NLP solver.
inline double biased_kernel_pdf(const BiasedKernel& bk, double nu) {
    return kernel_pdf(bk.kind, nu + bk.bias / bk.bandwidth);
}

}  // namespace bkoc::kde
