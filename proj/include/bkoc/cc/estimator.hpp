#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bkoc/kde/kernel.hpp"
#include "bkoc/mcmc/hmc.hpp"
#include "bkoc/util/reduction.hpp"

namespace bkoc::cc {

/// Approximate violation probability P(psi < q) as the sample average of the
/// biased integrated kernel, (1/N) sum_j K_B((q - psi_j)/h). The sum uses a
/// fixed pairwise reduction tree, so the value is reproducible regardless of
/// how callers parallelize around it.
inline double kde_violation_estimate(std::span<const double> psi, double q,
                                     const kde::BiasedKernel& kernel) {
    if (psi.empty()) throw std::invalid_argument("kde_violation_estimate: empty sample set");
    const double inv_h = 1.0 / kernel.bandwidth;
    const double total = util::pairwise_sum(psi.size(), [&](std::size_t j) {
        return kde::biased_integrated_kernel(kernel, (q - psi[j]) * inv_h);
    });
    return std::clamp(total / static_cast<double>(psi.size()), 0.0, 1.0);
}

/// Two-index-set exponential bound estimate. With alpha_plus = 0 this equals
/// kde_violation_estimate with the Split-Bernstein kernel at h = 1/alpha_minus
/// and zero bias; with alpha_plus > 0 it exceeds the CDF form and is kept as a
/// comparison estimator rather than a kernel.
inline double split_bernstein_estimate(std::span<const double> psi, double q, double alpha_plus,
                                       double alpha_minus) {
    if (psi.empty()) throw std::invalid_argument("split_bernstein_estimate: empty sample set");
    if (!(alpha_minus > 0.0))
        throw std::invalid_argument("split_bernstein_estimate: alpha_minus must be > 0");
    if (alpha_plus < 0.0)
        throw std::invalid_argument("split_bernstein_estimate: alpha_plus must be >= 0");
    const double total = util::pairwise_sum(psi.size(), [&](std::size_t j) {
        const double gap = q - psi[j];
        return gap > 0.0 ? std::exp(alpha_plus * gap) : std::exp(alpha_minus * gap);
    });
    return total / static_cast<double>(psi.size());
}

/// Deterministic short-circuit around the sampled estimator: while the
/// trigger is at least `margin` below `threshold`, the constraint is slack.
struct Guard {
    std::function<double(Eigen::Ref<const Eigen::VectorXd>)> trigger;
    double threshold = 0.0;
    double margin = 0.0;

    bool active(Eigen::Ref<const Eigen::VectorXd> decision) const {
        return trigger(decision) > threshold - margin;
    }
};

/// One scalar chance constraint P(psi < bound) <= risk_budget, with the psi
/// map, its kernel, and an optional guard. decision_deps lists the entries of
/// the decision vector psi actually reads (used for derivative sparsity);
/// empty means all of them.
struct ChanceConstraintSpec {
    std::function<double(Eigen::Ref<const Eigen::VectorXd>, Eigen::Ref<const Eigen::VectorXd>)>
        psi;
    double bound = 0.0;
    double risk_budget = 0.05;
    kde::BiasedKernel kernel;
    std::optional<Guard> guard;
    std::vector<int> decision_deps;

    void validate() const {
        if (!psi) throw std::invalid_argument("ChanceConstraintSpec: psi must be set");
        if (!(risk_budget > 0.0) || !(risk_budget < 1.0))
            throw std::invalid_argument("ChanceConstraintSpec: risk budget must lie in (0,1)");
        if (guard && !guard->trigger)
            throw std::invalid_argument("ChanceConstraintSpec: guard trigger must be set");
    }
};

/// Evaluates the chance-constraint surrogate at one decision point. Returns 0
/// without touching the samples when the guard is inactive.
inline double guarded_violation_estimate(const ChanceConstraintSpec& spec,
                                         Eigen::Ref<const Eigen::VectorXd> decision,
                                         const mcmc::SampleSet& samples) {
    spec.validate();
    if (spec.guard && !spec.guard->active(decision)) return 0.0;

    if (samples.size() == 0)
        throw std::invalid_argument("guarded_violation_estimate: empty sample set");
    thread_local std::vector<double> scratch;
    const auto n = static_cast<std::size_t>(samples.size());
    scratch.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        scratch[j] = spec.psi(decision, samples.draws.row(static_cast<Eigen::Index>(j)));
    return kde_violation_estimate(scratch, spec.bound, spec.kernel);
}

}  // namespace bkoc::cc
