#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bkoc::cc {

/// Risk budget split across the components of a joint chance constraint.
/// Boole's inequality makes the per-component enforcement conservative as
/// long as the budgets sum to at most the joint budget.
struct RiskAllocation {
    double total = 0.0;
    std::vector<double> per_component;

    double sum() const {
        double s = 0.0;
        for (double e : per_component) s += e;
        return s;
    }
};

/// Uniform split epsilon_m = epsilon / n_components.
inline RiskAllocation allocate_risk(double epsilon, std::size_t n_components) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("allocate_risk: epsilon must lie in (0,1)");
    if (n_components == 0)
        throw std::invalid_argument("allocate_risk: need at least one component");
    RiskAllocation a;
    a.total = epsilon;
    a.per_component.assign(n_components, epsilon / static_cast<double>(n_components));
    return a;
}

}  // namespace bkoc::cc
