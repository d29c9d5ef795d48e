#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bkoc/cc/estimator.hpp"
#include "bkoc/cc/risk.hpp"
#include "bkoc/kde/bandwidth.hpp"
#include "bkoc/mcmc/hmc.hpp"
#include "bkoc/prob/distribution.hpp"

using bkoc::cc::ChanceConstraintSpec;
using bkoc::cc::guarded_violation_estimate;
using bkoc::cc::kde_violation_estimate;
using bkoc::cc::split_bernstein_estimate;
using bkoc::kde::BiasedKernel;
using bkoc::kde::KernelKind;

namespace {

bkoc::mcmc::SampleSet sample_set_from(const std::vector<double>& values) {
    bkoc::mcmc::SampleSet s;
    s.draws.resize(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i)
        s.draws(static_cast<Eigen::Index>(i), 0) = values[i];
    return s;
}

// Lunar-style control path constraint: psi = 3 - u - xi, enforced as
// P(psi < 0) <= eps, guarded on u <= 3 - b.
ChanceConstraintSpec lunar_path_spec(double h, int* psi_calls) {
    ChanceConstraintSpec spec;
    spec.psi = [psi_calls](Eigen::Ref<const Eigen::VectorXd> decision,
                           Eigen::Ref<const Eigen::VectorXd> xi) {
        if (psi_calls) ++*psi_calls;
        return 3.0 - decision[0] - xi[0];
    };
    spec.bound = 0.0;
    spec.risk_budget = 0.01;
    spec.kernel = BiasedKernel::with_default_bias(KernelKind::SplitBernstein, h);
    spec.guard = bkoc::cc::Guard{
        [](Eigen::Ref<const Eigen::VectorXd> decision) { return decision[0]; }, 3.0, 1.0};
    spec.decision_deps = {0};
    return spec;
}

}  // namespace

TEST_CASE("uniform risk allocation", "[cc]") {
    const auto one = bkoc::cc::allocate_risk(0.1, 1);
    REQUIRE(one.per_component.size() == 1);
    CHECK(one.per_component[0] == 0.1);

    const auto two = bkoc::cc::allocate_risk(0.1, 2);
    CHECK(two.per_component[0] == 0.05);
    CHECK(two.per_component[1] == 0.05);
    CHECK(two.sum() <= 0.1);

    for (std::size_t n : {1u, 3u, 7u, 100u}) {
        const auto a = bkoc::cc::allocate_risk(0.37, n);
        CHECK(a.sum() <= 0.37 + 1e-15);
        for (double e : a.per_component) CHECK(e > 0.0);
    }

    CHECK_THROWS_AS(bkoc::cc::allocate_risk(0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(bkoc::cc::allocate_risk(0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(bkoc::cc::allocate_risk(1.0, 2), std::invalid_argument);
}

TEST_CASE("kde estimate saturates far from the bound", "[cc]") {
    std::vector<double> far_above, far_below;
    for (int i = 0; i < 200; ++i) {
        far_above.push_back(25.0 + 0.01 * i);  // distance / h = 50+
        far_below.push_back(-25.0 - 0.01 * i);
    }
    for (KernelKind kind :
         {KernelKind::SplitBernstein, KernelKind::Epanechnikov, KernelKind::Gaussian}) {
        const auto bk = BiasedKernel::with_default_bias(kind, 0.5);
        CHECK(kde_violation_estimate(far_above, 0.0, bk) <= 1e-9);
        CHECK(kde_violation_estimate(far_below, 0.0, bk) >= 1.0 - 1e-9);
    }
    CHECK_THROWS_AS(kde_violation_estimate({}, 0.0,
                                           BiasedKernel(KernelKind::SplitBernstein, 0.5, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("kde estimate two-sample hand value", "[cc]") {
    const std::vector<double> psi{-1.0, 1.0};
    const auto bk = BiasedKernel(KernelKind::SplitBernstein, 0.5, 0.0);
    const double est = kde_violation_estimate(psi, 0.0, bk);
    CHECK(est == Catch::Approx(0.5 * (1.0 + std::exp(-2.0))).epsilon(1e-14));
    CHECK(est == Catch::Approx(0.56767).margin(5e-6));
}

TEST_CASE("split-Bernstein estimate hand value and bounds", "[cc]") {
    const std::vector<double> psi{-1.0, 1.0};
    const double est = split_bernstein_estimate(psi, 0.0, 0.1, 2.0);
    CHECK(est == Catch::Approx(0.5 * (std::exp(0.1) + std::exp(-2.0))).epsilon(1e-14));
    CHECK(est == Catch::Approx(0.62025).margin(5e-6));

    CHECK_THROWS_AS(split_bernstein_estimate(psi, 0.0, 0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(split_bernstein_estimate(psi, 0.0, -0.1, 2.0), std::invalid_argument);
}

TEST_CASE("split-Bernstein with alpha_plus = 0 equals the kernel estimate", "[cc]") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> hdist(0.01, 2.0);
    std::uniform_int_distribution<int> ndist(1, 200);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = ndist(rng);
        std::vector<double> psi(n);
        for (double& v : psi) v = 0.3 * normal(rng);
        const double q = 0.25 * normal(rng);
        const double h = hdist(rng);
        const double via_sb = split_bernstein_estimate(psi, q, 0.0, 1.0 / h);
        const double via_kde =
            kde_violation_estimate(psi, q, BiasedKernel(KernelKind::SplitBernstein, h, 0.0));
        REQUIRE(std::abs(via_sb - via_kde) <= 1e-12);
    }
}

TEST_CASE("split-Bernstein with alpha_plus > 0 dominates the CDF form", "[cc]") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> psi(50);
        for (double& v : psi) v = normal(rng);
        const double base = split_bernstein_estimate(psi, 0.1, 0.0, 4.0);
        const double bumped = split_bernstein_estimate(psi, 0.1, 0.3, 4.0);
        REQUIRE(bumped >= base);
    }
}

TEST_CASE("estimate lies in [0,1] and is monotone under sample shifts", "[cc]") {
    std::mt19937_64 rng(39);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> shift(0.0, 2.0);
    for (KernelKind kind :
         {KernelKind::SplitBernstein, KernelKind::Epanechnikov, KernelKind::Gaussian}) {
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> psi(64);
            for (double& v : psi) v = normal(rng);
            const auto bk = BiasedKernel::with_default_bias(kind, 0.2);
            const double est = kde_violation_estimate(psi, 0.0, bk);
            REQUIRE(est >= 0.0);
            REQUIRE(est <= 1.0);
            const double c = shift(rng) + 1e-3;
            std::vector<double> shifted = psi;
            for (double& v : shifted) v += c;
            REQUIRE(kde_violation_estimate(shifted, 0.0, bk) <= est);
        }
    }
}

TEST_CASE("qualifying kernels stay above the empirical violation fraction", "[cc]") {
    std::mt19937_64 rng(57);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (KernelKind kind : {KernelKind::SplitBernstein, KernelKind::Epanechnikov}) {
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> psi(128);
            for (double& v : psi) v = normal(rng);
            const double q = 0.5 * normal(rng);
            const auto bk = BiasedKernel::with_default_bias(kind, 0.15);
            const double est = kde_violation_estimate(psi, q, bk);
            int violations = 0;
            for (double v : psi)
                if (v <= q) ++violations;  // ties count as violations
            REQUIRE(est >= static_cast<double>(violations) / psi.size() - 1e-15);
        }
    }
}

TEST_CASE("estimate approaches the empirical CDF as h -> 0", "[cc]") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> psi(256);
    for (double& v : psi) v = normal(rng);
    const double q = 0.3;
    for (double& v : psi)
        if (std::abs(v - q) < 0.02) v += 0.05;  // keep samples off the boundary
    double ecdf = 0.0;
    for (double v : psi)
        if (v <= q) ecdf += 1.0;
    ecdf /= static_cast<double>(psi.size());

    for (KernelKind kind :
         {KernelKind::SplitBernstein, KernelKind::Epanechnikov, KernelKind::Gaussian}) {
        double prev_gap = 2.0;
        for (double h : {1e-1, 1e-2, 1e-3}) {
            const auto bk = BiasedKernel::with_default_bias(kind, h);
            const double gap = std::abs(kde_violation_estimate(psi, q, bk) - ecdf);
            REQUIRE(gap <= prev_gap + 1e-15);
            prev_gap = gap;
        }
        CHECK(prev_gap <= 1e-9);
    }
}

TEST_CASE("guard short-circuits without touching the samples", "[cc]") {
    // Thrust-noise style bimodal samples via HMC.
    const auto bimodal = bkoc::prob::DistributionSpec::bimodal(
        bkoc::prob::MixtureComponent(1.03, 0.0, 0.05),
        bkoc::prob::MixtureComponent(1.12, -0.07, 0.08, 0.08 * 0.08));
    bkoc::mcmc::HmcConfig cfg;
    cfg.n_samples = 5000;
    cfg.burn_in = 500;
    cfg.seed = 3;
    const auto samples =
        bkoc::mcmc::sample(bkoc::prob::RandomVectorSpec::independent({bimodal}), cfg);

    int calls = 0;
    auto spec = lunar_path_spec(0.02, &calls);
    Eigen::VectorXd u(1);

    u << 1.5;
    CHECK(guarded_violation_estimate(spec, u, samples) == 0.0);
    CHECK(calls == 0);

    u << 2.5;
    const double guarded = guarded_violation_estimate(spec, u, samples);
    CHECK(calls == samples.size());
    auto unguarded = spec;
    unguarded.guard.reset();
    CHECK(guarded == guarded_violation_estimate(unguarded, u, samples));
}

TEST_CASE("guard switch point continuity", "[cc]") {
    const auto bimodal = bkoc::prob::DistributionSpec::bimodal(
        bkoc::prob::MixtureComponent(1.03, 0.0, 0.05),
        bkoc::prob::MixtureComponent(1.12, -0.07, 0.08, 0.08 * 0.08));
    bkoc::mcmc::HmcConfig cfg;
    cfg.n_samples = 5000;
    cfg.burn_in = 500;
    cfg.seed = 3;
    const auto samples =
        bkoc::mcmc::sample(bkoc::prob::RandomVectorSpec::independent({bimodal}), cfg);

    auto spec = lunar_path_spec(0.02, nullptr);
    Eigen::VectorXd u(1);
    u << 3.0 - 1.0;  // exactly at the switch
    CHECK(guarded_violation_estimate(spec, u, samples) == 0.0);
    auto unguarded = spec;
    unguarded.guard.reset();
    CHECK(guarded_violation_estimate(unguarded, u, samples) <= 1e-6);
}
