#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "bkoc/mcmc/diagnostics.hpp"
#include "bkoc/mcmc/hmc.hpp"
#include "bkoc/prob/distribution.hpp"

using bkoc::mcmc::HmcConfig;
using bkoc::mcmc::leapfrog;
using bkoc::mcmc::SampleSet;
using bkoc::prob::DistributionSpec;
using bkoc::prob::MixtureComponent;
using bkoc::prob::RandomVectorSpec;

namespace {

DistributionSpec make_bimodal() {
    return DistributionSpec::bimodal(MixtureComponent(1.03, 0.0, 0.05),
                                     MixtureComponent(1.12, -0.07, 0.08, 0.08 * 0.08));
}

Eigen::VectorXd scalar_vec(double v) {
    Eigen::VectorXd x(1);
    x << v;
    return x;
}

// Gradient of the standard normal log-density.
Eigen::VectorXd std_normal_grad(const Eigen::VectorXd& q) { return -q; }

}  // namespace

TEST_CASE("leapfrog matches a hand-stepped trajectory", "[hmc]") {
    // Standard Gaussian target, (q, p) = (0, 1), eps = 0.1, L = 1.
    // Half kick:  p = 1 + 0.05 * (-0)   = 1
    // Drift:      q = 0 + 0.1 * 1       = 0.1
    // Half kick:  p = 1 + 0.05 * (-0.1) = 0.995
    auto [q1, p1] = leapfrog(scalar_vec(0.0), scalar_vec(1.0), std_normal_grad, 0.1, 1);
    CHECK(q1[0] == Catch::Approx(0.1).epsilon(1e-15));
    CHECK(p1[0] == Catch::Approx(0.995).epsilon(1e-15));

    // Two steps by hand from (0.1, 0.995):
    // p = 0.995 + 0.05*(-0.1) = 0.99; q = 0.1 + 0.1*0.99 = 0.199;
    // p = 0.99 + 0.1*(-0.199) = 0.9701; q = 0.199 + 0.1*0.9701 = 0.29601;
    // p = 0.9701 + 0.05*(-0.29601) = 0.9552995
    auto [q2, p2] = leapfrog(q1, p1, std_normal_grad, 0.1, 2);
    CHECK(q2[0] == Catch::Approx(0.29601).epsilon(1e-14));
    CHECK(p2[0] == Catch::Approx(0.9552995).epsilon(1e-14));
}

TEST_CASE("leapfrog is reversible to round-off", "[hmc]") {
    auto grad = [](const Eigen::VectorXd& q) -> Eigen::VectorXd {
        return -q.array().cube().matrix() - q;  // quartic-plus-quadratic well
    };
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd q(3), p(3);
        for (int i = 0; i < 3; ++i) {
            q[i] = normal(rng);
            p[i] = normal(rng);
        }
        auto [qf, pf] = leapfrog(q, p, grad, 0.05, 20);
        auto [qb, pb] = leapfrog(qf, Eigen::VectorXd(-pf), grad, 0.05, 20);
        REQUIRE((qb - q).lpNorm<Eigen::Infinity>() < 1e-12);
        REQUIRE((pb + p).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("leapfrog energy drift on the harmonic oscillator", "[hmc]") {
    const Eigen::VectorXd q0 = scalar_vec(1.0), p0 = scalar_vec(0.0);
    auto [q, p] = leapfrog(q0, p0, std_normal_grad, 0.01, 100);
    const double h0 = 0.5 * (q0.squaredNorm() + p0.squaredNorm());
    const double h1 = 0.5 * (q.squaredNorm() + p.squaredNorm());
    CHECK(std::abs(h1 - h0) <= 1e-4);
}

TEST_CASE("leapfrog rejects bad inputs and non-finite gradients", "[hmc]") {
    CHECK_THROWS_AS(leapfrog(scalar_vec(0.0), scalar_vec(1.0), std_normal_grad, 0.0, 1),
                    std::invalid_argument);
    auto bad_grad = [](const Eigen::VectorXd& q) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(q.size(), std::nan(""));
    };
    CHECK_THROWS_AS(leapfrog(scalar_vec(0.3), scalar_vec(1.0), bad_grad, 0.1, 1),
                    bkoc::mcmc::SamplerError);
    try {
        leapfrog(scalar_vec(0.3), scalar_vec(1.0), bad_grad, 0.1, 1);
    } catch (const bkoc::mcmc::SamplerError& e) {
        CHECK(e.position()[0] == 0.3);
    }
}

TEST_CASE("hmc is deterministic under a fixed seed", "[hmc]") {
    const auto target = RandomVectorSpec::independent({DistributionSpec::normal(0.0, 0.1)});
    HmcConfig cfg;
    cfg.n_samples = 2000;
    cfg.burn_in = 200;
    cfg.seed = 42;
    const SampleSet a = bkoc::mcmc::sample(target, cfg);
    const SampleSet b = bkoc::mcmc::sample(target, cfg);
    REQUIRE(a.draws == b.draws);
    CHECK(a.acceptance_rate == b.acceptance_rate);
}

TEST_CASE("hmc recovers gaussian moments at N = 50000", "[hmc][stat]") {
    const auto target = RandomVectorSpec::independent({DistributionSpec::normal(0.0, 0.1)});
    HmcConfig cfg;
    cfg.seed = 2024;
    const SampleSet s = bkoc::mcmc::sample(target, cfg);
    REQUIRE(s.size() == 50000);
    REQUIRE(s.draws.allFinite());

    const double n_eff = bkoc::mcmc::effective_sample_size(s.draws.col(0));
    const double mean = s.draws.col(0).mean();
    CHECK(std::abs(mean) <= 3.0 * 0.1 / std::sqrt(n_eff));

    const double var = (s.draws.col(0).array() - mean).square().sum() / (s.size() - 1);
    CHECK(var == Catch::Approx(0.01).epsilon(0.05));

    CHECK(s.acceptance_rate >= 0.6);
    CHECK_FALSE(s.low_acceptance_warning);
    CHECK(s.split_half.passed);
}

TEST_CASE("hmc matches the quadrature CDF of the bimodal target", "[hmc][stat]") {
    const auto bimodal = make_bimodal();
    const auto target = RandomVectorSpec::independent({bimodal});
    HmcConfig cfg;
    cfg.seed = 31;
    const SampleSet s = bkoc::mcmc::sample(target, cfg);

    // Oracle: cumulative trapezoid of the printed density, normalized.
    const double lo = -0.9, hi = 0.75;
    const int grid_n = 16501;
    std::vector<double> xs(grid_n), cdf(grid_n);
    const double dx = (hi - lo) / (grid_n - 1);
    double acc = 0.0;
    double prev = std::exp(bimodal.log_density(lo));
    xs[0] = lo;
    cdf[0] = 0.0;
    for (int i = 1; i < grid_n; ++i) {
        xs[i] = lo + i * dx;
        const double cur = std::exp(bimodal.log_density(xs[i]));
        acc += 0.5 * (prev + cur) * dx;
        cdf[i] = acc;
        prev = cur;
    }
    for (double& c : cdf) c /= acc;
    auto cdf_at = [&](double x) {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        const double pos = (x - lo) / dx;
        const int i = std::min(grid_n - 2, static_cast<int>(pos));
        return cdf[i] + (pos - i) * (cdf[i + 1] - cdf[i]);
    };

    std::vector<double> sorted(s.draws.col(0).data(), s.draws.col(0).data() + s.size());
    std::sort(sorted.begin(), sorted.end());
    double ks = 0.0;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double F = cdf_at(sorted[i]);
        ks = std::max(ks, std::max((i + 1) / n - F, F - i / n));
    }
    CHECK(ks <= 0.01);
}

TEST_CASE("acceptance rate lands in the tuned window on both targets", "[hmc][stat]") {
    // Step sizes around 1.5 standard deviations put acceptance in [0.6, 0.95].
    struct Case {
        RandomVectorSpec target;
        double step;
    };
    const Case cases[] = {
        {RandomVectorSpec::independent({DistributionSpec::normal(0.0, 0.1)}), 0.15},
        {RandomVectorSpec::independent({make_bimodal()}), 0.08},
    };
    for (const auto& c : cases) {
        HmcConfig cfg;
        cfg.n_samples = 20000;
        cfg.burn_in = 500;
        cfg.seed = 5;
        cfg.step_size = c.step;
        const SampleSet s = bkoc::mcmc::sample(c.target, cfg);
        CHECK(s.acceptance_rate >= 0.6);
        CHECK(s.acceptance_rate <= 0.95);
    }
}

TEST_CASE("low acceptance is surfaced as a warning", "[hmc]") {
    const auto target = RandomVectorSpec::independent({DistributionSpec::normal(0.0, 0.1)});
    HmcConfig cfg;
    cfg.n_samples = 500;
    cfg.burn_in = 50;
    cfg.seed = 1;
    cfg.step_size = 5.0;  // wildly overstepped: nearly everything rejected
    const SampleSet s = bkoc::mcmc::sample(target, cfg);
    CHECK(s.acceptance_rate < 0.1);
    CHECK(s.low_acceptance_warning);
}

TEST_CASE("sample set csv round-trips exactly", "[hmc]") {
    const auto target = RandomVectorSpec::independent(
        {DistributionSpec::normal(0.0, 0.1), make_bimodal()});
    HmcConfig cfg;
    cfg.n_samples = 300;
    cfg.burn_in = 100;
    cfg.seed = 9;
    const SampleSet s = bkoc::mcmc::sample(target, cfg);
    const std::string path = "hmc_roundtrip_test.csv";
    bkoc::mcmc::save_csv(s, path);
    const SampleSet loaded = bkoc::mcmc::load_csv(path);
    REQUIRE(loaded.draws == s.draws);
    std::remove(path.c_str());
}
