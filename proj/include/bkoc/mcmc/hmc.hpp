#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "bkoc/io/csv.hpp"
#include "bkoc/mcmc/diagnostics.hpp"
#include "bkoc/prob/distribution.hpp"

namespace bkoc::mcmc {

/// Thrown when the target density or gradient turns non-finite; carries the
/// offending position.
class SamplerError : public std::runtime_error {
  public:
    SamplerError(const std::string& what, Eigen::VectorXd position)
        : std::runtime_error(what + " at position " + format(position)),
          position_(std::move(position)) {}
    const Eigen::VectorXd& position() const { return position_; }

  private:
    static std::string format(const Eigen::VectorXd& p) {
        std::ostringstream os;
        os << "[";
        for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
        os << "]";
        return os.str();
    }
    Eigen::VectorXd position_;
};

struct HmcConfig {
    std::size_t n_samples = 50000;
    double step_size = 0.0;  // <= 0 selects 0.5 * smallest component length scale
    int n_leapfrog = 10;
    std::size_t burn_in = 1000;
    std::uint64_t seed = 0;
    Eigen::VectorXd initial_point;  // empty selects the target's typical point

    void validate() const {
        if (n_samples < 1) throw std::invalid_argument("HmcConfig: n_samples must be >= 1");
        if (n_leapfrog < 1) throw std::invalid_argument("HmcConfig: n_leapfrog must be >= 1");
    }
};

struct SampleSet {
    Eigen::MatrixXd draws;  // n_samples x d, post burn-in
    double acceptance_rate = 0.0;
    std::uint64_t seed = 0;
    std::string target;
    bool low_acceptance_warning = false;
    SplitHalfCheck split_half;

    Eigen::Index size() const { return draws.rows(); }
    Eigen::Index dimension() const { return draws.cols(); }
};

/// One leapfrog trajectory of L steps at step size eps. grad_log_density is
/// the gradient of the target log-density (the negative potential gradient).
/// The map is symplectic: rerunning from (q', -p') recovers (q, -p).
template <typename GradFn>
std::pair<Eigen::VectorXd, Eigen::VectorXd> leapfrog(Eigen::VectorXd q, Eigen::VectorXd p,
                                                     GradFn&& grad_log_density, double eps,
                                                     int n_steps) {
    if (!(eps > 0.0)) throw std::invalid_argument("leapfrog: step size must be > 0");
    if (n_steps < 1) throw std::invalid_argument("leapfrog: need at least one step");

    auto grad_checked = [&](const Eigen::VectorXd& pos) -> Eigen::VectorXd {
        Eigen::VectorXd g = grad_log_density(pos);
        if (!g.allFinite()) throw SamplerError("leapfrog: non-finite gradient", pos);
        return g;
    };

    p += 0.5 * eps * grad_checked(q);
    for (int l = 0; l < n_steps; ++l) {
        q += eps * p;
        if (l + 1 < n_steps) p += eps * grad_checked(q);
    }
    p += 0.5 * eps * grad_checked(q);
    return {std::move(q), std::move(p)};
}

/// Hamiltonian Monte Carlo with Metropolis accept/reject after each
/// trajectory. Deterministic for a fixed seed.
inline SampleSet sample(const prob::RandomVectorSpec& target, const HmcConfig& config) {
    config.validate();
    const int d = target.dimension();

    Eigen::VectorXd q = config.initial_point.size() > 0 ? config.initial_point
                                                        : target.typical_point();
    if (q.size() != d) throw std::invalid_argument("hmc: initial point has wrong dimension");

    double eps = config.step_size;
    if (!(eps > 0.0)) eps = 0.5 * target.min_length_scale();
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::invalid_argument("hmc: no usable step size; set HmcConfig::step_size");

    auto grad = [&](const Eigen::VectorXd& pos) { return target.grad_log_density(pos); };
    auto log_density_checked = [&](const Eigen::VectorXd& pos) {
        const double v = target.log_density(pos);
        if (!std::isfinite(v)) throw SamplerError("hmc: non-finite log density", pos);
        return v;
    };

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> momentum(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SampleSet out;
    out.draws.resize(static_cast<Eigen::Index>(config.n_samples), d);
    out.seed = config.seed;
    out.target = target.describe();

    double log_f = log_density_checked(q);
    std::size_t accepted = 0;
    const std::size_t total = config.burn_in + config.n_samples;
    for (std::size_t iter = 0; iter < total; ++iter) {
        Eigen::VectorXd p(d);
        for (int i = 0; i < d; ++i) p[i] = momentum(rng);
        const double h0 = -log_f + 0.5 * p.squaredNorm();

        auto [q_new, p_new] = leapfrog(q, p, grad, eps, config.n_leapfrog);
        const double log_f_new = log_density_checked(q_new);
        const double h1 = -log_f_new + 0.5 * p_new.squaredNorm();

        const bool accept = unif(rng) < std::exp(h0 - h1);
        if (accept) {
            q = std::move(q_new);
            log_f = log_f_new;
        }
        if (iter >= config.burn_in) {
            if (accept) ++accepted;
            out.draws.row(static_cast<Eigen::Index>(iter - config.burn_in)) = q.transpose();
        }
    }

    out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.n_samples);
    out.low_acceptance_warning = out.acceptance_rate < 0.1;
    out.split_half = split_half_check(out.draws);
    return out;
}

/// CSV export (one row per draw) so sample sets can be replayed.
inline void save_csv(const SampleSet& set, const std::string& path) {
    std::vector<std::string> header;
    for (Eigen::Index j = 0; j < set.dimension(); ++j)
        header.push_back("xi" + std::to_string(j));
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(set.size()));
    for (Eigen::Index i = 0; i < set.size(); ++i) {
        rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(set.dimension()));
        for (Eigen::Index j = 0; j < set.dimension(); ++j)
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = set.draws(i, j);
    }
    io::write_csv(path, header, rows);
}

inline SampleSet load_csv(const std::string& path) {
    const io::CsvTable table = io::read_csv(path);
    SampleSet set;
    const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
    const Eigen::Index d = static_cast<Eigen::Index>(table.header.size());
    set.draws.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            set.draws(i, j) = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    set.target = "loaded:" + path;
    return set;
}

}  // namespace bkoc::mcmc
