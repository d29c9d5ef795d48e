#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bkoc/util/quadrature.hpp"

namespace bkoc::prob {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

/// One Gaussian-shaped term of a mixture density,
///   weight / (stddev * sqrt(2*pi)) * exp(-(x - mean)^2 / exp_denom).
/// exp_denom defaults to 2*stddev^2 (an ordinary Gaussian); it may be set
/// explicitly for densities whose printed exponent uses another denominator,
/// in which case the mixture is unnormalized and callers requiring a true PDF
/// must normalize numerically.
struct MixtureComponent {
    double weight;
    double mean;
    double stddev;
    double exp_denom;

    MixtureComponent(double w, double mu, double sigma)
        : MixtureComponent(w, mu, sigma, 2.0 * sigma * sigma) {}
    MixtureComponent(double w, double mu, double sigma, double denom)
        : weight(w), mean(mu), stddev(sigma), exp_denom(denom) {
        if (!(sigma > 0.0)) throw std::invalid_argument("MixtureComponent: stddev must be > 0");
        if (!(w > 0.0)) throw std::invalid_argument("MixtureComponent: weight must be > 0");
        if (!(denom > 0.0)) throw std::invalid_argument("MixtureComponent: exp_denom must be > 0");
    }

    /// Width of the bump as a Gaussian standard deviation, sqrt(exp_denom/2).
    double effective_scale() const { return std::sqrt(0.5 * exp_denom); }
};

/// Scalar distribution described through its (possibly unnormalized)
/// log-density and gradient.
class DistributionSpec {
  public:
    enum class Kind { Normal, BimodalGaussianMixture, CustomLogDensity };

    static DistributionSpec normal(double mean, double stddev) {
        if (!(stddev > 0.0)) throw std::invalid_argument("normal: stddev must be > 0");
        DistributionSpec d;
        d.kind_ = Kind::Normal;
        d.components_ = {MixtureComponent(1.0, mean, stddev)};
        return d;
    }

    static DistributionSpec bimodal(MixtureComponent a, MixtureComponent b) {
        DistributionSpec d;
        d.kind_ = Kind::BimodalGaussianMixture;
        d.components_ = {std::move(a), std::move(b)};
        return d;
    }

    /// Opaque log-density (up to a constant) with analytic gradient.
    /// length_scale drives default sampler tuning.
    static DistributionSpec custom(std::function<double(double)> log_density,
                                   std::function<double(double)> grad_log_density,
                                   double length_scale = 1.0, std::string label = "custom") {
        if (!log_density || !grad_log_density)
            throw std::invalid_argument("custom: callables must be set");
        DistributionSpec d;
        d.kind_ = Kind::CustomLogDensity;
        d.custom_log_ = std::move(log_density);
        d.custom_grad_ = std::move(grad_log_density);
        d.custom_scale_ = length_scale;
        d.custom_label_ = std::move(label);
        return d;
    }

    Kind kind() const { return kind_; }
    const std::vector<MixtureComponent>& components() const { return components_; }

    /// log f(x) up to an additive constant.
    double log_density(double x) const {
        switch (kind_) {
            case Kind::Normal: {
                const MixtureComponent& c = components_[0];
                const double z = (x - c.mean) / c.stddev;
                return -kLogSqrt2Pi - std::log(c.stddev) - 0.5 * z * z;
            }
            case Kind::BimodalGaussianMixture:
                return mixture_log_density(x).first;
            case Kind::CustomLogDensity:
                return custom_log_(x);
        }
        return 0.0;
    }

    double grad_log_density(double x) const {
        switch (kind_) {
            case Kind::Normal: {
                const MixtureComponent& c = components_[0];
                return -(x - c.mean) / (c.stddev * c.stddev);
            }
            case Kind::BimodalGaussianMixture:
                return mixture_log_density(x).second;
            case Kind::CustomLogDensity:
                return custom_grad_(x);
        }
        return 0.0;
    }

    /// Smallest bump width; the sampler scales its step size with this.
    double length_scale() const {
        if (kind_ == Kind::CustomLogDensity) return custom_scale_;
        double s = std::numeric_limits<double>::infinity();
        for (const auto& c : components_) s = std::min(s, c.effective_scale());
        return s;
    }

    /// A representative point (dominant-component mean) for sampler starts.
    double typical_point() const {
        if (kind_ == Kind::CustomLogDensity) return 0.0;
        return components_[0].mean;
    }

    /// Interval outside which the density is negligible. Custom densities get
    /// a wide default around zero scaled by length_scale.
    std::pair<double, double> support_hint() const {
        if (kind_ == Kind::CustomLogDensity)
            return {-40.0 * custom_scale_, 40.0 * custom_scale_};
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& c : components_) {
            lo = std::min(lo, c.mean - 15.0 * c.effective_scale());
            hi = std::max(hi, c.mean + 15.0 * c.effective_scale());
        }
        return {lo, hi};
    }

    /// Numeric normalization constant of exp(log_density) by quadrature.
    double normalization_constant() const {
        const auto [lo, hi] = support_hint();
        return util::integrate([this](double x) { return std::exp(log_density(x)); }, lo, hi,
                               1e-13);
    }

    std::string describe() const {
        std::ostringstream os;
        switch (kind_) {
            case Kind::Normal:
                os << "normal(mean=" << components_[0].mean << ",stddev=" << components_[0].stddev
                   << ")";
                break;
            case Kind::BimodalGaussianMixture:
                os << "bimodal";
                for (const auto& c : components_)
                    os << "(w=" << c.weight << ",mean=" << c.mean << ",stddev=" << c.stddev
                       << ",exp_denom=" << c.exp_denom << ")";
                break;
            case Kind::CustomLogDensity:
                os << custom_label_;
                break;
        }
        return os.str();
    }

  private:
    // Returns {log density, d/dx log density}, evaluated stably via the
    // largest exponent.
    std::pair<double, double> mixture_log_density(double x) const {
        double tmax = -std::numeric_limits<double>::infinity();
        std::array<double, 8> t{}, slope{};
        const std::size_t n = components_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const MixtureComponent& c = components_[i];
            const double dx = x - c.mean;
            t[i] = std::log(c.weight) - kLogSqrt2Pi - std::log(c.stddev) - dx * dx / c.exp_denom;
            slope[i] = -2.0 * dx / c.exp_denom;
            tmax = std::max(tmax, t[i]);
        }
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(t[i] - tmax);
            den += e;
            num += e * slope[i];
        }
        return {tmax + std::log(den), num / den};
    }

    Kind kind_ = Kind::Normal;
    std::vector<MixtureComponent> components_;
    std::function<double(double)> custom_log_;
    std::function<double(double)> custom_grad_;
    double custom_scale_ = 1.0;
    std::string custom_label_;
};

/// The random vector xi: independent scalar components, or one fully custom
/// joint log-density.
class RandomVectorSpec {
  public:
    static RandomVectorSpec independent(std::vector<DistributionSpec> components) {
        if (components.empty())
            throw std::invalid_argument("RandomVectorSpec: need at least one component");
        RandomVectorSpec v;
        v.components_ = std::move(components);
        return v;
    }

    static RandomVectorSpec custom_joint(
        int dim, std::function<double(Eigen::Ref<const Eigen::VectorXd>)> log_density,
        std::function<Eigen::VectorXd(Eigen::Ref<const Eigen::VectorXd>)> grad,
        double length_scale = 1.0, std::string label = "custom-joint") {
        if (dim < 1) throw std::invalid_argument("RandomVectorSpec: dimension must be >= 1");
        if (!log_density || !grad)
            throw std::invalid_argument("RandomVectorSpec: callables must be set");
        RandomVectorSpec v;
        v.joint_dim_ = dim;
        v.joint_log_ = std::move(log_density);
        v.joint_grad_ = std::move(grad);
        v.joint_scale_ = length_scale;
        v.joint_label_ = std::move(label);
        return v;
    }

    bool is_custom_joint() const { return joint_dim_ > 0; }
    int dimension() const {
        return is_custom_joint() ? joint_dim_ : static_cast<int>(components_.size());
    }
    const std::vector<DistributionSpec>& components() const { return components_; }

    double log_density(Eigen::Ref<const Eigen::VectorXd> x) const {
        check_dim(x);
        if (is_custom_joint()) return joint_log_(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i)
            acc += components_[i].log_density(x[static_cast<Eigen::Index>(i)]);
        return acc;
    }

    Eigen::VectorXd grad_log_density(Eigen::Ref<const Eigen::VectorXd> x) const {
        check_dim(x);
        if (is_custom_joint()) return joint_grad_(x);
        Eigen::VectorXd g(dimension());
        for (std::size_t i = 0; i < components_.size(); ++i)
            g[static_cast<Eigen::Index>(i)] =
                components_[i].grad_log_density(x[static_cast<Eigen::Index>(i)]);
        return g;
    }

    Eigen::VectorXd typical_point() const {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(dimension());
        if (!is_custom_joint())
            for (std::size_t i = 0; i < components_.size(); ++i)
                p[static_cast<Eigen::Index>(i)] = components_[i].typical_point();
        return p;
    }

    double min_length_scale() const {
        if (is_custom_joint()) return joint_scale_;
        double s = std::numeric_limits<double>::infinity();
        for (const auto& c : components_) s = std::min(s, c.length_scale());
        return s;
    }

    std::string describe() const {
        if (is_custom_joint()) return joint_label_;
        std::string out;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (i) out += " x ";
            out += components_[i].describe();
        }
        return out;
    }

  private:
    void check_dim(Eigen::Ref<const Eigen::VectorXd> x) const {
        if (x.size() != dimension())
            throw std::invalid_argument("RandomVectorSpec: point has dimension " +
                                        std::to_string(x.size()) + ", expected " +
                                        std::to_string(dimension()));
    }

    std::vector<DistributionSpec> components_;
    int joint_dim_ = 0;
    std::function<double(Eigen::Ref<const Eigen::VectorXd>)> joint_log_;
    std::function<Eigen::VectorXd(Eigen::Ref<const Eigen::VectorXd>)> joint_grad_;
    double joint_scale_ = 1.0;
    std::string joint_label_;
};

}  // namespace bkoc::prob
