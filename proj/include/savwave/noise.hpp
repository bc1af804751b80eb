#pragma once

#include "savwave/quadrature.hpp"
#include "savwave/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace savwave {

/// Diagonal covariance Q e_k = q_k e_k of a trace-class Q-Wiener process,
/// truncated to K modes.
struct CovarianceSpec {
    Eigen::VectorXd weights;      // q_1..q_K, all > 0
    double decay_exponent = 0.0;  // s in q_k = k^{-s}; 0 when weights are custom

    /// q_k = k^{-s}, k = 1..K.
    static CovarianceSpec power_law(std::size_t modes, double exponent);
    /// Arbitrary positive weights.
    static CovarianceSpec from_weights(Eigen::VectorXd weights);

    std::size_t modes() const { return static_cast<std::size_t>(weights.size()); }

    /// sum_{k>K} k^{-s} for power-law specs (NaN for custom weights or s <= 1).
    double truncated_tail() const;
};

/// Per-realization normal stream. The sequence is a pure function of
/// (master seed, realization index); counter() tracks draws consumed.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t index);

    double normal();

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t index() const { return index_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint64_t counter_ = 0;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// Increment dW = sum_k sqrt(q_k tau) xi_k e_k over one step of length tau.
struct NoiseIncrement {
    SpectralField dW;
    double tau = 0.0;
};

NoiseIncrement sample_increment(const CovarianceSpec& cov, double tau, RngStream& rng);

/// Draws fine increments of one Brownian path and aggregates them into
/// coarse increments with step multiple * tau_fine. A coarse increment is the
/// left-to-right sum of its fine increments, so every level sees the same path.
class CoupledPath {
public:
    CoupledPath(const CovarianceSpec& cov, double tau_fine, std::vector<std::size_t> multiples);

    /// Draws the next fine increment and folds it into every level.
    const Eigen::VectorXd& advance(RngStream& rng);

    std::size_t levels() const { return multiples_.size(); }
    std::size_t multiple(std::size_t level) const { return multiples_[level]; }
    double level_tau(std::size_t level) const;
    double fine_tau() const { return tau_fine_; }

    /// True when the last advance() completed a coarse interval of `level`.
    bool ready(std::size_t level) const { return ready_[level]; }
    const Eigen::VectorXd& increment(std::size_t level) const { return completed_[level]; }

private:
    Eigen::VectorXd scale_;
    double tau_fine_;
    std::vector<std::size_t> multiples_;
    std::vector<std::size_t> filled_;
    std::vector<bool> ready_;
    std::vector<Eigen::VectorXd> accum_;
    std::vector<Eigen::VectorXd> completed_;
    Eigen::VectorXd fine_;
};

/// Materialized coupled increments for `fine_steps` fine steps, one stream per level.
std::vector<std::vector<NoiseIncrement>> coupled_path(const CovarianceSpec& cov, double tau_fine,
                                                      const std::vector<std::size_t>& multiples,
                                                      std::size_t fine_steps, RngStream& rng);

/// sum_k q_k over the retained modes.
double trace(const CovarianceSpec& cov);

/// w(x_j) = sum_k q_k e_k(x_j)^2 on the grid nodes.
Eigen::VectorXd noise_intensity(const CovarianceSpec& cov, const QuadratureGrid& grid);

/// sum_k q_k int_0^1 g(u(x))^2 e_k(x)^2 dx by composite trapezoid on `grid`.
double hs_norm_sq_of_g(std::span<const double> u_nodal, const std::function<double(double)>& g,
                       const CovarianceSpec& cov, const QuadratureGrid& grid);

}  // namespace savwave
