#include "savwave/noise.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace savwave {

CovarianceSpec CovarianceSpec::power_law(std::size_t modes, double exponent) {
    if (modes == 0) {
        throw std::invalid_argument("CovarianceSpec: need at least one mode");
    }
    CovarianceSpec spec;
    spec.decay_exponent = exponent;
    spec.weights.resize(static_cast<Eigen::Index>(modes));
    for (std::size_t k = 1; k <= modes; ++k) {
        spec.weights(static_cast<Eigen::Index>(k - 1)) = std::pow(static_cast<double>(k), -exponent);
    }
    return spec;
}

CovarianceSpec CovarianceSpec::from_weights(Eigen::VectorXd weights) {
    if (weights.size() == 0) {
        throw std::invalid_argument("CovarianceSpec: need at least one mode");
    }
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
        if (!(weights(k) > 0.0) || !std::isfinite(weights(k))) {
            throw std::invalid_argument("CovarianceSpec: weights must be positive and finite");
        }
    }
    CovarianceSpec spec;
    spec.weights = std::move(weights);
    return spec;
}

double CovarianceSpec::truncated_tail() const {
    if (decay_exponent <= 1.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::riemann_zeta(decay_exponent) - weights.sum();
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::seed_seq make_seed(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    return std::seed_seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                         static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t index)
    : seed_(master_seed), index_(index) {
    auto seq = make_seed(master_seed, index);
    engine_.seed(seq);
}

double RngStream::normal() {
    ++counter_;
    return normal_(engine_);
}

NoiseIncrement sample_increment(const CovarianceSpec& cov, double tau, RngStream& rng) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("sample_increment: tau must be positive");
    }
    NoiseIncrement inc;
    inc.tau = tau;
    inc.dW = SpectralField(cov.modes());
    auto& c = inc.dW.coeffs();
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        c(k) = std::sqrt(cov.weights(k) * tau) * rng.normal();
    }
    return inc;
}

CoupledPath::CoupledPath(const CovarianceSpec& cov, double tau_fine, std::vector<std::size_t> multiples)
    : tau_fine_(tau_fine), multiples_(std::move(multiples)) {
    if (!(tau_fine > 0.0)) {
        throw std::invalid_argument("CoupledPath: tau must be positive");
    }
    for (const std::size_t m : multiples_) {
        if (m == 0 || !std::has_single_bit(m)) {
            throw std::invalid_argument("CoupledPath: level multiple " + std::to_string(m) +
                                        " is not a power of two");
        }
    }
    scale_ = (cov.weights * tau_fine).cwiseSqrt();
    const auto n = multiples_.size();
    filled_.assign(n, 0);
    ready_.assign(n, false);
    accum_.assign(n, Eigen::VectorXd::Zero(scale_.size()));
    completed_.assign(n, Eigen::VectorXd::Zero(scale_.size()));
    fine_.resize(scale_.size());
}

double CoupledPath::level_tau(std::size_t level) const {
    return static_cast<double>(multiples_[level]) * tau_fine_;
}

const Eigen::VectorXd& CoupledPath::advance(RngStream& rng) {
    for (Eigen::Index k = 0; k < fine_.size(); ++k) {
        fine_(k) = scale_(k) * rng.normal();
    }
    for (std::size_t l = 0; l < multiples_.size(); ++l) {
        if (filled_[l] == 0) {
            accum_[l] = fine_;
        } else {
            accum_[l] += fine_;
        }
        ++filled_[l];
        ready_[l] = filled_[l] == multiples_[l];
        if (ready_[l]) {
            completed_[l].swap(accum_[l]);
            filled_[l] = 0;
        }
    }
    return fine_;
}

std::vector<std::vector<NoiseIncrement>> coupled_path(const CovarianceSpec& cov, double tau_fine,
                                                      const std::vector<std::size_t>& multiples,
                                                      std::size_t fine_steps, RngStream& rng) {
    CoupledPath path(cov, tau_fine, multiples);
    for (const std::size_t m : multiples) {
        if (fine_steps % m != 0) {
            throw std::invalid_argument("coupled_path: fine step count is not a multiple of every level");
        }
    }
    std::vector<std::vector<NoiseIncrement>> out(multiples.size());
    for (std::size_t n = 0; n < fine_steps; ++n) {
        path.advance(rng);
        for (std::size_t l = 0; l < multiples.size(); ++l) {
            if (path.ready(l)) {
                out[l].push_back(NoiseIncrement{SpectralField(path.increment(l)), path.level_tau(l)});
            }
        }
    }
    return out;
}

double trace(const CovarianceSpec& cov) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < cov.weights.size(); ++k) {
        sum += cov.weights(k);
    }
    return sum;
}

Eigen::VectorXd noise_intensity(const CovarianceSpec& cov, const QuadratureGrid& grid) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
        double sum = 0.0;
        for (std::size_t k = 1; k <= cov.modes(); ++k) {
            const auto phase = static_cast<long long>(k * j) % (2 * static_cast<long long>(grid.intervals()));
            const double s = std::sin(std::numbers::pi * static_cast<double>(phase) /
                                      static_cast<double>(grid.intervals()));
            sum += cov.weights(static_cast<Eigen::Index>(k - 1)) * 2.0 * s * s;
        }
        w(static_cast<Eigen::Index>(j)) = sum;
    }
    return w;
}

double hs_norm_sq_of_g(std::span<const double> u_nodal, const std::function<double(double)>& g,
                       const CovarianceSpec& cov, const QuadratureGrid& grid) {
    if (u_nodal.size() != grid.size()) {
        throw std::invalid_argument("hs_norm_sq_of_g: nodal values do not match the quadrature grid");
    }
    const Eigen::VectorXd w = noise_intensity(cov, grid);
    double sum = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double gj = g(u_nodal[j]);
        sum += grid.weights()(static_cast<Eigen::Index>(j)) * w(static_cast<Eigen::Index>(j)) * gj * gj;
    }
    return sum;
}

}  // namespace savwave
