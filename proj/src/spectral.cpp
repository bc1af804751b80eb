#include "savwave/spectral.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <string>

namespace savwave {

SpectralField::SpectralField(std::size_t modes)
    : coeffs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(modes))) {}

SpectralField::SpectralField(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {}

SpectralField SpectralField::eigenmode(std::size_t modes, std::size_t k, double amplitude) {
    if (k == 0 || k > modes) {
        throw std::out_of_range("eigenmode index " + std::to_string(k) + " outside 1.." +
                                std::to_string(modes));
    }
    SpectralField f(modes);
    f.coeffs_(static_cast<Eigen::Index>(k - 1)) = amplitude;
    return f;
}

void require_same_modes(const SpectralField& a, const SpectralField& b, const char* what) {
    if (a.modes() != b.modes()) {
        throw ModeMismatch(std::string(what) + ": mode counts differ (" +
                           std::to_string(a.modes()) + " vs " + std::to_string(b.modes()) + ")");
    }
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    require_same_modes(*this, other, "operator+=");
    coeffs_ += other.coeffs_;
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    require_same_modes(*this, other, "operator-=");
    coeffs_ -= other.coeffs_;
    return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
    coeffs_ *= scale;
    return *this;
}

double inner(const SpectralField& a, const SpectralField& b) {
    require_same_modes(a, b, "inner");
    return a.coeffs().dot(b.coeffs());
}

double eigenvalue(std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("eigenvalue: mode index must be >= 1");
    }
    const double w = static_cast<double>(k) * std::numbers::pi;
    return w * w;
}

Eigen::VectorXd eigenvalues(std::size_t modes) {
    Eigen::VectorXd lambda(static_cast<Eigen::Index>(modes));
    for (std::size_t k = 1; k <= modes; ++k) {
        lambda(static_cast<Eigen::Index>(k - 1)) = eigenvalue(k);
    }
    return lambda;
}

SpectralField fractional_laplacian(const SpectralField& f, double power) {
    if (!f.is_finite()) {
        throw std::domain_error("fractional_laplacian: non-finite coefficient");
    }
    SpectralField out = f;
    if (power == 0.0) {
        return out;
    }
    for (std::size_t k = 1; k <= f.modes(); ++k) {
        out.coeffs()(static_cast<Eigen::Index>(k - 1)) *= std::pow(eigenvalue(k), power);
    }
    return out;
}

double sobolev_norm_sq(const SpectralField& f, double r) {
    double sum = 0.0;
    for (std::size_t k = 1; k <= f.modes(); ++k) {
        const double c = f.mode(k);
        sum += (r == 0.0 ? 1.0 : std::pow(eigenvalue(k), r)) * c * c;
    }
    return sum;
}

WaveGroupTable::WaveGroupTable(const Eigen::VectorXd& eigenvalues, double tau)
    : tau_(tau), lambda_(eigenvalues) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw std::invalid_argument("WaveGroupTable: tau must be finite and >= 0");
    }
    const auto n = lambda_.size();
    cos_.resize(n);
    sin_.resize(n);
    sqrt_lambda_.resize(n);
    inv_sqrt_lambda_.resize(n);
    a1_.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double lam = lambda_(k);
        if (!(lam > 0.0)) {
            throw std::invalid_argument("WaveGroupTable: eigenvalues must be positive");
        }
        const double w = std::sqrt(lam);
        const double theta = tau * w;
        cos_(k) = std::cos(theta);
        sin_(k) = std::sin(theta);
        sqrt_lambda_(k) = w;
        inv_sqrt_lambda_(k) = 1.0 / w;
        // 1 - cos(theta) = 2 sin^2(theta/2) avoids cancellation for small theta
        const double half = std::sin(0.5 * theta);
        a1_(k) = 2.0 * half * half / lam;
    }
}

WaveGroupTable WaveGroupTable::spectral(std::size_t modes, double tau) {
    return WaveGroupTable(savwave::eigenvalues(modes), tau);
}

Eigen::VectorXd WaveGroupTable::cosine(const Eigen::VectorXd& x) const {
    return cos_.cwiseProduct(x);
}

Eigen::VectorXd WaveGroupTable::sine_smoothing(const Eigen::VectorXd& x) const {
    return sin_.cwiseProduct(inv_sqrt_lambda_).cwiseProduct(x);
}

Eigen::VectorXd WaveGroupTable::sine(const Eigen::VectorXd& x) const {
    return sin_.cwiseProduct(x);
}

void WaveGroupTable::apply(Eigen::VectorXd& u, Eigen::VectorXd& v) const {
    if (u.size() != lambda_.size() || v.size() != lambda_.size()) {
        throw ModeMismatch("WaveGroupTable::apply: state and table mode counts differ");
    }
    for (Eigen::Index k = 0; k < lambda_.size(); ++k) {
        const double uk = u(k);
        const double vk = v(k);
        u(k) = cos_(k) * uk + sin_(k) * inv_sqrt_lambda_(k) * vk;
        v(k) = -sqrt_lambda_(k) * sin_(k) * uk + cos_(k) * vk;
    }
}

PairState group_step(const PairState& x, const WaveGroupTable& table) {
    require_same_modes(x.u, x.v, "group_step");
    if (x.u.modes() != table.modes()) {
        throw ModeMismatch("group_step: state has " + std::to_string(x.u.modes()) +
                           " modes, table has " + std::to_string(table.modes()));
    }
    PairState out = x;
    table.apply(out.u.coeffs(), out.v.coeffs());
    return out;
}

SineTransform::SineTransform(std::size_t modes, std::size_t intervals)
    : modes_(modes), intervals_(intervals) {
    if (modes == 0) {
        throw std::invalid_argument("SineTransform: need at least one mode");
    }
    if (intervals < 2) {
        throw std::invalid_argument("SineTransform: need at least two grid intervals");
    }
    const auto rows = static_cast<Eigen::Index>(intervals - 1);
    const auto cols = static_cast<Eigen::Index>(modes);
    basis_.resize(rows, cols);
    derivative_basis_.resize(rows + 2, cols);
    const double m = static_cast<double>(intervals);
    for (Eigen::Index k = 0; k < cols; ++k) {
        const double kk = static_cast<double>(k + 1);
        for (Eigen::Index j = 0; j <= rows + 1; ++j) {
            // Reduce the integer phase k*j mod 2M exactly before scaling.
            const auto phase = static_cast<long long>((k + 1) * j) % (2 * static_cast<long long>(intervals));
            const double angle = std::numbers::pi * static_cast<double>(phase) / m;
            if (j >= 1 && j <= rows) {
                basis_(j - 1, k) = std::numbers::sqrt2 * std::sin(angle);
            }
            derivative_basis_(j, k) = std::numbers::sqrt2 * kk * std::numbers::pi * std::cos(angle);
        }
    }
}

Eigen::VectorXd SineTransform::to_nodal(const Eigen::VectorXd& coeffs) const {
    if (static_cast<std::size_t>(coeffs.size()) != modes_) {
        throw ModeMismatch("SineTransform::to_nodal: coefficient count mismatch");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(intervals_ + 1));
    out.segment(1, basis_.rows()).noalias() = basis_ * coeffs;
    return out;
}

Eigen::VectorXd SineTransform::derivative_to_nodal(const Eigen::VectorXd& coeffs) const {
    if (static_cast<std::size_t>(coeffs.size()) != modes_) {
        throw ModeMismatch("SineTransform::derivative_to_nodal: coefficient count mismatch");
    }
    return derivative_basis_ * coeffs;
}

Eigen::VectorXd SineTransform::to_spectral(const Eigen::VectorXd& nodal, double endpoint_tol) const {
    if (static_cast<std::size_t>(nodal.size()) != intervals_ + 1) {
        throw std::invalid_argument("SineTransform::to_spectral: expected M+1 nodal values");
    }
    if (std::abs(nodal(0)) > endpoint_tol || std::abs(nodal(nodal.size() - 1)) > endpoint_tol) {
        throw std::invalid_argument("to_spectral: nonzero boundary values violate the Dirichlet condition");
    }
    return project_interior(nodal);
}

Eigen::VectorXd SineTransform::project_interior(const Eigen::VectorXd& nodal) const {
    if (static_cast<std::size_t>(nodal.size()) != intervals_ + 1) {
        throw std::invalid_argument("SineTransform::project_interior: expected M+1 nodal values");
    }
    Eigen::VectorXd out(basis_.cols());
    out.noalias() = basis_.transpose() * nodal.segment(1, basis_.rows());
    out /= static_cast<double>(intervals_);
    return out;
}

std::vector<double> to_nodal(const SpectralField& f, std::size_t intervals) {
    if (intervals < f.modes()) {
        std::cerr << "warning: to_nodal with M=" << intervals << " < K=" << f.modes()
                  << " aliases the upper modes\n";
    }
    const SineTransform transform(f.modes(), intervals);
    const Eigen::VectorXd values = transform.to_nodal(f.coeffs());
    return {values.data(), values.data() + values.size()};
}

SpectralField to_spectral(std::span<const double> values, std::size_t modes) {
    if (values.size() < 3) {
        throw std::invalid_argument("to_spectral: need at least three nodal values");
    }
    const std::size_t intervals = values.size() - 1;
    if (modes > intervals) {
        throw std::invalid_argument("to_spectral: requested more modes than grid intervals");
    }
    const SineTransform transform(modes, intervals);
    const Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
    return SpectralField(transform.to_spectral(v));
}

}  // namespace savwave
