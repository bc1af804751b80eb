#include "savwave/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace savwave {

double Drift::operator()(double u) const {
    switch (kind) {
        case DriftKind::zero: return 0.0;
        case DriftKind::linear: return u;
        case DriftKind::sine: return std::sin(u);
        case DriftKind::cubic: return u * u * u + u;
    }
    return 0.0;
}

double Drift::antiderivative(double u) const {
    switch (kind) {
        case DriftKind::zero: return 0.0;
        case DriftKind::linear: return 0.5 * u * u;
        case DriftKind::sine: {
            // 1 - cos u without cancellation near zero
            const double h = std::sin(0.5 * u);
            return 2.0 * h * h;
        }
        case DriftKind::cubic: {
            const double u2 = u * u;
            return 0.25 * u2 * u2 + 0.5 * u2;
        }
    }
    return 0.0;
}

std::string_view Drift::name() const {
    switch (kind) {
        case DriftKind::zero: return "zero";
        case DriftKind::linear: return "linear";
        case DriftKind::sine: return "sine";
        case DriftKind::cubic: return "cubic";
    }
    return "?";
}

Drift Drift::from_name(std::string_view name) {
    if (name == "zero") return {DriftKind::zero};
    if (name == "linear") return {DriftKind::linear};
    if (name == "sine") return {DriftKind::sine};
    if (name == "cubic") return {DriftKind::cubic};
    throw std::invalid_argument("unknown drift '" + std::string(name) + "' (expected linear|sine|cubic|zero)");
}

double Diffusion::operator()(double u, double ux) const {
    switch (kind) {
        case DiffusionKind::constant: return sigma;
        case DiffusionKind::sine: return sigma * std::sin(u);
        case DiffusionKind::linear: return sigma * u;
        case DiffusionKind::custom: return custom(u, ux);
    }
    return 0.0;
}

std::string_view Diffusion::name() const {
    switch (kind) {
        case DiffusionKind::constant: return "constant";
        case DiffusionKind::sine: return "sine";
        case DiffusionKind::linear: return "linear";
        case DiffusionKind::custom: return "custom";
    }
    return "?";
}

Diffusion Diffusion::from_name(std::string_view name, double sigma) {
    Diffusion d;
    d.sigma = sigma;
    if (name == "constant") {
        d.kind = DiffusionKind::constant;
    } else if (name == "sine") {
        d.kind = DiffusionKind::sine;
    } else if (name == "linear") {
        d.kind = DiffusionKind::linear;
    } else if (name == "zero") {
        d.kind = DiffusionKind::constant;
        d.sigma = 0.0;
    } else {
        throw std::invalid_argument("unknown diffusion '" + std::string(name) +
                                    "' (expected constant|sine|linear|zero)");
    }
    return d;
}

Problem Problem::standard(std::size_t modes, Drift drift, Diffusion diffusion, double decay, double delta0,
                          double amplitude) {
    Problem p;
    p.drift = drift;
    p.diffusion = std::move(diffusion);
    p.delta0 = delta0;
    // sin(pi x) = e_1(x) / sqrt(2)
    p.u0 = SpectralField::eigenmode(modes, 1, amplitude / std::numbers::sqrt2);
    p.v0 = SpectralField(modes);
    p.noise = CovarianceSpec::power_law(modes, decay);
    return p;
}

NodalGrid::NodalGrid(std::size_t modes, std::size_t intervals)
    : transform_(modes, intervals == 0 ? 2 * modes : intervals),
      quadrature_(intervals == 0 ? 2 * modes : intervals) {
    if (transform_.intervals() < modes) {
        throw std::invalid_argument("NodalGrid: grid intervals must be at least the mode count");
    }
}

double checked_sav_root(double potential, double delta0) {
    const double radicand = potential + delta0;
    if (!(radicand >= kRadicandFloor)) {
        std::ostringstream msg;
        msg << "F(u) + delta0 = " << radicand << " fell below the floor " << kRadicandFloor;
        throw ModelViolation(msg.str());
    }
    return std::sqrt(radicand);
}

namespace {

double potential_from_nodal(const Eigen::VectorXd& nodal, const Drift& drift, const QuadratureGrid& quad) {
    const auto& w = quad.weights();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < nodal.size(); ++j) {
        sum += w(j) * drift.antiderivative(nodal(j));
    }
    return sum;
}

ModalDrift drift_from_coeffs(const Eigen::VectorXd& u_hat, const Problem& problem, const NodalGrid& grid) {
    ModalDrift out;
    if (problem.drift.kind == DriftKind::zero) {
        out.b = Eigen::VectorXd::Zero(u_hat.size());
        out.s = checked_sav_root(0.0, problem.delta0);
        return out;
    }
    Eigen::VectorXd nodal = grid.transform().to_nodal(u_hat);
    out.s = checked_sav_root(potential_from_nodal(nodal, problem.drift, grid.quadrature()), problem.delta0);
    const double inv_s = 1.0 / out.s;
    for (Eigen::Index j = 0; j < nodal.size(); ++j) {
        nodal(j) = problem.drift(nodal(j)) * inv_s;
    }
    out.b = grid.transform().project_interior(nodal);
    return out;
}

Eigen::VectorXd noise_from_coeffs(const Eigen::VectorXd& u, const Eigen::VectorXd& dW, const Problem& problem,
                                  const NodalGrid& grid) {
    const Diffusion& g = problem.diffusion;
    if (g.is_zero()) {
        return Eigen::VectorXd::Zero(u.size());
    }
    if (g.is_constant()) {
        return g.sigma * dW;
    }
    const Eigen::VectorXd u_nodal = grid.transform().to_nodal(u);
    Eigen::VectorXd prod = grid.transform().to_nodal(dW);
    if (g.uses_gradient()) {
        const Eigen::VectorXd ux = grid.transform().derivative_to_nodal(u);
        for (Eigen::Index j = 0; j < prod.size(); ++j) {
            prod(j) *= g(u_nodal(j), ux(j));
        }
    } else {
        for (Eigen::Index j = 0; j < prod.size(); ++j) {
            prod(j) *= g(u_nodal(j), 0.0);
        }
    }
    return grid.transform().project_interior(prod);
}

void require_grid(const SpectralField& u, const NodalGrid& grid) {
    if (u.modes() != grid.modes()) {
        throw ModeMismatch("field has " + std::to_string(u.modes()) + " modes, grid expects " +
                           std::to_string(grid.modes()));
    }
}

}  // namespace

double eval_F(const SpectralField& u, const Problem& problem, const NodalGrid& grid) {
    require_grid(u, grid);
    return potential_from_nodal(grid.transform().to_nodal(u.coeffs()), problem.drift, grid.quadrature());
}

double sav_value(const SpectralField& u, const Problem& problem, const NodalGrid& grid) {
    return checked_sav_root(eval_F(u, problem, grid), problem.delta0);
}

DriftDirection drift_direction(const SpectralField& u_hat, const Problem& problem, const NodalGrid& grid) {
    require_grid(u_hat, grid);
    ModalDrift d = drift_from_coeffs(u_hat.coeffs(), problem, grid);
    return {SpectralField(std::move(d.b)), d.s};
}

SpectralField apply_g(const SpectralField& u, const NoiseIncrement& dW, const Problem& problem,
                      const NodalGrid& grid) {
    require_grid(u, grid);
    require_same_modes(u, dW.dW, "apply_g");
    return SpectralField(noise_from_coeffs(u.coeffs(), dW.dW.coeffs(), problem, grid));
}

SpectralDiscretization::SpectralDiscretization(Problem problem, std::size_t intervals)
    : problem_(std::move(problem)),
      grid_(problem_.u0.modes(), intervals),
      lambda_(savwave::eigenvalues(problem_.u0.modes())) {
    require_same_modes(problem_.u0, problem_.v0, "SpectralDiscretization initial data");
    if (problem_.noise.modes() != problem_.u0.modes()) {
        throw ModeMismatch("SpectralDiscretization: noise modes must equal the spatial truncation");
    }
    intensity_ = noise_intensity(problem_.noise, grid_.quadrature());
}

double SpectralDiscretization::potential(const Eigen::VectorXd& u) const {
    if (problem_.drift.kind == DriftKind::zero) {
        return 0.0;
    }
    return potential_from_nodal(grid_.transform().to_nodal(u), problem_.drift, grid_.quadrature());
}

ModalDrift SpectralDiscretization::drift_direction(const Eigen::VectorXd& u_hat) const {
    return drift_from_coeffs(u_hat, problem_, grid_);
}

Eigen::VectorXd SpectralDiscretization::noise_term(const Eigen::VectorXd& u, const Eigen::VectorXd& dW) const {
    return noise_from_coeffs(u, dW, problem_, grid_);
}

double SpectralDiscretization::noise_trace(const Eigen::VectorXd& u) const {
    const Diffusion& g = problem_.diffusion;
    if (g.is_zero()) {
        return 0.0;
    }
    if (g.is_constant()) {
        return g.sigma * g.sigma * trace(problem_.noise);
    }
    const Eigen::VectorXd u_nodal = grid_.transform().to_nodal(u);
    Eigen::VectorXd ux;
    if (g.uses_gradient()) {
        ux = grid_.transform().derivative_to_nodal(u);
    }
    const auto& w = grid_.quadrature().weights();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < u_nodal.size(); ++j) {
        const double gj = g(u_nodal(j), g.uses_gradient() ? ux(j) : 0.0);
        sum += w(j) * intensity_(j) * gj * gj;
    }
    return sum;
}

Eigen::MatrixXd SpectralDiscretization::sampling_matrix(std::size_t intervals) const {
    const SineTransform t(grid_.modes(), intervals);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(intervals + 1), t.basis().cols());
    m.middleRows(1, t.basis().rows()) = t.basis();
    return m;
}

}  // namespace savwave
