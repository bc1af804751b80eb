#include "savwave/fem.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace savwave {

GaussRule gauss_legendre(std::size_t points) {
    if (points == 0) {
        throw std::invalid_argument("gauss_legendre: need at least one point");
    }
    const auto n = static_cast<Eigen::Index>(points);
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) {
        const double k = static_cast<double>(i);
        jacobi(i, i - 1) = jacobi(i - 1, i) = k / std::sqrt(4.0 * k * k - 1.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    GaussRule rule;
    rule.nodes = solver.eigenvalues();
    rule.weights = 2.0 * solver.eigenvectors().row(0).transpose().array().square();
    return rule;
}

ElementQuadrature element_quadrature(std::size_t elements, std::size_t points_per_element) {
    const GaussRule rule = gauss_legendre(points_per_element);
    const double h = 1.0 / static_cast<double>(elements);
    const auto total = static_cast<Eigen::Index>(elements * points_per_element);
    ElementQuadrature q;
    q.x.resize(total);
    q.w.resize(total);
    q.left.resize(total);
    q.right.resize(total);
    q.element.resize(static_cast<std::size_t>(total));
    Eigen::Index idx = 0;
    for (std::size_t e = 0; e < elements; ++e) {
        const double x0 = static_cast<double>(e) * h;
        for (Eigen::Index p = 0; p < rule.nodes.size(); ++p, ++idx) {
            const double t = 0.5 * (rule.nodes(p) + 1.0);  // local coordinate in [0,1]
            q.x(idx) = x0 + t * h;
            q.w(idx) = 0.5 * h * rule.weights(p);
            q.left(idx) = 1.0 - t;
            q.right(idx) = t;
            q.element[static_cast<std::size_t>(idx)] = e;
        }
    }
    return q;
}

FemSystem::FemSystem(std::size_t elements) : elements_(elements) {
    if (elements < 2) {
        throw std::invalid_argument("FemSystem: need at least 2 elements, got " + std::to_string(elements));
    }
    h_ = 1.0 / static_cast<double>(elements);
    const auto d = static_cast<Eigen::Index>(dimension());
    mass_ = Eigen::MatrixXd::Zero(d, d);
    stiffness_ = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        mass_(i, i) = 4.0 * h_ / 6.0;
        stiffness_(i, i) = 2.0 / h_;
        if (i + 1 < d) {
            mass_(i, i + 1) = mass_(i + 1, i) = h_ / 6.0;
            stiffness_(i, i + 1) = stiffness_(i + 1, i) = -1.0 / h_;
        }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(stiffness_, mass_);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("FemSystem: generalized eigensolver failed");
    }
    mu_ = solver.eigenvalues();
    phi_ = solver.eigenvectors();
    mass_llt_.compute(mass_);
    stiffness_llt_.compute(stiffness_);
}

double FemSystem::closed_form_eigenvalue(std::size_t k, double h) {
    const double c = std::cos(static_cast<double>(k) * std::numbers::pi * h);
    return 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
}

Eigen::VectorXd FemSystem::to_modal(const Eigen::VectorXd& nodal) const {
    return phi_.transpose() * (mass_ * nodal);
}

Eigen::VectorXd FemSystem::to_nodal(const Eigen::VectorXd& modal) const {
    return phi_ * modal;
}

Eigen::VectorXd FemSystem::load_to_modal(const Eigen::VectorXd& load) const {
    return phi_.transpose() * load;
}

double FemSystem::mass_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return x.dot(mass_ * y);
}

Eigen::VectorXd FemSystem::load(const std::function<double(double)>& v, std::size_t points) const {
    const ElementQuadrature q = element_quadrature(elements_, points);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension()));
    for (Eigen::Index i = 0; i < q.x.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(q.element[static_cast<std::size_t>(i)]);
        const double val = q.w(i) * v(q.x(i));
        if (e >= 1) out(e - 1) += val * q.left(i);
        if (e < out.size()) out(e) += val * q.right(i);
    }
    return out;
}

Eigen::VectorXd FemSystem::gradient_load(const std::function<double(double)>& dv, std::size_t points) const {
    const ElementQuadrature q = element_quadrature(elements_, points);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension()));
    for (Eigen::Index i = 0; i < q.x.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(q.element[static_cast<std::size_t>(i)]);
        const double val = q.w(i) * dv(q.x(i)) / h_;
        if (e >= 1) out(e - 1) -= val;
        if (e < out.size()) out(e) += val;
    }
    return out;
}

Eigen::VectorXd FemSystem::solve_mass(const Eigen::VectorXd& rhs) const {
    return mass_llt_.solve(rhs);
}

Eigen::VectorXd FemSystem::solve_stiffness(const Eigen::VectorXd& rhs) const {
    return stiffness_llt_.solve(rhs);
}

FemSystem assemble(std::size_t elements) {
    return FemSystem(elements);
}

namespace {

std::function<double(double)> sine_series(const SpectralField& f) {
    return [c = f.coeffs()](double x) {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < c.size(); ++k) {
            sum += c(k) * std::sin(static_cast<double>(k + 1) * std::numbers::pi * x);
        }
        return std::numbers::sqrt2 * sum;
    };
}

std::function<double(double)> sine_series_derivative(const SpectralField& f) {
    return [c = f.coeffs()](double x) {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < c.size(); ++k) {
            const double w = static_cast<double>(k + 1) * std::numbers::pi;
            sum += c(k) * w * std::cos(w * x);
        }
        return std::numbers::sqrt2 * sum;
    };
}

}  // namespace

Eigen::VectorXd l2_project(const FemSystem& system, const std::function<double(double)>& v, std::size_t points) {
    return system.solve_mass(system.load(v, points));
}

Eigen::VectorXd l2_project(const FemSystem& system, const SpectralField& v, std::size_t points) {
    return l2_project(system, sine_series(v), points);
}

Eigen::VectorXd ritz_project(const FemSystem& system, const std::function<double(double)>& du,
                             std::size_t points) {
    return system.solve_stiffness(system.gradient_load(du, points));
}

Eigen::VectorXd ritz_project(const FemSystem& system, const SpectralField& u, std::size_t points) {
    return ritz_project(system, sine_series_derivative(u), points);
}

Eigen::VectorXd interpolate(const FemSystem& system, const std::function<double(double)>& u) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(system.dimension()));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out(i) = u(system.node(static_cast<std::size_t>(i + 1)));
    }
    return out;
}

WaveGroupTable fem_group_tables(const FemSystem& system, double tau) {
    return WaveGroupTable(system.eigenvalues(), tau);
}

Eigen::VectorXd fem_cosine(const FemSystem& system, const WaveGroupTable& table, const Eigen::VectorXd& x) {
    return system.to_nodal(table.cosine(system.to_modal(x)));
}

Eigen::VectorXd fem_sine(const FemSystem& system, const WaveGroupTable& table, const Eigen::VectorXd& x) {
    return system.to_nodal(table.sine(system.to_modal(x)));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> fem_group_step(const FemSystem& system, const WaveGroupTable& table,
                                                           const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    Eigen::VectorXd cu = system.to_modal(u);
    Eigen::VectorXd cv = system.to_modal(v);
    table.apply(cu, cv);
    return {system.to_nodal(cu), system.to_nodal(cv)};
}

namespace {

std::size_t points_for_noise(std::size_t noise_modes, std::size_t elements) {
    // Resolve the highest sine mode inside each element.
    const double per_element = static_cast<double>(noise_modes) / static_cast<double>(elements);
    return static_cast<std::size_t>(std::ceil(0.8 * per_element)) + 11;
}

}  // namespace

FemDiscretization::FemDiscretization(Problem problem, std::size_t elements)
    : problem_(std::move(problem)),
      system_(elements),
      quad_(element_quadrature(elements, points_for_noise(problem_.noise.modes(), elements))) {
    require_same_modes(problem_.u0, problem_.v0, "FemDiscretization initial data");
    const auto K = static_cast<Eigen::Index>(problem_.noise.modes());
    const auto Q = quad_.x.size();
    sine_at_quad_.resize(Q, K);
    for (Eigen::Index i = 0; i < Q; ++i) {
        for (Eigen::Index k = 0; k < K; ++k) {
            sine_at_quad_(i, k) =
                std::numbers::sqrt2 * std::sin(static_cast<double>(k + 1) * std::numbers::pi * quad_.x(i));
        }
    }
    // Modal P_h e_k, reused for constant g and for the trace.
    const auto d = static_cast<Eigen::Index>(system_.dimension());
    Eigen::MatrixXd loads = Eigen::MatrixXd::Zero(d, K);
    for (Eigen::Index i = 0; i < Q; ++i) {
        const auto e = static_cast<Eigen::Index>(quad_.element[static_cast<std::size_t>(i)]);
        if (e >= 1) loads.row(e - 1) += (quad_.w(i) * quad_.left(i)) * sine_at_quad_.row(i);
        if (e < d) loads.row(e) += (quad_.w(i) * quad_.right(i)) * sine_at_quad_.row(i);
    }
    constant_map_ = system_.eigenvectors().transpose() * loads;
    constant_trace_ = constant_map_.colwise().squaredNorm().dot(problem_.noise.weights);

    // u^{h,0} = R_h u0 and v^{h,0} = P_h v0, stored in modal coordinates.
    u0_ = system_.to_modal(ritz_project(system_, problem_.u0));
    v0_ = system_.to_modal(l2_project(system_, problem_.v0));
}

double FemDiscretization::potential(const Eigen::VectorXd& u) const {
    if (problem_.drift.kind == DriftKind::zero) {
        return 0.0;
    }
    const Eigen::VectorXd nodal = system_.to_nodal(u);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < nodal.size(); ++i) {
        sum += problem_.drift.antiderivative(nodal(i));
    }
    return system_.h() * sum;
}

ModalDrift FemDiscretization::drift_direction(const Eigen::VectorXd& u_hat) const {
    ModalDrift out;
    if (problem_.drift.kind == DriftKind::zero) {
        out.b = Eigen::VectorXd::Zero(u_hat.size());
        out.s = checked_sav_root(0.0, problem_.delta0);
        return out;
    }
    Eigen::VectorXd nodal = system_.to_nodal(u_hat);
    double F = 0.0;
    for (Eigen::Index i = 0; i < nodal.size(); ++i) {
        F += problem_.drift.antiderivative(nodal(i));
    }
    out.s = checked_sav_root(system_.h() * F, problem_.delta0);
    const double inv_s = 1.0 / out.s;
    for (Eigen::Index i = 0; i < nodal.size(); ++i) {
        nodal(i) = problem_.drift(nodal(i)) * inv_s;
    }
    out.b = system_.to_modal(nodal);
    return out;
}

Eigen::VectorXd FemDiscretization::weighted_g(const Eigen::VectorXd& u_modal) const {
    const Eigen::VectorXd nodal = system_.to_nodal(u_modal);
    const auto d = nodal.size();
    const Diffusion& g = problem_.diffusion;
    const double inv_h = 1.0 / system_.h();
    Eigen::VectorXd out(quad_.x.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(quad_.element[static_cast<std::size_t>(i)]);
        const double ul = e >= 1 ? nodal(e - 1) : 0.0;
        const double ur = e < d ? nodal(e) : 0.0;
        const double u = quad_.left(i) * ul + quad_.right(i) * ur;
        out(i) = quad_.w(i) * g(u, (ur - ul) * inv_h);
    }
    return out;
}

Eigen::VectorXd FemDiscretization::quad_to_modal(const Eigen::VectorXd& c) const {
    const auto d = static_cast<Eigen::Index>(system_.dimension());
    Eigen::VectorXd load = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(quad_.element[static_cast<std::size_t>(i)]);
        if (e >= 1) load(e - 1) += c(i) * quad_.left(i);
        if (e < d) load(e) += c(i) * quad_.right(i);
    }
    return system_.load_to_modal(load);
}

Eigen::VectorXd FemDiscretization::noise_term(const Eigen::VectorXd& u, const Eigen::VectorXd& dW) const {
    const Diffusion& g = problem_.diffusion;
    if (g.is_zero()) {
        return Eigen::VectorXd::Zero(u.size());
    }
    if (g.is_constant()) {
        return g.sigma * (constant_map_ * dW);
    }
    const Eigen::VectorXd noise = sine_at_quad_ * dW;
    return quad_to_modal(weighted_g(u).cwiseProduct(noise));
}

double FemDiscretization::noise_trace(const Eigen::VectorXd& u) const {
    const Diffusion& g = problem_.diffusion;
    if (g.is_zero()) {
        return 0.0;
    }
    if (g.is_constant()) {
        return g.sigma * g.sigma * constant_trace_;
    }
    const Eigen::VectorXd wg = weighted_g(u);
    const auto d = static_cast<Eigen::Index>(system_.dimension());
    Eigen::MatrixXd loads = Eigen::MatrixXd::Zero(d, sine_at_quad_.cols());
    for (Eigen::Index i = 0; i < wg.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(quad_.element[static_cast<std::size_t>(i)]);
        if (e >= 1) loads.row(e - 1) += (wg(i) * quad_.left(i)) * sine_at_quad_.row(i);
        if (e < d) loads.row(e) += (wg(i) * quad_.right(i)) * sine_at_quad_.row(i);
    }
    const Eigen::MatrixXd modal = system_.eigenvectors().transpose() * loads;
    return modal.colwise().squaredNorm().dot(problem_.noise.weights);
}

Eigen::MatrixXd FemDiscretization::sampling_matrix(std::size_t intervals) const {
    const auto d = static_cast<Eigen::Index>(system_.dimension());
    Eigen::MatrixXd hats = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(intervals + 1), d);
    const double Me = static_cast<double>(system_.elements());
    for (std::size_t j = 0; j <= intervals; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(intervals);
        const double s = x * Me;
        auto e = static_cast<Eigen::Index>(std::floor(s));
        if (e >= static_cast<Eigen::Index>(system_.elements())) {
            e = static_cast<Eigen::Index>(system_.elements()) - 1;
        }
        const double t = s - static_cast<double>(e);
        const auto row = static_cast<Eigen::Index>(j);
        if (e >= 1) hats(row, e - 1) += 1.0 - t;
        if (e < d) hats(row, e) += t;
    }
    return hats * system_.eigenvectors();
}

StepOutcome step_fem_sav(const FemDiscretization& disc, const SchemeTables& tables, const SavState& state,
                         const Eigen::VectorXd& dW, Scheme scheme, Predictor predictor, SchemeOptions options) {
    if (scheme == Scheme::exponential) {
        return step_exponential_sav(disc, tables, state, dW, predictor);
    }
    return step_midpoint_sav(disc, tables, state, dW, predictor, options);
}

}  // namespace savwave
