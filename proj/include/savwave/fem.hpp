#pragma once

#include "savwave/discretization.hpp"
#include "savwave/model.hpp"
#include "savwave/schemes.hpp"
#include "savwave/spectral.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace savwave {

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};
GaussRule gauss_legendre(std::size_t points);

/// Composite Gauss rule on a uniform mesh of (0,1): every quadrature point
/// records its element and its two hat-function values.
struct ElementQuadrature {
    Eigen::VectorXd x;
    Eigen::VectorXd w;
    std::vector<std::size_t> element;
    Eigen::VectorXd left;   // value of the hat at the element's left node
    Eigen::VectorXd right;  // value of the hat at the element's right node
};
ElementQuadrature element_quadrature(std::size_t elements, std::size_t points_per_element);

/// P1 finite elements on a uniform mesh of (0,1) with Dirichlet ends.
/// Interior nodes x_i = i h, i = 1..Me-1, are the unknowns.
class FemSystem {
public:
    /// Throws std::invalid_argument for fewer than 2 elements.
    explicit FemSystem(std::size_t elements);

    std::size_t elements() const { return elements_; }
    std::size_t dimension() const { return elements_ - 1; }
    double h() const { return h_; }
    double node(std::size_t i) const { return static_cast<double>(i) * h_; }

    const Eigen::MatrixXd& mass() const { return mass_; }
    const Eigen::MatrixXd& stiffness() const { return stiffness_; }

    /// Generalized eigenpairs stiffness phi = mu mass phi, increasing, phi mass-orthonormal.
    const Eigen::VectorXd& eigenvalues() const { return mu_; }
    const Eigen::MatrixXd& eigenvectors() const { return phi_; }

    /// (6/h^2)(1 - cos(k pi h)) / (2 + cos(k pi h)).
    static double closed_form_eigenvalue(std::size_t k, double h);

    /// Nodal vector -> coordinates in the discrete eigenbasis (phi^T mass x).
    Eigen::VectorXd to_modal(const Eigen::VectorXd& nodal) const;
    Eigen::VectorXd to_nodal(const Eigen::VectorXd& modal) const;
    /// Load vector -> modal coordinates of its L2 projection (phi^T load).
    Eigen::VectorXd load_to_modal(const Eigen::VectorXd& load) const;

    double mass_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    /// load_i = int v phi_i, composite Gauss with `points` per element.
    Eigen::VectorXd load(const std::function<double(double)>& v, std::size_t points = 8) const;
    /// load_i = int v' phi_i' given the derivative v'.
    Eigen::VectorXd gradient_load(const std::function<double(double)>& dv, std::size_t points = 8) const;

    Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const;
    Eigen::VectorXd solve_stiffness(const Eigen::VectorXd& rhs) const;

private:
    std::size_t elements_;
    double h_;
    Eigen::MatrixXd mass_;
    Eigen::MatrixXd stiffness_;
    Eigen::VectorXd mu_;
    Eigen::MatrixXd phi_;
    Eigen::LLT<Eigen::MatrixXd> mass_llt_;
    Eigen::LLT<Eigen::MatrixXd> stiffness_llt_;
};

FemSystem assemble(std::size_t elements);

/// L2 projection P_h v, as interior nodal values.
Eigen::VectorXd l2_project(const FemSystem& system, const std::function<double(double)>& v, std::size_t points = 8);
Eigen::VectorXd l2_project(const FemSystem& system, const SpectralField& v, std::size_t points = 8);

/// Ritz projection R_h u from the derivative u'.
Eigen::VectorXd ritz_project(const FemSystem& system, const std::function<double(double)>& du,
                             std::size_t points = 8);
Eigen::VectorXd ritz_project(const FemSystem& system, const SpectralField& u, std::size_t points = 8);

/// Interior nodal values of u.
Eigen::VectorXd interpolate(const FemSystem& system, const std::function<double(double)>& u);

/// C_h, S_h tables in the discrete eigenbasis.
WaveGroupTable fem_group_tables(const FemSystem& system, double tau);

/// C_h(tau) x for a nodal vector x.
Eigen::VectorXd fem_cosine(const FemSystem& system, const WaveGroupTable& table, const Eigen::VectorXd& x);
/// S_h(tau) x for a nodal vector x.
Eigen::VectorXd fem_sine(const FemSystem& system, const WaveGroupTable& table, const Eigen::VectorXd& x);
/// E_h(tau) applied to nodal (u, v).
std::pair<Eigen::VectorXd, Eigen::VectorXd> fem_group_step(const FemSystem& system, const WaveGroupTable& table,
                                                           const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Finite-element backend. Modal coordinates are the discrete eigenbasis
/// coefficients, so the mass inner product becomes Euclidean. The noise is
/// the sine-mode increment of `problem.noise`, multiplied by g(u_h) and
/// L2-projected with a composite Gauss rule fine enough to resolve every mode.
class FemDiscretization final : public Discretization {
public:
    FemDiscretization(Problem problem, std::size_t elements);

    const FemSystem& system() const { return system_; }
    const Problem& problem() const { return problem_; }

    std::string_view name() const override { return "fem"; }
    std::size_t dimension() const override { return system_.dimension(); }
    const Eigen::VectorXd& eigenvalues() const override { return system_.eigenvalues(); }
    double delta0() const override { return problem_.delta0; }
    double potential(const Eigen::VectorXd& u) const override;
    ModalDrift drift_direction(const Eigen::VectorXd& u_hat) const override;
    Eigen::VectorXd noise_term(const Eigen::VectorXd& u, const Eigen::VectorXd& dW) const override;
    double noise_trace(const Eigen::VectorXd& u) const override;
    const CovarianceSpec& covariance() const override { return problem_.noise; }
    bool drift_vanishes() const override { return problem_.drift.kind == DriftKind::zero; }
    bool noise_vanishes() const override { return problem_.diffusion.is_zero(); }
    Eigen::VectorXd initial_displacement() const override { return u0_; }
    Eigen::VectorXd initial_velocity() const override { return v0_; }
    Eigen::MatrixXd sampling_matrix(std::size_t intervals) const override;

    std::size_t quadrature_points() const { return static_cast<std::size_t>(quad_.x.size()); }

private:
    /// Per quadrature point values g(u_h, u_h') * weight.
    Eigen::VectorXd weighted_g(const Eigen::VectorXd& u_modal) const;
    /// phi^T B^T diag(c) for quadrature values c; B maps nodal vectors to quadrature points.
    Eigen::VectorXd quad_to_modal(const Eigen::VectorXd& c) const;

    Problem problem_;
    FemSystem system_;
    ElementQuadrature quad_;
    Eigen::MatrixXd sine_at_quad_;  // e_k(x_q), Q x K
    Eigen::MatrixXd constant_map_;  // modal P_h e_k columns, d x K (constant g)
    double constant_trace_ = 0.0;
    Eigen::VectorXd u0_;
    Eigen::VectorXd v0_;
};

/// One fully discrete SAV step on the finite-element backend.
StepOutcome step_fem_sav(const FemDiscretization& disc, const SchemeTables& tables, const SavState& state,
                         const Eigen::VectorXd& dW, Scheme scheme, Predictor predictor = Predictor::identity,
                         SchemeOptions options = {});

}  // namespace savwave
