#pragma once

#include "savwave/discretization.hpp"
#include "savwave/noise.hpp"
#include "savwave/quadrature.hpp"
#include "savwave/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <string_view>

namespace savwave {

/// Built-in drift nonlinearities f = F~'.
enum class DriftKind { zero, linear, sine, cubic };

struct Drift {
    DriftKind kind = DriftKind::linear;

    double operator()(double u) const;
    /// F~ with F~(0) = 0.
    double antiderivative(double u) const;

    std::string_view name() const;
    static Drift from_name(std::string_view name);
};

/// Diffusion coefficient g(Theta u) with Theta u = (u, u_x).
/// constant: sigma, sine: sigma sin(u), linear: sigma u, custom: user map.
enum class DiffusionKind { constant, sine, linear, custom };

struct Diffusion {
    DiffusionKind kind = DiffusionKind::sine;
    double sigma = 1.0;
    std::function<double(double, double)> custom;
    bool custom_uses_gradient = false;

    double operator()(double u, double ux) const;

    bool uses_gradient() const { return kind == DiffusionKind::custom && custom_uses_gradient; }
    bool is_constant() const { return kind == DiffusionKind::constant; }
    bool is_zero() const { return kind != DiffusionKind::custom && sigma == 0.0; }

    std::string_view name() const;
    static Diffusion from_name(std::string_view name, double sigma = 1.0);
};

/// Stochastic wave problem on (0,1) with homogeneous Dirichlet data.
struct Problem {
    Drift drift;
    Diffusion diffusion;
    double delta0 = 1.0;
    SpectralField u0;
    SpectralField v0;
    CovarianceSpec noise;

    /// u0 = amplitude * sin(pi x), v0 = 0, q_k = k^{-decay} on `modes` modes.
    static Problem standard(std::size_t modes, Drift drift, Diffusion diffusion, double decay = 2.0,
                            double delta0 = 1.0, double amplitude = 1.0);
};

/// Dealiased evaluation grid for the spectral backend: K modes, M intervals.
class NodalGrid {
public:
    /// `intervals == 0` selects M = 2K.
    explicit NodalGrid(std::size_t modes, std::size_t intervals = 0);

    std::size_t modes() const { return transform_.modes(); }
    std::size_t intervals() const { return transform_.intervals(); }
    const SineTransform& transform() const { return transform_; }
    const QuadratureGrid& quadrature() const { return quadrature_; }

private:
    SineTransform transform_;
    QuadratureGrid quadrature_;
};

/// Trapezoid approximation of int_0^1 F~(u(x)) dx.
double eval_F(const SpectralField& u, const Problem& problem, const NodalGrid& grid);

/// sqrt(F(u) + delta0). Throws ModelViolation below the floor.
double sav_value(const SpectralField& u, const Problem& problem, const NodalGrid& grid);

struct DriftDirection {
    SpectralField b;
    double s = 1.0;
};

/// b = P_K [f(u_hat) / sqrt(F(u_hat) + delta0)], s = sqrt(F(u_hat) + delta0).
DriftDirection drift_direction(const SpectralField& u_hat, const Problem& problem, const NodalGrid& grid);

/// P_K [g(u, u_x) dW] evaluated on the nodal grid.
SpectralField apply_g(const SpectralField& u, const NoiseIncrement& dW, const Problem& problem,
                      const NodalGrid& grid);

/// Sine-Galerkin backend: modal coordinates are the sine coefficients.
class SpectralDiscretization final : public Discretization {
public:
    SpectralDiscretization(Problem problem, std::size_t intervals = 0);

    const Problem& problem() const { return problem_; }
    const NodalGrid& grid() const { return grid_; }

    std::string_view name() const override { return "spectral"; }
    std::size_t dimension() const override { return grid_.modes(); }
    const Eigen::VectorXd& eigenvalues() const override { return lambda_; }
    double delta0() const override { return problem_.delta0; }
    double potential(const Eigen::VectorXd& u) const override;
    ModalDrift drift_direction(const Eigen::VectorXd& u_hat) const override;
    Eigen::VectorXd noise_term(const Eigen::VectorXd& u, const Eigen::VectorXd& dW) const override;
    double noise_trace(const Eigen::VectorXd& u) const override;
    const CovarianceSpec& covariance() const override { return problem_.noise; }
    bool drift_vanishes() const override { return problem_.drift.kind == DriftKind::zero; }
    bool noise_vanishes() const override { return problem_.diffusion.is_zero(); }
    Eigen::VectorXd initial_displacement() const override { return problem_.u0.coeffs(); }
    Eigen::VectorXd initial_velocity() const override { return problem_.v0.coeffs(); }
    Eigen::MatrixXd sampling_matrix(std::size_t intervals) const override;

private:
    Problem problem_;
    NodalGrid grid_;
    Eigen::VectorXd lambda_;
    Eigen::VectorXd intensity_;
};

}  // namespace savwave
