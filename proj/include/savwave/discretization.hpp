#pragma once

#include "savwave/noise.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace savwave {

/// Raised when F(u) + delta0 falls below the admissible floor.
class ModelViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// b = f(u_hat) / s with s = sqrt(F(u_hat) + delta0), in modal coordinates.
struct ModalDrift {
    Eigen::VectorXd b;
    double s = 1.0;
};

/// Spatial backend seen by the time integrators.
///
/// States live in modal coordinates that diagonalize the (discrete) Laplacian:
/// -Lambda acts as multiplication by eigenvalues(), and the L2 (or mass)
/// inner product is the Euclidean one. The sine-spectral and finite-element
/// backends both provide this view, so the scheme algebra is shared.
class Discretization {
public:
    virtual ~Discretization() = default;

    virtual std::string_view name() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual const Eigen::VectorXd& eigenvalues() const = 0;
    virtual double delta0() const = 0;

    /// F(u) = int F~(u(x)) dx.
    virtual double potential(const Eigen::VectorXd& u) const = 0;

    /// Projected f(u_hat)/sqrt(F(u_hat)+delta0) and the square root itself.
    /// Throws ModelViolation if the radicand drops below the floor.
    virtual ModalDrift drift_direction(const Eigen::VectorXd& u_hat) const = 0;

    /// Projected g(Theta u) dW for a noise increment given in sine coefficients.
    virtual Eigen::VectorXd noise_term(const Eigen::VectorXd& u, const Eigen::VectorXd& dW) const = 0;

    /// sum_k q_k int g(Theta u)^2 e_k^2 dx, the trace entering the energy law.
    virtual double noise_trace(const Eigen::VectorXd& u) const = 0;

    /// Covariance of the driving Q-Wiener process.
    virtual const CovarianceSpec& covariance() const = 0;
    /// Number of sine modes in the driving noise.
    std::size_t noise_modes() const { return covariance().modes(); }

    /// f == 0 identically.
    virtual bool drift_vanishes() const = 0;
    /// g == 0 identically.
    virtual bool noise_vanishes() const = 0;

    virtual Eigen::VectorXd initial_displacement() const = 0;
    virtual Eigen::VectorXd initial_velocity() const = 0;

    /// Matrix mapping modal coordinates to values at x_j = j/M, j = 0..M.
    virtual Eigen::MatrixXd sampling_matrix(std::size_t intervals) const = 0;
};

/// Lower bound enforced on F(u) + delta0 along every trajectory.
inline constexpr double kRadicandFloor = 1e-8;

/// Checks the radicand and returns its square root.
double checked_sav_root(double potential, double delta0);

}  // namespace savwave
