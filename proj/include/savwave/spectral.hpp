#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace savwave {

/// Raised when two fields (or a field and an operator table) disagree on
/// their number of retained modes.
class ModeMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Coefficients of a function on (0,1) in the Dirichlet sine eigenbasis
/// e_k(x) = sqrt(2) sin(k pi x), k = 1..K. Coefficient k is stored at index k-1.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(std::size_t modes);
    explicit SpectralField(Eigen::VectorXd coeffs);

    /// Unit coefficient on mode k (1-based), zero elsewhere.
    static SpectralField eigenmode(std::size_t modes, std::size_t k, double amplitude = 1.0);

    std::size_t modes() const { return static_cast<std::size_t>(coeffs_.size()); }
    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    Eigen::VectorXd& coeffs() { return coeffs_; }

    /// 1-based access, matching the mode index.
    double mode(std::size_t k) const { return coeffs_(static_cast<Eigen::Index>(k - 1)); }

    bool is_finite() const { return coeffs_.allFinite(); }

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double scale);

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

private:
    Eigen::VectorXd coeffs_;
};

/// L2 inner product of two fields (Parseval in the orthonormal basis).
double inner(const SpectralField& a, const SpectralField& b);

void require_same_modes(const SpectralField& a, const SpectralField& b, const char* what);

/// Displacement/velocity pair X = (u, v).
struct PairState {
    SpectralField u;
    SpectralField v;
};

/// lambda_k = (k pi)^2, the k-th eigenvalue of -Laplacian on (0,1).
double eigenvalue(std::size_t k);

/// (lambda_1, ..., lambda_K).
Eigen::VectorXd eigenvalues(std::size_t modes);

/// Applies (-Laplacian)^r diagonally.
SpectralField fractional_laplacian(const SpectralField& f, double power);

/// sum_k lambda_k^r coeff_k^2, i.e. the squared \dot H^r norm.
double sobolev_norm_sq(const SpectralField& f, double r);

/// Per-mode values of the wave group E(tau) and the exponential-integrator
/// weight a1 = (1 - cos(tau sqrt(lambda))) / lambda, for an arbitrary positive
/// spectrum. Built once, read-only afterwards.
class WaveGroupTable {
public:
    WaveGroupTable(const Eigen::VectorXd& eigenvalues, double tau);

    /// Table for the first `modes` Dirichlet eigenvalues on (0,1).
    static WaveGroupTable spectral(std::size_t modes, double tau);

    double tau() const { return tau_; }
    std::size_t modes() const { return static_cast<std::size_t>(lambda_.size()); }

    const Eigen::VectorXd& lambda() const { return lambda_; }
    const Eigen::VectorXd& cos() const { return cos_; }
    const Eigen::VectorXd& sin() const { return sin_; }
    const Eigen::VectorXd& sqrt_lambda() const { return sqrt_lambda_; }
    const Eigen::VectorXd& inv_sqrt_lambda() const { return inv_sqrt_lambda_; }
    const Eigen::VectorXd& a1() const { return a1_; }

    /// C(tau) x
    Eigen::VectorXd cosine(const Eigen::VectorXd& x) const;
    /// (-Lambda)^{-1/2} S(tau) x
    Eigen::VectorXd sine_smoothing(const Eigen::VectorXd& x) const;
    /// S(tau) x
    Eigen::VectorXd sine(const Eigen::VectorXd& x) const;

    /// (u, v) <- E(tau) (u, v) on raw coefficient vectors.
    void apply(Eigen::VectorXd& u, Eigen::VectorXd& v) const;

private:
    double tau_;
    Eigen::VectorXd lambda_;
    Eigen::VectorXd cos_;
    Eigen::VectorXd sin_;
    Eigen::VectorXd sqrt_lambda_;
    Eigen::VectorXd inv_sqrt_lambda_;
    Eigen::VectorXd a1_;
};

/// E(tau) x. Preserves 1/2|u|_{H^1}^2 + 1/2|v|^2.
PairState group_step(const PairState& x, const WaveGroupTable& table);

/// Synthesis/analysis between K sine coefficients and values on the uniform
/// grid x_j = j/M, j = 0..M. Direct summation against a precomputed table.
class SineTransform {
public:
    SineTransform(std::size_t modes, std::size_t intervals);

    std::size_t modes() const { return modes_; }
    std::size_t intervals() const { return intervals_; }

    /// Values at all M+1 nodes; endpoints are exactly zero.
    Eigen::VectorXd to_nodal(const Eigen::VectorXd& coeffs) const;

    /// Values of d/dx at all M+1 nodes.
    Eigen::VectorXd derivative_to_nodal(const Eigen::VectorXd& coeffs) const;

    /// Type-I sine quadrature, c_k = (sqrt 2 / M) sum_j v_j sin(k pi j / M).
    /// Endpoint values must vanish to within `endpoint_tol`.
    Eigen::VectorXd to_spectral(const Eigen::VectorXd& nodal, double endpoint_tol = 1e-12) const;

    /// Same as to_spectral but ignores the endpoint values (used for
    /// Nemytskii products whose endpoint values are not zero, e.g. g = const).
    Eigen::VectorXd project_interior(const Eigen::VectorXd& nodal) const;

    /// Interior-node view of the basis: rows j = 1..M-1, columns k = 1..K,
    /// entry sqrt(2) sin(k pi j / M).
    const Eigen::MatrixXd& basis() const { return basis_; }

private:
    std::size_t modes_;
    std::size_t intervals_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd derivative_basis_;
};

/// Nodal values of f on the grid j/M, j = 0..M. Warns on stderr if M < K.
std::vector<double> to_nodal(const SpectralField& f, std::size_t intervals);

/// Inverse of to_nodal on the same grid. Rejects nonzero endpoints.
SpectralField to_spectral(std::span<const double> values, std::size_t modes);

}  // namespace savwave
