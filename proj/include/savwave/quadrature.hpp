#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace savwave {

/// Composite trapezoid rule on the uniform grid x_j = j/M, j = 0..M of [0,1].
class QuadratureGrid {
public:
    explicit QuadratureGrid(std::size_t intervals);

    std::size_t intervals() const { return intervals_; }
    std::size_t size() const { return intervals_ + 1; }
    double spacing() const { return 1.0 / static_cast<double>(intervals_); }
    double node(std::size_t j) const { return static_cast<double>(j) * spacing(); }

    const Eigen::VectorXd& weights() const { return weights_; }

    double integrate(const Eigen::VectorXd& values) const { return weights_.dot(values); }

private:
    std::size_t intervals_;
    Eigen::VectorXd weights_;
};

}  // namespace savwave
