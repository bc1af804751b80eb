#include "savwave/quadrature.hpp"

#include <stdexcept>

namespace savwave {

QuadratureGrid::QuadratureGrid(std::size_t intervals) : intervals_(intervals) {
    if (intervals < 1) {
        throw std::invalid_argument("QuadratureGrid: need at least one interval");
    }
    const double h = 1.0 / static_cast<double>(intervals);
    weights_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(intervals + 1), h);
    weights_(0) = 0.5 * h;
    weights_(static_cast<Eigen::Index>(intervals)) = 0.5 * h;
}

}  // namespace savwave
