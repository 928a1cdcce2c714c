#ifndef QENS_TYPES_HPP
#define QENS_TYPES_HPP

#include <Eigen/Dense>
#include <complex>

namespace qens {

using Real    = double;
using Complex = std::complex<double>;

using VecX  = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using MatX  = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;

inline constexpr Complex I{0.0, 1.0};

}  // namespace qens

#endif
