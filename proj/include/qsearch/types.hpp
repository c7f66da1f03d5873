#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qsearch {

using Scalar = double;
using Complex = std::complex<Scalar>;

using VectorX = Eigen::VectorXd;
using VectorXc = Eigen::VectorXcd;
using VectorXi = Eigen::VectorXi;
using MatrixX = Eigen::MatrixXd;
using MatrixXi = Eigen::MatrixXi;

}  // namespace qsearch
