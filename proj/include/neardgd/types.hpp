#pragma once

#include <Eigen/Dense>

namespace neardgd {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Agent states are kept as rows of an n x p matrix, so one consensus round
// is a plain left-multiplication by the n x n mixing matrix and the
// Kronecker product with I_p never has to be formed.
using BlockMatrix = Eigen::MatrixXd;

}  // namespace neardgd
