#pragma once

#include <span>

#include "hogsvd/analysis.hpp"
#include "hogsvd/hocsd.hpp"
#include "hogsvd/hogsvd.hpp"
#include "hogsvd/matrix.hpp"

// Serial versions of the parallel kernels. They use the same summation order,
// so results must match the parallel paths bit for bit.

namespace hogsvd::reference {

Matrix matmul(const Matrix& a, const Matrix& b);
MeanOperator build_t_pi(const OrthoSet& set);
MeanOperator build_s_pi_direct(const MatrixSet& set, double pi);
SweepResult pi_sweep(const MatrixSet& set, std::span<const double> grid);

}  // namespace hogsvd::reference
