#pragma once

// Data-parallel inner loops shared by the planner and the predictor.
//
// Every kernel exists twice: `serial::` is the reference implementation and
// `omp::` the OpenMP version. Both perform each output's reduction in the same
// order, so results are bit-identical regardless of thread count. Tests rely
// on that; bench/ measures the difference.

#include <cstddef>
#include <span>

namespace dnaplan::kernels {

/// Row-major dense matrix view.
struct MatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct MutableMatrixView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  [[nodiscard]] double& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

namespace serial {
/// next[j] = min over active l < j of weights(j, l) + prev[l]; +inf when j is
/// inactive or unreachable.
void relax_layer(MatrixView weights, std::span<const unsigned char> active,
                   std::span<const double> prev, std::span<double> next);
/// Y = X W^T + b   (X: batch x in, W: out x in, Y: batch x out)
void affine_forward(MatrixView w, std::span<const double> b, MatrixView x, MutableMatrixView y);
/// dW += dY^T X, db += column sums of dY
void affine_backward_params(MatrixView dy, MatrixView x, MutableMatrixView dw, std::span<double> db);
/// dX = dY W
void affine_backward_input(MatrixView w, MatrixView dy, MutableMatrixView dx);
}  // namespace serial

namespace omp {
// Same contracts as serial::.
void relax_layer(MatrixView weights, std::span<const unsigned char> active,
                 std::span<const double> prev, std::span<double> next);
void affine_forward(MatrixView w, std::span<const double> b, MatrixView x, MutableMatrixView y);
void affine_backward_params(MatrixView dy, MatrixView x, MutableMatrixView dw, std::span<double> db);
void affine_backward_input(MatrixView w, MatrixView dy, MutableMatrixView dx);
}  // namespace omp

using omp::affine_backward_input;
using omp::affine_backward_params;
using omp::affine_forward;
using omp::relax_layer;

}  // namespace dnaplan::kernels
