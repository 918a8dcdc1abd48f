#include "dnaplan/kernels.hpp"

#include <limits>

namespace dnaplan::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below these sizes the fork/join cost dominates.
constexpr std::size_t kMinParallelNodes = 128;
constexpr std::size_t kMinParallelWork = 1 << 14;

inline double relax_one(MatrixView w, std::span<const unsigned char> active, std::span<const double> prev,
                        std::size_t j) {
  if (!active[j]) return kInf;
  double best = kInf;
  const double* row = w.data + j * w.cols;
  for (std::size_t l = 0; l < j; ++l) {
    if (!active[l]) continue;
    const double c = row[l] + prev[l];
    if (c < best) best = c;
  }
  return best;
}

inline void forward_row(MatrixView w, std::span<const double> b, MatrixView x, MutableMatrixView y,
                        std::size_t n) {
  const double* xr = x.data + n * x.cols;
  for (std::size_t o = 0; o < w.rows; ++o) {
    const double* wr = w.data + o * w.cols;
    double acc = b[o];
    for (std::size_t i = 0; i < w.cols; ++i) acc += wr[i] * xr[i];
    y(n, o) = acc;
  }
}

inline void params_row(MatrixView dy, MatrixView x, MutableMatrixView dw, std::span<double> db,
                       std::size_t o) {
  double* dwr = dw.data + o * dw.cols;
  double bacc = 0.0;
  for (std::size_t n = 0; n < dy.rows; ++n) {
    const double g = dy(n, o);
    if (g == 0.0) continue;
    bacc += g;
    const double* xr = x.data + n * x.cols;
    for (std::size_t i = 0; i < x.cols; ++i) dwr[i] += g * xr[i];
  }
  db[o] += bacc;
}

inline void input_row(MatrixView w, MatrixView dy, MutableMatrixView dx, std::size_t n) {
  double* dxr = dx.data + n * dx.cols;
  for (std::size_t i = 0; i < dx.cols; ++i) dxr[i] = 0.0;
  for (std::size_t o = 0; o < w.rows; ++o) {
    const double g = dy(n, o);
    if (g == 0.0) continue;
    const double* wr = w.data + o * w.cols;
    for (std::size_t i = 0; i < w.cols; ++i) dxr[i] += g * wr[i];
  }
}

}  // namespace

namespace serial {

void relax_layer(MatrixView weights, std::span<const unsigned char> active, std::span<const double> prev,
                 std::span<double> next) {
  for (std::size_t j = 0; j < next.size(); ++j) next[j] = relax_one(weights, active, prev, j);
}

void affine_forward(MatrixView w, std::span<const double> b, MatrixView x, MutableMatrixView y) {
  for (std::size_t n = 0; n < x.rows; ++n) forward_row(w, b, x, y, n);
}

void affine_backward_params(MatrixView dy, MatrixView x, MutableMatrixView dw, std::span<double> db) {
  for (std::size_t o = 0; o < dw.rows; ++o) params_row(dy, x, dw, db, o);
}

void affine_backward_input(MatrixView w, MatrixView dy, MutableMatrixView dx) {
  for (std::size_t n = 0; n < dy.rows; ++n) input_row(w, dy, dx, n);
}

}  // namespace serial

namespace omp {

void relax_layer(MatrixView weights, std::span<const unsigned char> active, std::span<const double> prev,
                 std::span<double> next) {
  const auto n = static_cast<long>(next.size());
#pragma omp parallel for schedule(dynamic, 16) if (next.size() >= kMinParallelNodes)
  for (long j = 0; j < n; ++j) next[j] = relax_one(weights, active, prev, static_cast<std::size_t>(j));
}

void affine_forward(MatrixView w, std::span<const double> b, MatrixView x, MutableMatrixView y) {
  const auto rows = static_cast<long>(x.rows);
#pragma omp parallel for schedule(static) if (x.rows * w.rows * w.cols >= kMinParallelWork)
  for (long n = 0; n < rows; ++n) forward_row(w, b, x, y, static_cast<std::size_t>(n));
}

void affine_backward_params(MatrixView dy, MatrixView x, MutableMatrixView dw, std::span<double> db) {
  const auto rows = static_cast<long>(dw.rows);
#pragma omp parallel for schedule(static) if (dy.rows * dw.rows * dw.cols >= kMinParallelWork)
  for (long o = 0; o < rows; ++o) params_row(dy, x, dw, db, static_cast<std::size_t>(o));
}

void affine_backward_input(MatrixView w, MatrixView dy, MutableMatrixView dx) {
  const auto rows = static_cast<long>(dy.rows);
#pragma omp parallel for schedule(static) if (dy.rows * w.rows * w.cols >= kMinParallelWork)
  for (long n = 0; n < rows; ++n) input_row(w, dy, dx, static_cast<std::size_t>(n));
}

}  // namespace omp

}  // namespace dnaplan::kernels
