#include "whitebait/kernels.hpp"

#include <algorithm>

namespace whitebait::kernels {

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d) {
  std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(d.m * d.n), 0.0);
  for (std::size_t i = 0; i < d.m; ++i) {
    double* crow = c.data() + i * d.n;
    for (std::size_t p = 0; p < d.k; ++p) {
      const double aip = a[i * d.k + p];
      const double* brow = b.data() + p * d.n;
      for (std::size_t j = 0; j < d.n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c, Dims d) {
  for (std::size_t p = 0; p < d.k; ++p) {
    double* crow = c.data() + p * d.n;
    for (std::size_t i = 0; i < d.m; ++i) {
      const double aip = a[i * d.k + p];
      const double* grow = g.data() + i * d.n;
      for (std::size_t j = 0; j < d.n; ++j) crow[j] += aip * grow[j];
    }
  }
}

void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c, Dims d) {
  for (std::size_t i = 0; i < d.m; ++i) {
    const double* grow = g.data() + i * d.n;
    for (std::size_t p = 0; p < d.k; ++p) {
      const double* brow = b.data() + p * d.n;
      double acc = 0.0;
      for (std::size_t j = 0; j < d.n; ++j) acc += grow[j] * brow[j];
      c[i * d.k + p] += acc;
    }
  }
}

}  // namespace serial

namespace {
bool worth_parallel(Dims d) { return parallel_available() && d.m * d.k * d.n >= kParallelThreshold; }
}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d) {
  worth_parallel(d) ? parallel::matmul(a, b, c, d) : serial::matmul(a, b, c, d);
}

void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c, Dims d) {
  worth_parallel(d) ? parallel::matmul_at_b_acc(a, g, c, d) : serial::matmul_at_b_acc(a, g, c, d);
}

void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c, Dims d) {
  worth_parallel(d) ? parallel::matmul_a_bt_acc(g, b, c, d) : serial::matmul_a_bt_acc(g, b, c, d);
}

}  // namespace whitebait::kernels
