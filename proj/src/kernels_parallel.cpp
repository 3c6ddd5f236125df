#include "whitebait/kernels.hpp"

#include <algorithm>
#include <cstdint>

namespace whitebait::kernels {

bool parallel_available() {
#ifdef WHITEBAIT_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

namespace parallel {

// Each output row is owned by one thread and accumulated in the same order as
// the serial kernels.

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d) {
  const auto m = static_cast<std::int64_t>(d.m);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < m; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double* crow = c.data() + i * d.n;
    std::fill(crow, crow + d.n, 0.0);
    for (std::size_t p = 0; p < d.k; ++p) {
      const double aip = a[i * d.k + p];
      const double* brow = b.data() + p * d.n;
      for (std::size_t j = 0; j < d.n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c, Dims d) {
  const auto k = static_cast<std::int64_t>(d.k);
#pragma omp parallel for schedule(static)
  for (std::int64_t pp = 0; pp < k; ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    double* crow = c.data() + p * d.n;
    for (std::size_t i = 0; i < d.m; ++i) {
      const double aip = a[i * d.k + p];
      const double* grow = g.data() + i * d.n;
      for (std::size_t j = 0; j < d.n; ++j) crow[j] += aip * grow[j];
    }
  }
}

void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c, Dims d) {
  const auto m = static_cast<std::int64_t>(d.m);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < m; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* grow = g.data() + i * d.n;
    for (std::size_t p = 0; p < d.k; ++p) {
      const double* brow = b.data() + p * d.n;
      double acc = 0.0;
      for (std::size_t j = 0; j < d.n; ++j) acc += grow[j] * brow[j];
      c[i * d.k + p] += acc;
    }
  }
}

}  // namespace parallel
}  // namespace whitebait::kernels
