#pragma once

#include <cstddef>
#include <span>

// Dense matrix kernels behind the affine/matmul ops.
//
// Two implementations share one contract: `serial` is the plain reference,
// `parallel` splits output rows across OpenMP threads. Every output element
// is accumulated in the same order by both, so results are bit-identical and
// training stays deterministic regardless of thread count.
//
// All matrices are row-major. The accumulate variants add into `c`.
namespace whitebait::kernels {

struct Dims {
  std::size_t m, k, n;
};

namespace serial {
// c[m,n] = a[m,k] * b[k,n]
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d);
// c[k,n] += a[m,k]^T * g[m,n]
void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c, Dims d);
// c[m,k] += g[m,n] * b[k,n]^T
void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c, Dims d);
}  // namespace serial

namespace parallel {
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d);
void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c, Dims d);
void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c, Dims d);
}  // namespace parallel

// True when the parallel variants were compiled with OpenMP.
bool parallel_available();

// Minimum m*k*n before the dispatchers below use the parallel variant.
inline constexpr std::size_t kParallelThreshold = 1 << 16;

// Dispatchers used by the ops layer.
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, Dims d);
void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c, Dims d);
void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c, Dims d);

}  // namespace whitebait::kernels
