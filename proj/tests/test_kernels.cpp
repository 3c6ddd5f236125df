#include <doctest.h>

#include <vector>

#include "whitebait/kernels.hpp"
#include "whitebait/rng.hpp"

using namespace whitebait;
namespace k = whitebait::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Triple loop written independently of the kernels.
std::vector<double> naive(const std::vector<double>& a, const std::vector<double>& b, k::Dims d) {
  std::vector<double> c(d.m * d.n, 0.0);
  for (std::size_t i = 0; i < d.m; ++i)
    for (std::size_t j = 0; j < d.n; ++j) {
      long double s = 0;
      for (std::size_t p = 0; p < d.k; ++p) s += static_cast<long double>(a[i * d.k + p]) * b[p * d.n + j];
      c[i * d.n + j] = static_cast<double>(s);
    }
  return c;
}

}  // namespace

TEST_CASE("serial and parallel kernels are bit-identical") {
  Rng rng(99);
  const k::Dims shapes[] = {{1, 1, 1}, {3, 5, 2}, {17, 33, 9}, {64, 100, 400}, {130, 7, 65}};
  for (auto d : shapes) {
    auto a = random_vec(d.m * d.k, rng);
    auto b = random_vec(d.k * d.n, rng);
    auto g = random_vec(d.m * d.n, rng);

    std::vector<double> c1(d.m * d.n), c2(d.m * d.n);
    k::serial::matmul(a, b, c1, d);
    k::parallel::matmul(a, b, c2, d);
    CHECK(c1 == c2);

    auto ref = naive(a, b, d);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(c1[i] == doctest::Approx(ref[i]).epsilon(1e-12));

    std::vector<double> w1(d.k * d.n, 0.5), w2(d.k * d.n, 0.5);
    k::serial::matmul_at_b_acc(a, g, w1, d);
    k::parallel::matmul_at_b_acc(a, g, w2, d);
    CHECK(w1 == w2);

    std::vector<double> x1(d.m * d.k, -0.25), x2(d.m * d.k, -0.25);
    k::serial::matmul_a_bt_acc(g, b, x1, d);
    k::parallel::matmul_a_bt_acc(g, b, x2, d);
    CHECK(x1 == x2);

    std::vector<double> c3(d.m * d.n);
    k::matmul(a, b, c3, d);
    CHECK(c3 == c1);
  }
}

TEST_CASE("transposed products match the naive definition") {
  Rng rng(4);
  k::Dims d{6, 4, 5};
  auto a = random_vec(d.m * d.k, rng);
  auto b = random_vec(d.k * d.n, rng);
  auto g = random_vec(d.m * d.n, rng);

  std::vector<double> at_g(d.k * d.n, 0.0);
  k::serial::matmul_at_b_acc(a, g, at_g, d);
  for (std::size_t p = 0; p < d.k; ++p)
    for (std::size_t j = 0; j < d.n; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < d.m; ++i) s += a[i * d.k + p] * g[i * d.n + j];
      CHECK(at_g[p * d.n + j] == doctest::Approx(s).epsilon(1e-12));
    }

  std::vector<double> g_bt(d.m * d.k, 0.0);
  k::serial::matmul_a_bt_acc(g, b, g_bt, d);
  for (std::size_t i = 0; i < d.m; ++i)
    for (std::size_t p = 0; p < d.k; ++p) {
      double s = 0;
      for (std::size_t j = 0; j < d.n; ++j) s += g[i * d.n + j] * b[p * d.n + j];
      CHECK(g_bt[i * d.k + p] == doctest::Approx(s).epsilon(1e-12));
    }
}
