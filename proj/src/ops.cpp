#include "whitebait/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "whitebait/error.hpp"
#include "whitebait/kernels.hpp"

namespace whitebait::ops {

namespace {

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) + " and " +
                   shape_string(b.shape()));
}

void require_matrix(const char* op, const Tensor& a) {
  if (a.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(a.shape()));
}

double sigmoid_scalar(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename F, typename D>
Var unary(Tape& t, const char* name, Var a, F forward, D derivative) {
  const Tensor& av = t.value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = forward(av[i]);
  return t.record(name, std::move(out), {a}, [a, derivative](Tape& tp, std::uint32_t self) {
    if (!tp.requires_grad(a)) return;
    const Tensor& y = tp.value(Var{self});
    const Tensor& x = tp.value(a);
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * derivative(x[i], y[i]);
  });
}

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_matrix("matmul", av);
  require_matrix("matmul", bv);
  if (av.cols() != bv.rows()) shape_fail("matmul", av, bv);
  kernels::Dims d{av.rows(), av.cols(), bv.cols()};
  Tensor out({d.m, d.n});
  kernels::matmul(av.data(), bv.data(), out.data(), d);
  return t.record("matmul", std::move(out), {a, b}, [a, b, d](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(a)) kernels::matmul_a_bt_acc(g.data(), tp.value(b).data(), tp.grad(a).data(), d);
    if (tp.requires_grad(b)) kernels::matmul_at_b_acc(tp.value(a).data(), g.data(), tp.grad(b).data(), d);
  });
}

Var affine(Tape& t, Var x, Var w, Var b) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const Tensor& bv = t.value(b);
  require_matrix("affine", xv);
  require_matrix("affine", wv);
  if (xv.cols() != wv.rows()) shape_fail("affine", xv, wv);
  if (bv.size() != wv.cols()) shape_fail("affine", wv, bv);
  kernels::Dims d{xv.rows(), xv.cols(), wv.cols()};
  Tensor out({d.m, d.n});
  kernels::matmul(xv.data(), wv.data(), out.data(), d);
  for (std::size_t i = 0; i < d.m; ++i)
    for (std::size_t j = 0; j < d.n; ++j) out.at(i, j) += bv[j];
  return t.record("affine", std::move(out), {x, w, b}, [x, w, b, d](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(x)) kernels::matmul_a_bt_acc(g.data(), tp.value(w).data(), tp.grad(x).data(), d);
    if (tp.requires_grad(w)) kernels::matmul_at_b_acc(tp.value(x).data(), g.data(), tp.grad(w).data(), d);
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad(b);
      for (std::size_t i = 0; i < d.m; ++i)
        for (std::size_t j = 0; j < d.n; ++j) gb[j] += g[i * d.n + j];
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.shape() != bv.shape()) shape_fail("add", av, bv);
  Tensor out = av;
  out.add_(bv);
  return t.record("add", std::move(out), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(a)) tp.grad(a).add_(g);
    if (tp.requires_grad(b)) tp.grad(b).add_(g);
  });
}

Var sub(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.shape() != bv.shape()) shape_fail("sub", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
  return t.record("sub", std::move(out), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(a)) tp.grad(a).add_(g);
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.shape() != bv.shape()) shape_fail("mul", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return t.record("mul", std::move(out), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad(self);
    const bool ra = tp.requires_grad(a), rb = tp.requires_grad(b);
    const Tensor& av2 = tp.value(a);
    const Tensor& bv2 = tp.value(b);
    if (ra) {
      Tensor& ga = tp.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
    }
    if (rb) {
      Tensor& gb = tp.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av2[i];
    }
  });
}

Var scale(Tape& t, Var a, double factor) {
  return unary(
      t, "scale", a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var sigmoid(Tape& t, Var a) {
  return unary(t, "sigmoid", a, sigmoid_scalar, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Tape& t, Var a) {
  return unary(
      t, "tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Tape& t, Var a) {
  return unary(
      t, "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = t.value(parts[0]).rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Var p : parts) {
    const Tensor& v = t.value(p);
    require_matrix("concat_cols", v);
    if (v.rows() != rows) shape_fail("concat_cols", t.value(parts[0]), v);
    widths.push_back(v.cols());
    total += v.cols();
  }
  Tensor out({rows, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = t.value(parts[k]);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < widths[k]; ++j) out.at(i, offset + j) = v.at(i, j);
    offset += widths[k];
  }
  return t.record("concat_cols", std::move(out), parts, [parts, widths, rows, total](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (tp.requires_grad(parts[k])) {
        Tensor& gp = tp.grad(parts[k]);
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j) gp[i * widths[k] + j] += g[i * total + off + j];
      }
      off += widths[k];
    }
  });
}

Var slice_cols(Tape& t, Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = t.value(a);
  require_matrix("slice_cols", av);
  if (begin >= end || end > av.cols())
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for shape " + shape_string(av.shape()));
  const std::size_t rows = av.rows(), cols = av.cols(), width = end - begin;
  Tensor out({rows, width});
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < width; ++j) out.at(i, j) = av.at(i, begin + j);
  return t.record("slice_cols", std::move(out), {a}, [a, begin, rows, cols, width](Tape& tp, std::uint32_t self) {
    if (!tp.requires_grad(a)) return;
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad(a);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < width; ++j) ga[i * cols + begin + j] += g[i * width + j];
  });
}

Var slice_rows(Tape& t, Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = t.value(a);
  require_matrix("slice_rows", av);
  if (begin >= end || end > av.rows())
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for shape " + shape_string(av.shape()));
  const std::size_t cols = av.cols();
  Tensor out({end - begin, cols});
  std::copy(av.values().begin() + static_cast<std::ptrdiff_t>(begin * cols),
            av.values().begin() + static_cast<std::ptrdiff_t>(end * cols), out.values().begin());
  return t.record("slice_rows", std::move(out), {a}, [a, begin, cols](Tape& tp, std::uint32_t self) {
    if (!tp.requires_grad(a)) return;
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[begin * cols + i] += g[i];
  });
}

Var mean(Tape& t, Var a) {
  const Tensor& av = t.value(a);
  if (av.size() == 0) throw ShapeError("mean: empty tensor");
  double s = 0.0;
  for (double v : av.values()) s += v;
  const double n = static_cast<double>(av.size());
  return t.record("mean", Tensor::scalar(s / n), {a}, [a, n](Tape& tp, std::uint32_t self) {
    if (!tp.requires_grad(a)) return;
    const double g = tp.grad(self)[0] / n;
    Tensor& ga = tp.grad(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var mse(Tape& t, Var pred, Var target) {
  const Tensor& pv = t.value(pred);
  const Tensor& tv = t.value(target);
  if (pv.shape() != tv.shape()) shape_fail("mse", pv, tv);
  if (pv.size() == 0) throw ShapeError("mse: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) s += (pv[i] - tv[i]) * (pv[i] - tv[i]);
  const double n = static_cast<double>(pv.size());
  return t.record("mse", Tensor::scalar(s / n), {pred, target}, [pred, target, n](Tape& tp, std::uint32_t self) {
    const double g = tp.grad(self)[0] * 2.0 / n;
    const Tensor& p = tp.value(pred);
    const Tensor& y = tp.value(target);
    if (tp.requires_grad(pred)) {
      Tensor& gp = tp.grad(pred);
      for (std::size_t i = 0; i < p.size(); ++i) gp[i] += g * (p[i] - y[i]);
    }
    if (tp.requires_grad(target)) {
      Tensor& gt = tp.grad(target);
      for (std::size_t i = 0; i < p.size(); ++i) gt[i] -= g * (p[i] - y[i]);
    }
  });
}

Var gather_rows(Tape& t, Parameter& table, std::span<const std::uint32_t> ids) {
  const Tensor& tv = table.value;
  require_matrix("gather_rows", tv);
  const std::size_t cols = tv.cols();
  Tensor out({ids.size(), cols});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= tv.rows())
      throw ShapeError("gather_rows: id " + std::to_string(ids[i]) + " out of range for table " + table.name +
                       " with " + std::to_string(tv.rows()) + " rows");
    for (std::size_t j = 0; j < cols; ++j) out.at(i, j) = tv.at(ids[i], j);
  }
  std::vector<std::uint32_t> idx(ids.begin(), ids.end());
  Parameter* target = &table;
  return t.record_leaf("gather_rows", std::move(out), !table.frozen,
                       [target, idx = std::move(idx), cols](Tape& tp, std::uint32_t self) {
                         const Tensor& g = tp.grad(self);
                         Tensor& gt = target->gradient;
                         for (std::size_t i = 0; i < idx.size(); ++i)
                           for (std::size_t j = 0; j < cols; ++j) gt[idx[i] * cols + j] += g[i * cols + j];
                       });
}

Var batchnorm_train(Tape& t, Var x, Var gamma, Var beta, double eps, std::vector<double>& batch_mean,
                    std::vector<double>& batch_var) {
  const Tensor& xv = t.value(x);
  require_matrix("batchnorm", xv);
  const std::size_t B = xv.rows(), F = xv.cols();
  if (t.value(gamma).size() != F || t.value(beta).size() != F) shape_fail("batchnorm", xv, t.value(gamma));
  if (B < 2) throw ShapeError("batchnorm: training mode needs a batch of at least 2, got " + std::to_string(B));
  const Tensor& gv = t.value(gamma);
  const Tensor& bv = t.value(beta);

  batch_mean.assign(F, 0.0);
  batch_var.assign(F, 0.0);
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t j = 0; j < F; ++j) batch_mean[j] += xv.at(i, j);
  for (auto& m : batch_mean) m /= static_cast<double>(B);
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t j = 0; j < F; ++j) {
      double d = xv.at(i, j) - batch_mean[j];
      batch_var[j] += d * d;
    }
  for (auto& v : batch_var) v /= static_cast<double>(B);

  Tensor xhat({B, F});
  std::vector<double> inv_std(F);
  for (std::size_t j = 0; j < F; ++j) inv_std[j] = 1.0 / std::sqrt(batch_var[j] + eps);
  Tensor out({B, F});
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t j = 0; j < F; ++j) {
      xhat.at(i, j) = (xv.at(i, j) - batch_mean[j]) * inv_std[j];
      out.at(i, j) = gv[j] * xhat.at(i, j) + bv[j];
    }

  return t.record("batchnorm_train", std::move(out), {x, gamma, beta},
                  [x, gamma, beta, B, F, xhat = std::move(xhat), inv_std](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    std::vector<double> sum_g(F, 0.0), sum_gx(F, 0.0);
                    for (std::size_t i = 0; i < B; ++i)
                      for (std::size_t j = 0; j < F; ++j) {
                        sum_g[j] += g[i * F + j];
                        sum_gx[j] += g[i * F + j] * xhat[i * F + j];
                      }
                    if (tp.requires_grad(beta)) {
                      Tensor& gb = tp.grad(beta);
                      for (std::size_t j = 0; j < F; ++j) gb[j] += sum_g[j];
                    }
                    if (tp.requires_grad(gamma)) {
                      Tensor& gg = tp.grad(gamma);
                      for (std::size_t j = 0; j < F; ++j) gg[j] += sum_gx[j];
                    }
                    if (tp.requires_grad(x)) {
                      const Tensor& gv2 = tp.value(gamma);
                      Tensor& gx = tp.grad(x);
                      const double n = static_cast<double>(B);
                      for (std::size_t i = 0; i < B; ++i)
                        for (std::size_t j = 0; j < F; ++j)
                          gx[i * F + j] += gv2[j] * inv_std[j] / n *
                                           (n * g[i * F + j] - sum_g[j] - xhat[i * F + j] * sum_gx[j]);
                    }
                  });
}

Var batchnorm_infer(Tape& t, Var x, Var gamma, Var beta, std::span<const double> mean,
                    std::span<const double> var, double eps) {
  const Tensor& xv = t.value(x);
  require_matrix("batchnorm", xv);
  const std::size_t B = xv.rows(), F = xv.cols();
  if (t.value(gamma).size() != F || t.value(beta).size() != F || mean.size() != F || var.size() != F)
    shape_fail("batchnorm", xv, t.value(gamma));
  const Tensor& gv = t.value(gamma);
  const Tensor& bv = t.value(beta);
  Tensor xhat({B, F});
  std::vector<double> inv_std(F);
  for (std::size_t j = 0; j < F; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + eps);
  Tensor out({B, F});
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t j = 0; j < F; ++j) {
      xhat.at(i, j) = (xv.at(i, j) - mean[j]) * inv_std[j];
      out.at(i, j) = gv[j] * xhat.at(i, j) + bv[j];
    }
  return t.record("batchnorm_infer", std::move(out), {x, gamma, beta},
                  [x, gamma, beta, B, F, xhat = std::move(xhat), inv_std](Tape& tp, std::uint32_t self) {
                    const Tensor& g = tp.grad(self);
                    const Tensor& gv2 = tp.value(gamma);
                    if (tp.requires_grad(beta)) {
                      Tensor& gb = tp.grad(beta);
                      for (std::size_t i = 0; i < B; ++i)
                        for (std::size_t j = 0; j < F; ++j) gb[j] += g[i * F + j];
                    }
                    if (tp.requires_grad(gamma)) {
                      Tensor& gg = tp.grad(gamma);
                      for (std::size_t i = 0; i < B; ++i)
                        for (std::size_t j = 0; j < F; ++j) gg[j] += g[i * F + j] * xhat[i * F + j];
                    }
                    if (tp.requires_grad(x)) {
                      Tensor& gx = tp.grad(x);
                      for (std::size_t i = 0; i < B; ++i)
                        for (std::size_t j = 0; j < F; ++j) gx[i * F + j] += g[i * F + j] * gv2[j] * inv_std[j];
                    }
                  });
}

}  // namespace whitebait::ops
