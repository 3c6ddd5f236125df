#pragma once

// Finite-difference gradient cases for every differentiable primitive and
// layer. Each case draws a fresh random instance (inputs in [-2, 2]) and
// returns the relative error reported by wbtest::gradient_check.

#include <functional>
#include <string>
#include <vector>

#include "support.hpp"
#include "whitebait/layers.hpp"

namespace wbtest {

struct GradCase {
  std::string name;
  std::function<double(Rng&)> run;
};

inline Parameter rand_param(const std::string& name, const Shape& shape, Rng& rng) {
  return Parameter(name, random_tensor(shape, rng));
}

inline std::size_t dim(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

inline std::vector<GradCase> primitive_cases() {
  std::vector<GradCase> cases;

  cases.push_back({"matmul", [](Rng& rng) {
                     auto m = dim(rng, 1, 4), k = dim(rng, 1, 5), n = dim(rng, 1, 4);
                     auto a = rand_param("a", {m, k}, rng), b = rand_param("b", {k, n}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&a, &b}, [&](Tape& t) {
                       Rng w = wr;
                       return weighted_sum(t, ops::matmul(t, t.param(a), t.param(b)), w);
                     });
                   }});
  cases.push_back({"affine", [](Rng& rng) {
                     auto m = dim(rng, 1, 4), k = dim(rng, 1, 5), n = dim(rng, 1, 4);
                     auto x = rand_param("x", {m, k}, rng), w = rand_param("w", {k, n}, rng),
                          b = rand_param("b", {n}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x, &w, &b}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, ops::affine(t, t.param(x), t.param(w), t.param(b)), r);
                     });
                   }});

  auto binary = [&](const std::string& name, Var (*op)(Tape&, Var, Var)) {
    cases.push_back({name, [op](Rng& rng) {
                       auto m = dim(rng, 1, 4), n = dim(rng, 1, 5);
                       auto a = rand_param("a", {m, n}, rng), b = rand_param("b", {m, n}, rng);
                       Rng wr(rng.next_u64());
                       return gradient_check({&a, &b}, [&](Tape& t) {
                         Rng r = wr;
                         return weighted_sum(t, op(t, t.param(a), t.param(b)), r);
                       });
                     }});
  };
  binary("add", &ops::add);
  binary("sub", &ops::sub);
  binary("mul", &ops::mul);

  cases.push_back({"mul(x,x)", [](Rng& rng) {
                     auto x = rand_param("x", {dim(rng, 1, 3), dim(rng, 1, 3)}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x}, [&](Tape& t) {
                       Rng r = wr;
                       Var v = t.param(x);
                       return weighted_sum(t, ops::mul(t, v, v), r);
                     });
                   }});

  cases.push_back({"scale", [](Rng& rng) {
                     auto x = rand_param("x", {dim(rng, 1, 3), dim(rng, 1, 4)}, rng);
                     const double f = rng.uniform(-2.0, 2.0);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, ops::scale(t, t.param(x), f), r);
                     });
                   }});

  auto unary = [&](const std::string& name, Var (*op)(Tape&, Var)) {
    cases.push_back({name, [op](Rng& rng) {
                       auto x = rand_param("x", {dim(rng, 1, 4), dim(rng, 1, 4)}, rng);
                       Rng wr(rng.next_u64());
                       return gradient_check({&x}, [&](Tape& t) {
                         Rng r = wr;
                         return weighted_sum(t, op(t, t.param(x)), r);
                       });
                     }});
  };
  unary("sigmoid", &ops::sigmoid);
  unary("tanh", &ops::tanh);
  unary("relu", &ops::relu);

  cases.push_back({"concat_cols", [](Rng& rng) {
                     auto m = dim(rng, 1, 4);
                     auto a = rand_param("a", {m, dim(rng, 1, 3)}, rng), b = rand_param("b", {m, dim(rng, 1, 3)}, rng),
                          c = rand_param("c", {m, dim(rng, 1, 3)}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&a, &b, &c}, [&](Tape& t) {
                       Rng r = wr;
                       Var va = t.param(a);
                       // `a` appears twice to exercise accumulation through concat.
                       return weighted_sum(t, ops::concat_cols(t, {va, t.param(b), t.param(c), va}), r);
                     });
                   }});
  cases.push_back({"slice_cols", [](Rng& rng) {
                     auto n = dim(rng, 2, 6);
                     auto x = rand_param("x", {dim(rng, 1, 4), n}, rng);
                     auto begin = rng.below(n - 1);
                     auto end = begin + 1 + rng.below(n - begin - 1);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, ops::slice_cols(t, t.param(x), begin, end), r);
                     });
                   }});
  cases.push_back({"slice_rows", [](Rng& rng) {
                     auto n = dim(rng, 2, 6);
                     auto x = rand_param("x", {n, dim(rng, 1, 4)}, rng);
                     auto begin = rng.below(n - 1);
                     auto end = begin + 1 + rng.below(n - begin - 1);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, ops::slice_rows(t, t.param(x), begin, end), r);
                     });
                   }});
  cases.push_back({"mean", [](Rng& rng) {
                     auto x = rand_param("x", {dim(rng, 1, 4), dim(rng, 1, 4)}, rng);
                     return gradient_check({&x}, [&](Tape& t) { return ops::mean(t, t.param(x)); });
                   }});
  cases.push_back({"mse", [](Rng& rng) {
                     auto m = dim(rng, 1, 5);
                     auto p = rand_param("p", {m, 1}, rng), y = rand_param("y", {m, 1}, rng);
                     return gradient_check({&p, &y}, [&](Tape& t) { return ops::mse(t, t.param(p), t.param(y)); });
                   }});
  cases.push_back({"gather_rows", [](Rng& rng) {
                     auto rows = dim(rng, 2, 6);
                     auto table = rand_param("table", {rows, dim(rng, 1, 4)}, rng);
                     std::vector<std::uint32_t> ids;
                     for (std::size_t i = 0; i < dim(rng, 1, 6); ++i) ids.push_back(static_cast<std::uint32_t>(rng.below(rows)));
                     Rng wr(rng.next_u64());
                     return gradient_check({&table}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, ops::gather_rows(t, table, ids), r);
                     });
                   }});
  cases.push_back({"batchnorm_train", [](Rng& rng) {
                     auto b = dim(rng, 2, 6), f = dim(rng, 1, 4);
                     auto x = rand_param("x", {b, f}, rng), g = rand_param("g", {f}, rng),
                          be = rand_param("be", {f}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x, &g, &be}, [&](Tape& t) {
                       Rng r = wr;
                       std::vector<double> bm, bv;
                       return weighted_sum(t, ops::batchnorm_train(t, t.param(x), t.param(g), t.param(be), 1e-5, bm, bv), r);
                     });
                   }});
  cases.push_back({"batchnorm_infer", [](Rng& rng) {
                     auto b = dim(rng, 1, 5), f = dim(rng, 1, 4);
                     auto x = rand_param("x", {b, f}, rng), g = rand_param("g", {f}, rng),
                          be = rand_param("be", {f}, rng);
                     std::vector<double> mean(f), var(f);
                     for (auto& v : mean) v = rng.uniform(-1, 1);
                     for (auto& v : var) v = rng.uniform(0.1, 2);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x, &g, &be}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, ops::batchnorm_infer(t, t.param(x), t.param(g), t.param(be), mean, var, 1e-5), r);
                     });
                   }});
  cases.push_back({"composite 3-layer", [](Rng& rng) {
                     auto b = dim(rng, 2, 4), in = dim(rng, 2, 4), h1 = dim(rng, 2, 4), h2 = dim(rng, 2, 4);
                     auto x = rand_param("x", {b, in}, rng);
                     auto w1 = rand_param("w1", {in, h1}, rng), b1 = rand_param("b1", {h1}, rng);
                     auto w2 = rand_param("w2", {h1, h2}, rng), b2 = rand_param("b2", {h2}, rng);
                     auto w3 = rand_param("w3", {h2, 1}, rng), b3 = rand_param("b3", {1}, rng);
                     auto y = random_tensor({b, 1}, rng, 0.0, 1.0);
                     return gradient_check({&x, &w1, &b1, &w2, &b2, &w3, &b3}, [&](Tape& t) {
                       Var a1 = ops::tanh(t, ops::affine(t, t.param(x), t.param(w1), t.param(b1)));
                       Var a2 = ops::relu(t, ops::affine(t, a1, t.param(w2), t.param(b2)));
                       Var out = ops::sigmoid(t, ops::affine(t, a2, t.param(w3), t.param(b3)));
                       return ops::mse(t, out, t.constant(y));
                     });
                   }});
  return cases;
}

inline std::vector<GradCase> layer_cases() {
  std::vector<GradCase> cases;

  cases.push_back({"embed", [](Rng& rng) {
                     auto rows = dim(rng, 3, 8), e = dim(rng, 1, 4), len = dim(rng, 1, 6);
                     EmbeddingTable table{rand_param("emb", {rows, e}, rng)};
                     EncodedSequence seq;
                     seq.true_length = len;
                     for (std::size_t i = 0; i < len + 2; ++i)
                       seq.ids.push_back(i < len ? static_cast<std::uint32_t>(rng.below(rows)) : 0u);
                     Rng wr(rng.next_u64());
                     return gradient_check({&table.weights}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, embed(t, table, seq), r);
                     });
                   }});
  cases.push_back({"lstm_step", [](Rng& rng) {
                     auto b = dim(rng, 1, 3), in = dim(rng, 1, 4), h = dim(rng, 1, 4);
                     Rng init(rng.next_u64());
                     LstmCell cell = LstmCell::make("lstm", in, h, init);
                     cell.w.value = random_tensor(cell.w.value.shape(), rng);
                     cell.u.value = random_tensor(cell.u.value.shape(), rng);
                     cell.b.value = random_tensor(cell.b.value.shape(), rng);
                     auto x = rand_param("x", {b, in}, rng), h0 = rand_param("h0", {b, h}, rng),
                          c0 = rand_param("c0", {b, h}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&cell.w, &cell.u, &cell.b, &x, &h0, &c0}, [&](Tape& t) {
                       Rng r = wr;
                       LstmState s = lstm_step(t, t.param(x), {t.param(h0), t.param(c0)}, cell);
                       return weighted_sum(t, ops::concat_cols(t, {s.h, s.c}), r);
                     });
                   }});
  cases.push_back({"lstm_sequence", [](Rng& rng) {
                     auto in = dim(rng, 1, 3), h = dim(rng, 1, 3), max_len = dim(rng, 2, 5);
                     auto len = rng.below(max_len + 1);
                     if (len == 0) len = 1;
                     Rng init(rng.next_u64());
                     LstmCell cell = LstmCell::make("lstm", in, h, init);
                     cell.w.value = random_tensor(cell.w.value.shape(), rng, -1.0, 1.0);
                     cell.u.value = random_tensor(cell.u.value.shape(), rng, -1.0, 1.0);
                     cell.b.value = random_tensor(cell.b.value.shape(), rng, -1.0, 1.0);
                     auto xs = rand_param("xs", {max_len, in}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&cell.w, &cell.u, &cell.b, &xs}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, lstm_sequence(t, cell, t.param(xs), len), r);
                     });
                   }});
  cases.push_back({"lstm_sequence batched", [](Rng& rng) {
                     auto b = dim(rng, 2, 3), in = dim(rng, 1, 3), h = dim(rng, 1, 3), steps = dim(rng, 1, 4);
                     Rng init(rng.next_u64());
                     LstmCell cell = LstmCell::make("lstm", in, h, init);
                     cell.w.value = random_tensor(cell.w.value.shape(), rng, -1.0, 1.0);
                     cell.u.value = random_tensor(cell.u.value.shape(), rng, -1.0, 1.0);
                     std::vector<Parameter> xs;
                     for (std::size_t k = 0; k < steps; ++k) xs.push_back(rand_param("x" + std::to_string(k), {b, in}, rng));
                     std::vector<std::size_t> lengths;
                     for (std::size_t i = 0; i < b; ++i) lengths.push_back(rng.below(steps + 1));
                     std::vector<Parameter*> params{&cell.w, &cell.u, &cell.b};
                     for (auto& p : xs) params.push_back(&p);
                     Rng wr(rng.next_u64());
                     return gradient_check(params, [&](Tape& t) {
                       Rng r = wr;
                       std::vector<Var> vs;
                       for (auto& p : xs) vs.push_back(t.param(p));
                       Var hN = lstm_sequence(t, cell, vs, lengths);
                       // Keeps the loss connected to the graph when every length is zero.
                       Var extra = ops::scale(t, ops::mean(t, ops::mul(t, vs[0], vs[0])), 1e-3);
                       return ops::add(t, weighted_sum(t, hN, r), extra);
                     });
                   }});
  cases.push_back({"batchnorm layer (train)", [](Rng& rng) {
                     auto b = dim(rng, 2, 6), f = dim(rng, 1, 4);
                     BatchNormLayer layer = BatchNormLayer::make("bn", f);
                     layer.gamma.value = random_tensor({f}, rng);
                     layer.beta.value = random_tensor({f}, rng);
                     auto x = rand_param("x", {b, f}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x, &layer.gamma, &layer.beta}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, batchnorm(t, t.param(x), layer, Mode::train), r);
                     });
                   }});
  cases.push_back({"batchnorm layer (infer)", [](Rng& rng) {
                     auto b = dim(rng, 1, 6), f = dim(rng, 1, 4);
                     BatchNormLayer layer = BatchNormLayer::make("bn", f);
                     layer.gamma.value = random_tensor({f}, rng);
                     for (auto& v : layer.running_mean) v = rng.uniform(-1, 1);
                     for (auto& v : layer.running_var) v = rng.uniform(0.2, 2);
                     auto x = rand_param("x", {b, f}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x, &layer.gamma, &layer.beta}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, batchnorm(t, t.param(x), layer, Mode::infer), r);
                     });
                   }});
  for (auto act : {Activation::none, Activation::relu, Activation::sigmoid}) {
    const std::string name = act == Activation::none ? "dense(none)" : act == Activation::relu ? "dense(relu)" : "dense(sigmoid)";
    cases.push_back({name, [act](Rng& rng) {
                       auto b = dim(rng, 1, 4), in = dim(rng, 1, 4), out = dim(rng, 1, 4);
                       Rng init(rng.next_u64());
                       DenseLayer layer = DenseLayer::make("d", in, out, act, init);
                       layer.b.value = random_tensor({out}, rng);
                       auto x = rand_param("x", {b, in}, rng);
                       Rng wr(rng.next_u64());
                       return gradient_check({&x, &layer.w, &layer.b}, [&](Tape& t) {
                         Rng r = wr;
                         return weighted_sum(t, dense(t, t.param(x), layer), r);
                       });
                     }});
  }
  cases.push_back({"dropout (frozen mask)", [](Rng& rng) {
                     auto b = dim(rng, 1, 4), f = dim(rng, 1, 5);
                     Tensor mask = dropout_mask({b, f}, 0.3, rng);
                     auto x = rand_param("x", {b, f}, rng);
                     Rng wr(rng.next_u64());
                     return gradient_check({&x}, [&](Tape& t) {
                       Rng r = wr;
                       return weighted_sum(t, dropout_with_mask(t, t.param(x), mask), r);
                     });
                   }});
  cases.push_back({"dropout (rate 0)", [](Rng& rng) {
                     auto x = rand_param("x", {dim(rng, 1, 4), dim(rng, 1, 4)}, rng);
                     Rng wr(rng.next_u64());
                     Rng drop(rng.next_u64());
                     return gradient_check({&x}, [&](Tape& t) {
                       Rng r = wr;
                       Rng d = drop;
                       return weighted_sum(t, dropout(t, t.param(x), DropoutLayer{0.0}, Mode::train, d), r);
                     });
                   }});
  return cases;
}

}  // namespace wbtest
