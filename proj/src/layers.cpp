#include "whitebait/layers.hpp"

#include <algorithm>
#include <cmath>

#include "whitebait/error.hpp"
#include "whitebait/ops.hpp"

namespace whitebait {

namespace {

Tensor uniform_tensor(Shape shape, double limit, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

EmbeddingTable EmbeddingTable::make(const std::string& name, std::size_t rows, std::size_t embed_dim, Rng& rng) {
  return {Parameter(name + ".weights", uniform_tensor({rows, embed_dim}, 0.05, rng))};
}

Var embed(Tape& t, EmbeddingTable& table, const EncodedSequence& ids) {
  return ops::gather_rows(t, table.weights, ids.ids);
}

Var embed_ids(Tape& t, EmbeddingTable& table, std::span<const std::uint32_t> ids) {
  return ops::gather_rows(t, table.weights, ids);
}

LstmCell LstmCell::make(const std::string& name, std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  LstmCell cell;
  cell.input_dim = input_dim;
  cell.hidden_dim = hidden_dim;
  const std::size_t gates = 4 * hidden_dim;
  cell.w = Parameter(name + ".w", uniform_tensor({input_dim, gates}, glorot_limit(input_dim, gates), rng));
  cell.u = Parameter(name + ".u", uniform_tensor({hidden_dim, gates}, glorot_limit(hidden_dim, gates), rng));
  Tensor bias({gates});
  for (std::size_t j = 0; j < hidden_dim; ++j) bias[forget * hidden_dim + j] = 1.0;
  cell.b = Parameter(name + ".b", std::move(bias));
  return cell;
}

namespace {

struct LstmVars {
  Var w, u, b;
  std::size_t hidden;
};

LstmState step(Tape& t, Var x, LstmState prev, const LstmVars& p) {
  const std::size_t H = p.hidden;
  Var z = ops::add(t, ops::affine(t, x, p.w, p.b), ops::matmul(t, prev.h, p.u));
  Var i = ops::sigmoid(t, ops::slice_cols(t, z, LstmCell::input * H, (LstmCell::input + 1) * H));
  Var f = ops::sigmoid(t, ops::slice_cols(t, z, LstmCell::forget * H, (LstmCell::forget + 1) * H));
  Var o = ops::sigmoid(t, ops::slice_cols(t, z, LstmCell::output * H, (LstmCell::output + 1) * H));
  Var g = ops::tanh(t, ops::slice_cols(t, z, LstmCell::candidate * H, (LstmCell::candidate + 1) * H));
  Var c = ops::add(t, ops::mul(t, f, prev.c), ops::mul(t, i, g));
  Var h = ops::mul(t, o, ops::tanh(t, c));
  return {h, c};
}

LstmVars bind(Tape& t, LstmCell& cell) {
  return {t.param(cell.w), t.param(cell.u), t.param(cell.b), cell.hidden_dim};
}

}  // namespace

LstmState lstm_step(Tape& t, Var x, LstmState prev, LstmCell& cell) {
  return step(t, x, prev, bind(t, cell));
}

Var lstm_sequence(Tape& t, LstmCell& cell, const std::vector<Var>& steps, std::span<const std::size_t> lengths) {
  const std::size_t B = lengths.size();
  const std::size_t H = cell.hidden_dim;
  const std::size_t longest = lengths.empty() ? 0 : *std::max_element(lengths.begin(), lengths.end());
  if (longest > steps.size())
    throw ShapeError("lstm_sequence: length " + std::to_string(longest) + " exceeds " +
                     std::to_string(steps.size()) + " steps");

  LstmState state{t.constant(Tensor({B, H})), t.constant(Tensor({B, H}))};
  if (longest == 0) return state.h;
  const LstmVars vars = bind(t, cell);
  for (std::size_t k = 0; k < longest; ++k) {
    LstmState next = step(t, steps[k], state, vars);
    const bool all_active = std::all_of(lengths.begin(), lengths.end(), [k](std::size_t n) { return n > k; });
    if (all_active) {
      state = next;
      continue;
    }
    // Rows past their length keep their previous state exactly.
    Tensor keep({B, H}), advance({B, H});
    for (std::size_t r = 0; r < B; ++r) {
      const double a = lengths[r] > k ? 1.0 : 0.0;
      for (std::size_t j = 0; j < H; ++j) {
        advance.at(r, j) = a;
        keep.at(r, j) = 1.0 - a;
      }
    }
    Var advance_v = t.constant(std::move(advance));
    Var keep_v = t.constant(std::move(keep));
    state.h = ops::add(t, ops::mul(t, next.h, advance_v), ops::mul(t, state.h, keep_v));
    state.c = ops::add(t, ops::mul(t, next.c, advance_v), ops::mul(t, state.c, keep_v));
  }
  return state.h;
}

Var lstm_sequence(Tape& t, LstmCell& cell, Var xs, std::size_t true_length) {
  const Tensor& xv = t.value(xs);
  if (xv.rank() != 2 || xv.cols() != cell.input_dim)
    throw ShapeError("lstm_sequence: expected [max_len, " + std::to_string(cell.input_dim) + "], got " +
                     shape_string(xv.shape()));
  if (true_length > xv.rows())
    throw ShapeError("lstm_sequence: true_length " + std::to_string(true_length) + " > max_len " +
                     std::to_string(xv.rows()));
  std::vector<Var> steps;
  for (std::size_t k = 0; k < true_length; ++k) steps.push_back(ops::slice_rows(t, xs, k, k + 1));
  const std::size_t len[1] = {true_length};
  return lstm_sequence(t, cell, steps, len);
}

BatchNormLayer BatchNormLayer::make(const std::string& name, std::size_t features) {
  BatchNormLayer layer;
  layer.gamma = Parameter(name + ".gamma", Tensor({features}, 1.0));
  layer.beta = Parameter(name + ".beta", Tensor({features}, 0.0));
  layer.running_mean.assign(features, 0.0);
  layer.running_var.assign(features, 1.0);
  return layer;
}

Var batchnorm(Tape& t, Var x, BatchNormLayer& layer, Mode mode) {
  Var gamma = t.param(layer.gamma);
  Var beta = t.param(layer.beta);
  if (mode == Mode::infer)
    return ops::batchnorm_infer(t, x, gamma, beta, layer.running_mean, layer.running_var, layer.epsilon);
  std::vector<double> mean, var;
  Var y = ops::batchnorm_train(t, x, gamma, beta, layer.epsilon, mean, var);
  const double m = layer.momentum;
  const double t_new = layer.updates[0] + 1.0;
  const double w = (1.0 - m) / (1.0 - std::pow(m, t_new));
  for (std::size_t j = 0; j < mean.size(); ++j) {
    layer.running_mean[j] = (1.0 - w) * layer.running_mean[j] + w * mean[j];
    layer.running_var[j] = (1.0 - w) * layer.running_var[j] + w * var[j];
  }
  layer.updates[0] = t_new;
  return y;
}

Tensor dropout_mask(const Shape& shape, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InputError("dropout rate must be in [0,1)");
  Tensor mask(shape);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& v : mask.values()) v = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

Var dropout_with_mask(Tape& t, Var x, const Tensor& mask) {
  return ops::mul(t, x, t.constant(mask));
}

Var dropout(Tape& t, Var x, const DropoutLayer& layer, Mode mode, Rng& rng) {
  if (mode == Mode::infer || layer.rate == 0.0) return x;
  return dropout_with_mask(t, x, dropout_mask(t.value(x).shape(), layer.rate, rng));
}

DenseLayer DenseLayer::make(const std::string& name, std::size_t in, std::size_t out, Activation act, Rng& rng) {
  DenseLayer layer;
  layer.w = Parameter(name + ".w", uniform_tensor({in, out}, glorot_limit(in, out), rng));
  layer.b = Parameter(name + ".b", Tensor({out}));
  layer.activation = act;
  return layer;
}

Var dense(Tape& t, Var x, DenseLayer& layer) {
  Var z = ops::affine(t, x, t.param(layer.w), t.param(layer.b));
  switch (layer.activation) {
    case Activation::relu:
      return ops::relu(t, z);
    case Activation::sigmoid:
      return ops::sigmoid(t, z);
    case Activation::none:
      break;
  }
  return z;
}

}  // namespace whitebait
