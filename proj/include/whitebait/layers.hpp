#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "whitebait/rng.hpp"
#include "whitebait/tape.hpp"
#include "whitebait/textprep.hpp"

namespace whitebait {

enum class Mode { train, infer };

// Non-trainable state saved alongside parameters (batchnorm running stats).
struct Buffer {
  std::string name;
  std::vector<double>* values;
};

struct EmbeddingTable {
  Parameter weights;  // [rows, embed_dim]

  // Uniform in [-0.05, 0.05].
  static EmbeddingTable make(const std::string& name, std::size_t rows, std::size_t embed_dim, Rng& rng);
  std::size_t rows() const { return weights.value.rows(); }
  std::size_t dim() const { return weights.value.cols(); }
  void collect(std::vector<Parameter*>& out) { out.push_back(&weights); }
};

// Row gather for every position of the sequence -> [max_len, embed_dim].
Var embed(Tape& t, EmbeddingTable& table, const EncodedSequence& ids);
// Row gather for a batch of ids -> [ids.size(), embed_dim].
Var embed_ids(Tape& t, EmbeddingTable& table, std::span<const std::uint32_t> ids);

// Gate blocks are packed column-wise in the order input, forget, output,
// candidate: w = [W_i W_f W_o W_g], u = [U_i U_f U_o U_g], b likewise.
struct LstmCell {
  enum Gate : std::size_t { input = 0, forget = 1, output = 2, candidate = 3 };

  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Parameter w;  // [input_dim, 4*hidden_dim]
  Parameter u;  // [hidden_dim, 4*hidden_dim]
  Parameter b;  // [4*hidden_dim], forget block initialized to +1

  static LstmCell make(const std::string& name, std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
  void collect(std::vector<Parameter*>& out) {
    out.push_back(&w);
    out.push_back(&u);
    out.push_back(&b);
  }
};

struct LstmState {
  Var h;  // [batch, hidden]
  Var c;  // [batch, hidden]
};

// One step over a batch of rows.
LstmState lstm_step(Tape& t, Var x, LstmState prev, LstmCell& cell);

// Runs a batch of sequences from the zero state. steps[k] holds the inputs of
// position k for every row ([batch, input_dim]); rows stop advancing once k
// reaches their length, so the result is the hidden state at each row's own
// length (zero for length 0). Only the first max(lengths) steps are read.
Var lstm_sequence(Tape& t, LstmCell& cell, const std::vector<Var>& steps, std::span<const std::size_t> lengths);

// Single sequence: xs is [max_len, input_dim]; returns [1, hidden_dim].
Var lstm_sequence(Tape& t, LstmCell& cell, Var xs, std::size_t true_length);

struct BatchNormLayer {
  Parameter gamma;  // [features]
  Parameter beta;   // [features]
  std::vector<double> running_mean;
  std::vector<double> running_var;
  // Number of running-stat updates so far, stored as a one-element buffer.
  std::vector<double> updates{0.0};
  double momentum = 0.99;
  double epsilon = 1e-5;

  static BatchNormLayer make(const std::string& name, std::size_t features);
  std::size_t features() const { return gamma.size(); }
  void collect(std::vector<Parameter*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
  }
  void collect_buffers(std::vector<Buffer>& out) {
    out.push_back({gamma.name.substr(0, gamma.name.rfind('.')) + ".running_mean", &running_mean});
    out.push_back({gamma.name.substr(0, gamma.name.rfind('.')) + ".running_var", &running_var});
    out.push_back({gamma.name.substr(0, gamma.name.rfind('.')) + ".updates", &updates});
  }
};

// train: batch statistics (batch >= 2, ShapeError otherwise) and a momentum
// update of the running statistics; infer: running statistics.
// The running statistics are bias-corrected exponential averages: after t
// updates each equals sum_k (1-m) m^(t-k) s_k / (1 - m^t), so the initial
// (0, 1) values only matter before the first training batch.
Var batchnorm(Tape& t, Var x, BatchNormLayer& layer, Mode mode);

struct DropoutLayer {
  double rate = 0.3;
};

// Inverted dropout. Identity in infer mode or at rate 0.
Var dropout(Tape& t, Var x, const DropoutLayer& layer, Mode mode, Rng& rng);
// Applies a caller-supplied mask (entries 0 or 1/(1-rate)).
Var dropout_with_mask(Tape& t, Var x, const Tensor& mask);
Tensor dropout_mask(const Shape& shape, double rate, Rng& rng);

enum class Activation { none, relu, sigmoid };

struct DenseLayer {
  Parameter w;  // [in, out]
  Parameter b;  // [out]
  Activation activation = Activation::none;

  // Glorot-uniform weights, zero bias.
  static DenseLayer make(const std::string& name, std::size_t in, std::size_t out, Activation act, Rng& rng);
  std::size_t in_dim() const { return w.value.rows(); }
  std::size_t out_dim() const { return w.value.cols(); }
  void collect(std::vector<Parameter*>& out) {
    out.push_back(&w);
    out.push_back(&b);
  }
};

Var dense(Tape& t, Var x, DenseLayer& layer);

}  // namespace whitebait
