#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "whitebait/tape.hpp"

// Differentiable primitives. Each records its result on the tape together
// with the closure that propagates gradients to its inputs. Shape mismatches
// throw ShapeError naming the op and the offending shapes.
namespace whitebait::ops {

// [m,k] x [k,n] -> [m,n]
Var matmul(Tape& t, Var a, Var b);
// x[B,in] * w[in,out] + b[out], bias broadcast over rows
Var affine(Tape& t, Var x, Var w, Var b);

Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double factor);

Var sigmoid(Tape& t, Var a);
Var tanh(Tape& t, Var a);
Var relu(Tape& t, Var a);

// Column-wise concatenation of [B, n_i] blocks.
Var concat_cols(Tape& t, const std::vector<Var>& parts);
// Columns [begin, end) of a [B, n] matrix.
Var slice_cols(Tape& t, Var a, std::size_t begin, std::size_t end);

// Rows [begin, end) of a [n, k] matrix.
Var slice_rows(Tape& t, Var a, std::size_t begin, std::size_t end);

// Mean over all elements -> scalar.
Var mean(Tape& t, Var a);
// Mean squared error over all elements -> scalar.
Var mse(Tape& t, Var pred, Var target);

// Rows of `table` selected by ids -> [ids.size(), cols]. Gradients scatter
// straight into table.gradient (accumulating for repeated ids).
Var gather_rows(Tape& t, Parameter& table, std::span<const std::uint32_t> ids);

// Per-column standardization with batch statistics followed by
// gamma * xhat + beta. Biased batch variance. Writes the batch statistics
// to batch_mean / batch_var for the caller's running averages.
Var batchnorm_train(Tape& t, Var x, Var gamma, Var beta, double eps, std::vector<double>& batch_mean,
                    std::vector<double>& batch_var);
// Same affine map with fixed statistics.
Var batchnorm_infer(Tape& t, Var x, Var gamma, Var beta, std::span<const double> mean,
                    std::span<const double> var, double eps);

}  // namespace whitebait::ops
