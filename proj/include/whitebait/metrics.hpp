#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whitebait/corpus.hpp"

namespace whitebait {

inline constexpr double kDefaultThreshold = 0.5;

// Clickbait iff score > threshold (strict).
ClickbaitClass binarize(double score, double threshold = kDefaultThreshold);

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  bool operator==(const Confusion&) const = default;
};

struct MetricsReport {
  std::size_t n = 0;
  double mse = 0.0;
  double mae = 0.0;
  double accuracy = 0.0;
  // Empty when the denominator is zero; F1 is empty when either precision or
  // recall is.
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  Confusion confusion;

  // {"mse":..,"mae":..,"acc":..,"f1":..|null,"precision":..,"recall":..,
  //  "n":..,"tp":..,"fp":..,"fn":..,"tn":..}
  std::string to_json() const;
};

// Regression errors against truth means; classification against the gold
// class labels. Throws InputError on empty input or a length mismatch.
MetricsReport evaluate(std::span<const double> preds, std::span<const Truth> truths,
                       double threshold = kDefaultThreshold);

struct MannWhitneyResult {
  enum class Method { exact, normal_approx };

  double u_a = 0.0;  // #{x > y} + 0.5 #{x == y}, x from a, y from b
  double u_b = 0.0;
  double z = 0.0;    // 0 for the exact method
  double p_two_sided = 1.0;
  Method method = Method::exact;
};

const char* to_string(MannWhitneyResult::Method m);

// Exact permutation p-value (conditional on ties) when |a|+|b| <= 14,
// otherwise the normal approximation with tie-corrected variance and a 0.5
// continuity correction.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kExactMannWhitneyLimit = 14;

}  // namespace whitebait
