#include "whitebait/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <json.hpp>

#include "whitebait/error.hpp"

namespace whitebait {

ClickbaitClass binarize(double score, double threshold) {
  return score > threshold ? ClickbaitClass::clickbait : ClickbaitClass::no_clickbait;
}

MetricsReport evaluate(std::span<const double> preds, std::span<const Truth> truths, double threshold) {
  if (preds.empty()) throw InputError("evaluate: no predictions");
  if (preds.size() != truths.size())
    throw InputError("evaluate: " + std::to_string(preds.size()) + " predictions for " +
                     std::to_string(truths.size()) + " truth records");
  for (double p : preds)
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("evaluate: prediction " + std::to_string(p) + " outside [0,1]");
  MetricsReport r;
  r.n = preds.size();
  double se = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - truths[i].mean;
    se += d * d;
    ae += std::abs(d);
    const bool predicted = binarize(preds[i], threshold) == ClickbaitClass::clickbait;
    const bool gold = truths[i].class_label == ClickbaitClass::clickbait;
    if (predicted && gold) ++r.confusion.tp;
    else if (predicted) ++r.confusion.fp;
    else if (gold) ++r.confusion.fn;
    else ++r.confusion.tn;
  }
  const auto n = static_cast<double>(r.n);
  r.mse = se / n;
  r.mae = ae / n;
  const auto& c = r.confusion;
  r.accuracy = static_cast<double>(c.tp + c.tn) / n;
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision && r.recall) {
    const double p = *r.precision, q = *r.recall;
    r.f1 = (p + q) > 0.0 ? 2.0 * p * q / (p + q) : 0.0;
  }
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["mse"] = mse;
  j["mae"] = mae;
  j["acc"] = accuracy;
  j["f1"] = opt(f1);
  j["precision"] = opt(precision);
  j["recall"] = opt(recall);
  j["n"] = n;
  j["tp"] = confusion.tp;
  j["fp"] = confusion.fp;
  j["fn"] = confusion.fn;
  j["tn"] = confusion.tn;
  return j.dump();
}

const char* to_string(MannWhitneyResult::Method m) {
  return m == MannWhitneyResult::Method::exact ? "exact" : "normal-approx";
}

namespace {

struct Ranked {
  // Twice the 1-based midrank of each pooled observation (integral).
  std::vector<std::int64_t> doubled_rank;
  std::vector<bool> from_a;
  // Sizes of the tie groups.
  std::vector<std::size_t> ties;
};

Ranked rank_pooled(std::span<const double> a, std::span<const double> b) {
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(a.size() + b.size());
  for (double x : a) pooled.emplace_back(x, true);
  for (double y : b) pooled.emplace_back(y, false);
  std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  Ranked out;
  out.doubled_rank.resize(pooled.size());
  out.from_a.resize(pooled.size());
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    // Positions i..j-1 share the midrank ((i+1) + j) / 2.
    for (std::size_t k = i; k < j; ++k) {
      out.doubled_rank[k] = static_cast<std::int64_t>(i + 1 + j);
      out.from_a[k] = pooled[k].second;
    }
    out.ties.push_back(j - i);
    i = j;
  }
  return out;
}

// Counts, over all C(N, n) ways of labelling n pooled observations as "a",
// how many give each doubled rank sum. Returns the two-sided p-value of the
// observed doubled rank sum.
double exact_p(const Ranked& ranked, std::size_t n, std::int64_t observed_2u, std::int64_t n_times_m) {
  const std::size_t N = ranked.doubled_rank.size();
  const std::int64_t max_sum = std::accumulate(ranked.doubled_rank.begin(), ranked.doubled_rank.end(), std::int64_t{0});
  const auto width = static_cast<std::size_t>(max_sum + 1);
  // ways[k * width + s]
  std::vector<double> ways((n + 1) * width, 0.0);
  ways[0] = 1.0;
  for (std::size_t e = 0; e < N; ++e) {
    const auto r = static_cast<std::size_t>(ranked.doubled_rank[e]);
    for (std::size_t k = std::min(n, e + 1); k >= 1; --k) {
      double* dst = &ways[k * width];
      const double* src = &ways[(k - 1) * width];
      for (std::size_t s = width; s-- > r;) dst[s] += src[s - r];
    }
  }
  const auto offset = static_cast<std::int64_t>(n * (n + 1));
  const std::int64_t observed_dev = std::llabs(observed_2u - n_times_m);
  double total = 0.0, extreme = 0.0;
  for (std::size_t s = 0; s < width; ++s) {
    const double w = ways[n * width + s];
    if (w == 0.0) continue;
    total += w;
    const std::int64_t two_u = static_cast<std::int64_t>(s) - offset;
    if (std::llabs(two_u - n_times_m) >= observed_dev) extreme += w;
  }
  return std::min(1.0, extreme / total);
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("mann_whitney_u: both samples must be non-empty");
  for (double v : a)
    if (std::isnan(v)) throw InputError("mann_whitney_u: NaN in sample");
  for (double v : b)
    if (std::isnan(v)) throw InputError("mann_whitney_u: NaN in sample");

  const std::size_t n = a.size(), m = b.size(), N = n + m;
  Ranked ranked = rank_pooled(a, b);
  std::int64_t doubled_rank_sum_a = 0;
  for (std::size_t k = 0; k < N; ++k)
    if (ranked.from_a[k]) doubled_rank_sum_a += ranked.doubled_rank[k];
  const auto offset = static_cast<std::int64_t>(n * (n + 1));
  const std::int64_t two_u_a = doubled_rank_sum_a - offset;
  const auto n_times_m = static_cast<std::int64_t>(n * m);

  MannWhitneyResult r;
  r.u_a = static_cast<double>(two_u_a) / 2.0;
  r.u_b = static_cast<double>(n_times_m) - r.u_a;

  if (N <= kExactMannWhitneyLimit) {
    r.method = MannWhitneyResult::Method::exact;
    r.p_two_sided = exact_p(ranked, n, two_u_a, n_times_m);
    return r;
  }

  r.method = MannWhitneyResult::Method::normal_approx;
  const double dn = static_cast<double>(n), dm = static_cast<double>(m), dN = static_cast<double>(N);
  double tie_term = 0.0;
  for (auto t : ranked.ties) {
    const double dt = static_cast<double>(t);
    tie_term += dt * dt * dt - dt;
  }
  const double var = dn * dm / 12.0 * ((dN + 1.0) - tie_term / (dN * (dN - 1.0)));
  const double mu = dn * dm / 2.0;
  if (var <= 0.0) {
    r.z = 0.0;
    r.p_two_sided = 1.0;
    return r;
  }
  const double dev = std::max(0.0, std::abs(r.u_a - mu) - 0.5);
  r.z = std::copysign(dev / std::sqrt(var), r.u_a - mu);
  r.p_two_sided = std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0)));
  return r;
}

}  // namespace whitebait
