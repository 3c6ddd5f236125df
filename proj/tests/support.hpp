#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "whitebait/corpus.hpp"
#include "whitebait/ops.hpp"
#include "whitebait/rng.hpp"
#include "whitebait/tape.hpp"

namespace wbtest {

using namespace whitebait;

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
  Tensor t(shape);
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Reduces any tensor-valued output to a scalar with fixed random weights so
// every output element contributes a distinct gradient.
inline Var weighted_sum(Tape& t, Var out, Rng& rng) {
  Tensor w(t.value(out).shape());
  for (auto& v : w.values()) v = rng.uniform(-1.0, 1.0);
  Var prod = ops::mul(t, out, t.constant(std::move(w)));
  return ops::scale(t, ops::mean(t, prod), static_cast<double>(t.value(out).size()));
}

// Builds the scalar loss on a fresh tape from the given parameters.
using LossFn = std::function<Var(Tape&)>;

inline double evaluate_loss(const LossFn& f) {
  Tape t;
  Var loss = f(t);
  return t.value(loss)[0];
}

// Relative error between the tape gradient and central finite differences,
// ||analytic - numeric|| / (||analytic|| + ||numeric||), maximised over the
// parameters. Both gradients zero counts as agreement.
inline double gradient_check(const std::vector<Parameter*>& params, const LossFn& f, double step = 1e-5) {
  for (auto* p : params) p->zero_grad();
  {
    Tape t;
    Var loss = f(t);
    t.backward(loss);
  }
  double worst = 0.0;
  for (auto* p : params) {
    double diff2 = 0.0, an2 = 0.0, nu2 = 0.0;
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + step;
      const double up = evaluate_loss(f);
      p->value[i] = orig - step;
      const double down = evaluate_loss(f);
      p->value[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p->gradient[i];
      diff2 += (analytic - numeric) * (analytic - numeric);
      an2 += analytic * analytic;
      nu2 += numeric * numeric;
    }
    const double denom = std::sqrt(an2) + std::sqrt(nu2);
    const double rel = denom == 0.0 ? 0.0 : std::sqrt(diff2) / denom;
    worst = std::max(worst, rel);
  }
  return worst;
}

inline Truth make_truth(const std::string& id, const std::vector<double>& judgments) {
  Truth t;
  t.id = id;
  t.judgments = judgments;
  double sum = 0.0;
  for (double j : judgments) sum += j;
  t.mean = sum / static_cast<double>(judgments.size());
  std::vector<double> sorted = judgments;
  std::sort(sorted.begin(), sorted.end());
  t.median = sorted[sorted.size() / 2];
  t.mode = t.median;
  t.class_label = t.mean >= 0.5 ? ClickbaitClass::clickbait : ClickbaitClass::no_clickbait;
  return t;
}

// Five judgments on the four-level scale whose mean is as close as possible
// to `score`.
inline std::vector<double> judgments_for(double score) {
  static const double levels[] = {0.0, 0.33, 0.66, 1.0};
  std::vector<double> best;
  double best_err = 1e9;
  std::vector<int> idx(5, 0);
  // Non-decreasing level indices cover every multiset of five levels.
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b)
      for (int c = b; c < 4; ++c)
        for (int d = c; d < 4; ++d)
          for (int e = d; e < 4; ++e) {
            const double m = (levels[a] + levels[b] + levels[c] + levels[d] + levels[e]) / 5.0;
            if (std::abs(m - score) < best_err) {
              best_err = std::abs(m - score);
              best = {levels[a], levels[b], levels[c], levels[d], levels[e]};
            }
          }
  return best;
}

inline void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l << "\n";
}

inline void write_dataset(const std::filesystem::path& dir, const std::vector<Instance>& instances,
                          const std::vector<Truth>& truths) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> a, b;
  for (const auto& i : instances) a.push_back(instance_to_json(i));
  for (const auto& t : truths) b.push_back(truth_to_json(t));
  write_lines(dir / "instances.jsonl", a);
  write_lines(dir / "truth.jsonl", b);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Twitter-style timestamp at the given UTC hour.
inline std::string twitter_time(int hour, int minute = 7) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "Sat Feb 27 %02d:%02d:41 +0000 2016", hour, minute);
  return buf;
}

// Small labeled corpus: headlines built from a shared word pool, with the
// score driven by the presence of "shocking" and a late-evening hour.
inline void make_corpus(std::size_t n, std::uint64_t seed, std::vector<Instance>& instances,
                        std::vector<Truth>& truths) {
  static const char* pool[] = {"you", "will", "never", "believe", "this", "city", "council", "votes",
                               "on", "budget", "new", "study", "finds", "coffee", "is", "good"};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    inst.id = "p" + std::to_string(1000 + i);
    const bool hook = rng.below(2) == 1;
    std::string text = hook ? "Shocking" : "Report:";
    const std::size_t words = 3 + rng.below(5);
    for (std::size_t w = 0; w < words; ++w) text += std::string(" ") + pool[rng.below(16)];
    inst.post_text = text;
    const int hour = static_cast<int>(rng.below(24));
    inst.post_timestamp = twitter_time(hour);
    inst.target_title = "Title " + std::string(pool[rng.below(16)]) + " " + pool[rng.below(16)];
    inst.target_description = "Description about " + std::string(pool[rng.below(16)]);
    inst.target_keywords = std::string(pool[rng.below(16)]) + " " + pool[rng.below(16)];
    inst.target_paragraphs = "First paragraph " + std::string(pool[rng.below(16)]) + " second paragraph";
    const double score = (hook ? 0.6 : 0.1) + (hour >= 18 ? 0.3 : 0.0);
    truths.push_back(make_truth(inst.id, judgments_for(score)));
    instances.push_back(std::move(inst));
  }
}

}  // namespace wbtest
