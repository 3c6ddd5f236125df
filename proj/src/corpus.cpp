#include "whitebait/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "whitebait/error.hpp"
#include "whitebait/log.hpp"

namespace whitebait {

using nlohmann::json;

const char* to_string(ClickbaitClass c) {
  return c == ClickbaitClass::clickbait ? "clickbait" : "no-clickbait";
}

namespace {

constexpr double kLevelTolerance = 1e-6;
constexpr double kMeanTolerance = 1e-2;

// Text fields come as either a string or a list of strings.
std::string text_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array()) {
    std::string out;
    bool first = true;
    for (const auto& part : *it) {
      if (!part.is_string()) throw InputError(std::string("non-string element in ") + key);
      if (!first) out += ' ';
      out += part.get<std::string>();
      first = false;
    }
    return out;
  }
  throw InputError(std::string("field ") + key + " must be a string or list of strings");
}

std::string id_field(const json& obj) {
  auto it = obj.find("id");
  if (it == obj.end() || it->is_null()) throw InputError("missing id");
  std::string id = it->is_string() ? it->get<std::string>() : it->dump();
  if (id.empty()) throw InputError("empty id");
  return id;
}

bool is_judgment_level(double v) {
  // Challenge files code the middle levels as 0.33/0.66 or as 1/3 and 2/3.
  static constexpr double levels[] = {0.0, 0.33, 0.66, 1.0, 1.0 / 3.0, 2.0 / 3.0};
  return std::any_of(std::begin(levels), std::end(levels),
                     [v](double l) { return std::abs(v - l) <= kLevelTolerance; });
}

double number_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw InputError(std::string("missing numeric field ") + key);
  return it->get<double>();
}

template <typename Fn>
void for_each_line(std::istream& in, const std::string& source_name, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source_name, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(source_name, line_no, "expected a JSON object");
    try {
      fn(obj);
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(source_name, line_no, e.what());
    } catch (const json::exception& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<Instance> parse_instances(std::istream& in, const std::string& source_name) {
  std::vector<Instance> out;
  std::set<std::string> seen;
  for_each_line(in, source_name, [&](const json& obj) {
    Instance inst;
    inst.id = id_field(obj);
    if (!seen.insert(inst.id).second) throw InputError("duplicate id " + inst.id);
    inst.post_text = text_field(obj, "postText");
    if (auto it = obj.find("postTimestamp"); it != obj.end() && it->is_string())
      inst.post_timestamp = it->get<std::string>();
    inst.target_title = text_field(obj, "targetTitle");
    inst.target_description = text_field(obj, "targetDescription");
    inst.target_keywords = text_field(obj, "targetKeywords");
    inst.target_paragraphs = text_field(obj, "targetParagraphs");
    if (auto it = obj.find("postMedia"); it != obj.end() && it->is_array()) {
      for (const auto& m : *it)
        if (m.is_string()) inst.media_paths.push_back(m.get<std::string>());
    }
    out.push_back(std::move(inst));
  });
  return out;
}

std::vector<Instance> load_instances(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_instances(in, path.string());
}

std::map<std::string, Truth> parse_truth(std::istream& in, const std::string& source_name) {
  std::map<std::string, Truth> out;
  for_each_line(in, source_name, [&](const json& obj) {
    Truth t;
    t.id = id_field(obj);
    auto judgments = obj.find("truthJudgments");
    if (judgments == obj.end() || !judgments->is_array())
      throw InputError("missing truthJudgments");
    for (const auto& j : *judgments) {
      if (!j.is_number()) throw InputError("non-numeric judgment");
      double v = j.get<double>();
      if (!is_judgment_level(v)) throw InputError("judgment " + j.dump() + " is not one of 0, 0.33, 0.66, 1");
      t.judgments.push_back(v);
    }
    if (t.judgments.size() != 5)
      throw InputError("expected 5 judgments, got " + std::to_string(t.judgments.size()));
    t.mean = number_field(obj, "truthMean");
    t.median = number_field(obj, "truthMedian");
    t.mode = number_field(obj, "truthMode");
    double computed = 0.0;
    for (double v : t.judgments) computed += v;
    computed /= static_cast<double>(t.judgments.size());
    if (std::abs(computed - t.mean) > kMeanTolerance)
      throw InputError("truthMean " + std::to_string(t.mean) + " disagrees with judgments (" +
                       std::to_string(computed) + ")");
    if (t.mean < 0.0 || t.mean > 1.0) throw InputError("truthMean outside [0,1]");
    if (t.median < 0.0 || t.median > 1.0) throw InputError("truthMedian outside [0,1]");
    auto cls = obj.find("truthClass");
    if (cls == obj.end() || !cls->is_string()) throw InputError("missing truthClass");
    const auto label = cls->get<std::string>();
    if (label == "clickbait") {
      t.class_label = ClickbaitClass::clickbait;
    } else if (label == "no-clickbait") {
      t.class_label = ClickbaitClass::no_clickbait;
    } else {
      throw InputError("unknown truthClass '" + label + "'");
    }
    std::string id = t.id;
    if (!out.emplace(id, std::move(t)).second) throw InputError("duplicate truth id " + id);
  });
  return out;
}

std::map<std::string, Truth> load_truth(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_truth(in, path.string());
}

LabeledDataset join_dataset(std::vector<Instance> instances,
                            const std::map<std::string, Truth>& truth,
                            std::string name) {
  LabeledDataset ds;
  ds.name = std::move(name);
  ds.examples.reserve(instances.size());
  std::vector<std::string> missing;
  std::set<std::string> used;
  for (auto& inst : instances) {
    auto it = truth.find(inst.id);
    if (it == truth.end()) {
      missing.push_back(inst.id);
      continue;
    }
    used.insert(inst.id);
    ds.examples.push_back({std::move(inst), it->second});
  }
  if (!missing.empty()) {
    std::string msg = "no truth record for " + std::to_string(missing.size()) + " instance(s):";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw InputError(msg);
  }
  std::size_t orphans = truth.size() - used.size();
  if (orphans > 0) log().warn("{}: {} truth record(s) without an instance", ds.name, orphans);
  return ds;
}

LabeledDataset load_dataset(const std::filesystem::path& instances_path,
                            const std::filesystem::path& truth_path) {
  return join_dataset(load_instances(instances_path), load_truth(truth_path),
                      instances_path.parent_path().filename().string());
}

DatasetStats dataset_stats(const LabeledDataset& dataset) {
  DatasetStats s;
  s.n_total = dataset.size();
  double sum = 0.0;
  for (const auto& ex : dataset.examples) {
    if (ex.truth.class_label == ClickbaitClass::clickbait) {
      ++s.n_clickbait;
    } else {
      ++s.n_no_clickbait;
    }
    sum += ex.truth.mean;
    std::size_t nearest = 0;
    for (std::size_t k = 1; k < kJudgmentLevels.size(); ++k) {
      if (std::abs(ex.truth.mean - kJudgmentLevels[k]) < std::abs(ex.truth.mean - kJudgmentLevels[nearest]))
        nearest = k;
    }
    ++s.score_histogram[nearest];
  }
  s.mean_score = s.n_total ? sum / static_cast<double>(s.n_total) : 0.0;
  return s;
}

std::string instance_to_json(const Instance& instance) {
  json obj;
  obj["id"] = instance.id;
  obj["postText"] = json::array({instance.post_text});
  if (instance.post_timestamp) obj["postTimestamp"] = *instance.post_timestamp;
  obj["postMedia"] = instance.media_paths;
  obj["targetTitle"] = instance.target_title;
  obj["targetDescription"] = instance.target_description;
  obj["targetKeywords"] = instance.target_keywords;
  obj["targetParagraphs"] = json::array({instance.target_paragraphs});
  return obj.dump();
}

std::string truth_to_json(const Truth& truth) {
  json obj;
  obj["id"] = truth.id;
  obj["truthJudgments"] = truth.judgments;
  obj["truthMean"] = truth.mean;
  obj["truthMedian"] = truth.median;
  obj["truthMode"] = truth.mode;
  obj["truthClass"] = to_string(truth.class_label);
  return obj.dump();
}

}  // namespace whitebait
