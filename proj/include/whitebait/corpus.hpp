#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace whitebait {

// One post (teaser tweet) with the fields of its linked target article.
// List-valued source fields are joined with a single space.
struct Instance {
  std::string id;
  std::string post_text;
  std::optional<std::string> post_timestamp;
  std::string target_title;
  std::string target_description;
  std::string target_keywords;
  std::string target_paragraphs;
  std::vector<std::string> media_paths;

  bool operator==(const Instance&) const = default;
};

enum class ClickbaitClass { no_clickbait, clickbait };

const char* to_string(ClickbaitClass c);

// Five annotator judgments on the {0, 0.33, 0.66, 1} scale plus the stored
// aggregates. `mean` is the regression target.
struct Truth {
  std::string id;
  std::vector<double> judgments;
  double mean = 0.0;
  double median = 0.0;
  double mode = 0.0;
  ClickbaitClass class_label = ClickbaitClass::no_clickbait;
};

struct LabeledExample {
  Instance instance;
  Truth truth;
};

struct LabeledDataset {
  std::string name;
  std::vector<LabeledExample> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

// Judgment levels used for the score histogram.
inline constexpr std::array<double, 4> kJudgmentLevels{0.0, 0.33, 0.66, 1.0};

struct DatasetStats {
  std::size_t n_total = 0;
  std::size_t n_clickbait = 0;
  std::size_t n_no_clickbait = 0;
  double mean_score = 0.0;
  // Per-post truth mean snapped to the nearest entry of kJudgmentLevels.
  std::array<std::size_t, 4> score_histogram{};
};

std::vector<Instance> parse_instances(std::istream& in, const std::string& source_name = "<stream>");
std::vector<Instance> load_instances(const std::filesystem::path& path);

std::map<std::string, Truth> parse_truth(std::istream& in, const std::string& source_name = "<stream>");
std::map<std::string, Truth> load_truth(const std::filesystem::path& path);

// Pairs instances with their truth records in instance order. Throws
// InputError naming the uncovered ids; orphan truth ids are logged.
LabeledDataset join_dataset(std::vector<Instance> instances,
                            const std::map<std::string, Truth>& truth,
                            std::string name = {});

LabeledDataset load_dataset(const std::filesystem::path& instances_path,
                            const std::filesystem::path& truth_path);

DatasetStats dataset_stats(const LabeledDataset& dataset);

// Inverse of parse_instances/parse_truth, emitting the challenge JSONL
// schema. Used for fixtures and round-trip tests.
std::string instance_to_json(const Instance& instance);
std::string truth_to_json(const Truth& truth);

}  // namespace whitebait
