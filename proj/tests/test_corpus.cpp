#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "support.hpp"
#include "whitebait/error.hpp"

using namespace whitebait;

namespace {

std::vector<Instance> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_instances(in);
}

std::map<std::string, Truth> parse_t(const std::string& text) {
  std::istringstream in(text);
  return parse_truth(in);
}

const char* kTruthZero =
    R"({"id":"1","truthJudgments":[0,0,0,0,0],"truthMean":0.0,"truthMedian":0.0,"truthMode":0.0,"truthClass":"no-clickbait"})";

}  // namespace

TEST_CASE("list-valued text fields are joined with single spaces") {
  auto v = parse(R"({"id":"1","postText":["Hello","world"],"targetTitle":"T","targetParagraphs":["p1","p2"]})" "\n");
  REQUIRE(v.size() == 1);
  CHECK(v[0].post_text == "Hello world");
  CHECK(v[0].target_paragraphs == "p1 p2");
  CHECK(v[0].target_title == "T");
  CHECK_FALSE(v[0].post_timestamp.has_value());
}

TEST_CASE("empty file and empty postText") {
  CHECK(parse("").empty());
  auto v = parse(R"({"id":"x","postText":[]})" "\n");
  REQUIRE(v.size() == 1);
  CHECK(v[0].post_text.empty());
  CHECK(v[0].target_description.empty());
}

TEST_CASE("media paths are parsed") {
  auto v = parse(R"({"id":"m","postText":["a"],"postMedia":["media/1.jpg","media/2.png"]})" "\n");
  CHECK(v[0].media_paths == std::vector<std::string>{"media/1.jpg", "media/2.png"});
}

TEST_CASE("malformed lines report their line number") {
  std::string text = R"({"id":"1","postText":["a"]})" "\n" "{not json\n";
  try {
    parse(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("missing or duplicate ids are rejected") {
  CHECK_THROWS_AS(parse(R"({"postText":["a"]})" "\n"), InputError);
  CHECK_THROWS_AS(parse(R"({"id":"1"})" "\n" R"({"id":"1"})" "\n"), InputError);
}

TEST_CASE("truth records") {
  SUBCASE("all-zero judgments") {
    auto m = parse_t(std::string(kTruthZero) + "\n");
    REQUIRE(m.count("1"));
    CHECK(m.at("1").mean == 0.0);
    CHECK(m.at("1").class_label == ClickbaitClass::no_clickbait);
  }
  SUBCASE("all-one judgments") {
    auto m = parse_t(
        R"({"id":"2","truthJudgments":[1,1,1,1,1],"truthMean":1.0,"truthMedian":1.0,"truthMode":1.0,"truthClass":"clickbait"})"
        "\n");
    CHECK(m.at("2").mean == 1.0);
    CHECK(m.at("2").class_label == ClickbaitClass::clickbait);
  }
  SUBCASE("mixed judgments: stored mean within 1e-2 of the arithmetic mean") {
    auto m = parse_t(
        R"({"id":"3","truthJudgments":[0.0,0.33,0.33,0.66,1.0],"truthMean":0.4666667,"truthMedian":0.33,"truthMode":0.33,"truthClass":"no-clickbait"})"
        "\n");
    const auto& t = m.at("3");
    const double computed = (0.0 + 0.33 + 0.33 + 0.66 + 1.0) / 5.0;
    CHECK(computed == doctest::Approx(0.464));
    CHECK(std::abs(t.mean - computed) <= 1e-2);
  }
  SUBCASE("thirds are accepted as the middle levels") {
    auto m = parse_t(
        R"({"id":"4","truthJudgments":[0.3333333333,0.6666666667,0,0,1],"truthMean":0.4,"truthMedian":0.3333,"truthMode":0.0,"truthClass":"no-clickbait"})"
        "\n");
    CHECK(m.size() == 1);
  }
  SUBCASE("invalid records") {
    CHECK_THROWS_AS(parse_t(R"({"id":"1","truthJudgments":[0,0,0,0],"truthMean":0,"truthMedian":0,"truthMode":0,"truthClass":"no-clickbait"})" "\n"),
                    InputError);
    CHECK_THROWS_AS(parse_t(R"({"id":"1","truthJudgments":[0,0,0,0,0.5],"truthMean":0.1,"truthMedian":0,"truthMode":0,"truthClass":"no-clickbait"})" "\n"),
                    InputError);
    CHECK_THROWS_AS(parse_t(R"({"id":"1","truthJudgments":[0,0,0,0,0],"truthMean":0.5,"truthMedian":0,"truthMode":0,"truthClass":"no-clickbait"})" "\n"),
                    InputError);
    CHECK_THROWS_AS(parse_t(R"({"id":"1","truthJudgments":[0,0,0,0,0],"truthMean":0,"truthMedian":0,"truthMode":0,"truthClass":"maybe"})" "\n"),
                    InputError);
    CHECK_THROWS_AS(parse_t(std::string(kTruthZero) + "\n" + kTruthZero + "\n"), InputError);
  }
}

TEST_CASE("join_dataset") {
  std::vector<Instance> inst(2);
  inst[0].id = "a";
  inst[1].id = "b";
  std::map<std::string, Truth> truth{{"a", wbtest::make_truth("a", {0, 0, 0, 0, 0})},
                                     {"b", wbtest::make_truth("b", {1, 1, 1, 1, 1})}};
  CHECK(join_dataset(inst, truth).size() == 2);

  truth.erase("b");
  try {
    join_dataset(inst, truth);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  CHECK(join_dataset({}, {}).empty());
}

TEST_CASE("dataset_stats") {
  LabeledDataset ds;
  ds.examples.push_back({Instance{"1"}, wbtest::make_truth("1", {1, 1, 1, 0.66, 1})});
  ds.examples.push_back({Instance{"2"}, wbtest::make_truth("2", {1, 1, 1, 1, 1})});
  ds.examples.push_back({Instance{"3"}, wbtest::make_truth("3", {0, 0, 0, 0, 0.33})});
  auto s = dataset_stats(ds);
  CHECK(s.n_clickbait == 2);
  CHECK(s.n_no_clickbait == 1);
  CHECK(s.n_total == 3);
  CHECK(s.score_histogram[3] == 2);
  CHECK(s.score_histogram[0] == 1);

  // Counts do not depend on the order of the examples.
  std::reverse(ds.examples.begin(), ds.examples.end());
  auto r = dataset_stats(ds);
  CHECK(r.n_clickbait == s.n_clickbait);
  CHECK(r.score_histogram == s.score_histogram);
  CHECK(r.mean_score == doctest::Approx(s.mean_score).epsilon(1e-15));
}

TEST_CASE("serialized instances and truths round-trip") {
  std::vector<Instance> instances;
  std::vector<Truth> truths;
  wbtest::make_corpus(40, 3, instances, truths);
  instances[0].post_timestamp.reset();
  instances[1].media_paths = {"media/a.jpg"};
  instances[2].post_text = "quotes \" and unicode caf\xc3\xa9";

  std::string text;
  for (const auto& i : instances) text += instance_to_json(i) + "\n";
  CHECK(parse(text) == instances);

  std::string ttext;
  for (const auto& t : truths) ttext += truth_to_json(t) + "\n";
  auto parsed = parse_t(ttext);
  REQUIRE(parsed.size() == truths.size());
  for (const auto& t : truths) {
    const auto& p = parsed.at(t.id);
    CHECK(p.judgments == t.judgments);
    CHECK(p.mean == t.mean);
    CHECK(p.class_label == t.class_label);
    const auto [lo, hi] = std::minmax_element(p.judgments.begin(), p.judgments.end());
    CHECK(*lo <= p.mean);
    CHECK(p.mean <= *hi);
    CHECK(p.median >= 0.0);
    CHECK(p.median <= 1.0);
  }
}
