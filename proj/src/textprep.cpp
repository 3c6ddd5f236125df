#include "whitebait/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>

#include "whitebait/error.hpp"

namespace whitebait {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::string current;
  for (unsigned char c : text) {
    if (is_space(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(lower(c));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocabulary Vocabulary::build(const std::vector<TokenSequence>& corpus, std::size_t min_freq) {
  if (min_freq < 1) throw InputError("min_freq must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& seq : corpus)
    for (const auto& tok : seq) ++counts[tok];

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts)
    if (n >= min_freq) kept.emplace_back(tok, n);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  v.min_freq_ = min_freq;
  v.id_to_token_.reserve(kept.size());
  for (auto& [tok, n] : kept) {
    v.token_to_id_.emplace(tok, static_cast<std::uint32_t>(v.id_to_token_.size() + 2));
    v.id_to_token_.push_back(tok);
  }
  return v;
}

std::uint32_t Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? unk_id : it->second;
}

const std::string& Vocabulary::token(std::uint32_t id) const {
  static const std::string pad = "<pad>";
  static const std::string unk = "<unk>";
  if (id == pad_id) return pad;
  if (id == unk_id) return unk;
  if (id - 2 >= id_to_token_.size()) throw InputError("token id " + std::to_string(id) + " out of range");
  return id_to_token_[id - 2];
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "min_freq " << min_freq_ << '\n' << "size " << size() << '\n';
  for (const auto& tok : id_to_token_) out << tok << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::string key;
  std::size_t min_freq = 0, size = 0;
  if (!(in >> key >> min_freq) || key != "min_freq") throw ParseError(path.string(), 1, "expected 'min_freq N'");
  if (!(in >> key >> size) || key != "size") throw ParseError(path.string(), 2, "expected 'size N'");
  if (size < 2) throw ParseError(path.string(), 2, "size must be >= 2");
  in.ignore(1);
  Vocabulary v;
  v.min_freq_ = min_freq;
  std::string line;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError(path.string(), line_no, "empty token");
    auto id = static_cast<std::uint32_t>(v.id_to_token_.size() + 2);
    if (!v.token_to_id_.emplace(line, id).second) throw ParseError(path.string(), line_no, "duplicate token");
    v.id_to_token_.push_back(line);
  }
  if (v.size() != size)
    throw ParseError(path.string(), line_no, "header says size " + std::to_string(size) + " but file has " +
                                                 std::to_string(v.size()));
  return v;
}

EncodedSequence encode(const TokenSequence& tokens, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 1) throw InputError("max_len must be >= 1");
  EncodedSequence seq;
  seq.true_length = std::min(tokens.size(), max_len);
  seq.ids.assign(max_len, Vocabulary::pad_id);
  for (std::size_t i = 0; i < seq.true_length; ++i) seq.ids[i] = vocab.id(tokens[i]);
  return seq;
}

TokenSequence decode(const EncodedSequence& seq, const Vocabulary& vocab) {
  TokenSequence out;
  for (std::size_t i = 0; i < seq.true_length; ++i) out.push_back(vocab.token(seq.ids[i]));
  return out;
}

namespace {

int month_index(const std::string& m) {
  static const char* names[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  for (int i = 0; i < 12; ++i)
    if (m == names[i]) return i;
  return -1;
}

// Offset in minutes east of UTC from "+HHMM", "+HH:MM", "Z" or "".
std::optional<int> parse_offset(const std::string& s) {
  if (s.empty() || s == "Z" || s == "z") return 0;
  static const std::regex re(R"(([+-])(\d{2}):?(\d{2}))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) return std::nullopt;
  int h = std::stoi(m[2]), mi = std::stoi(m[3]);
  if (h > 23 || mi > 59) return std::nullopt;
  int total = h * 60 + mi;
  return m[1] == "-" ? -total : total;
}

TimeBin from_local(int hour, int minute, int second, int offset_minutes) {
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 60) return {};
  int utc_minutes = ((hour * 60 + minute - offset_minutes) % 1440 + 1440) % 1440;
  return TimeBin{utc_minutes / 60};
}

}  // namespace

TimeBin bin_time(const std::optional<std::string>& raw) {
  if (!raw) return {};
  const std::string& s = *raw;

  static const std::regex twitter(
      R"(^\s*[A-Za-z]{3} ([A-Za-z]{3}) (\d{1,2}) (\d{2}):(\d{2}):(\d{2}) ([+-]\d{4}) (\d{4})\s*$)");
  static const std::regex iso(
      R"(^\s*(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?(Z|z|[+-]\d{2}:?\d{2})?\s*$)");

  std::smatch m;
  if (std::regex_match(s, m, twitter)) {
    if (month_index(m[1]) < 0) return {};
    int day = std::stoi(m[2]);
    if (day < 1 || day > 31) return {};
    auto offset = parse_offset(m[6]);
    if (!offset) return {};
    return from_local(std::stoi(m[3]), std::stoi(m[4]), std::stoi(m[5]), *offset);
  }
  if (std::regex_match(s, m, iso)) {
    int month = std::stoi(m[2]), day = std::stoi(m[3]);
    if (month < 1 || month > 12 || day < 1 || day > 31) return {};
    auto offset = parse_offset(m[7].matched ? m[7].str() : std::string());
    if (!offset) return {};
    int second = m[6].matched ? std::stoi(m[6]) : 0;
    return from_local(std::stoi(m[4]), std::stoi(m[5]), second, *offset);
  }
  return {};
}

}  // namespace whitebait
