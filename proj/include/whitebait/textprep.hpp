#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace whitebait {

using TokenSequence = std::vector<std::string>;

// Lowercase (ASCII) and split on whitespace runs. No other normalization.
TokenSequence tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr std::uint32_t pad_id = 0;
  static constexpr std::uint32_t unk_id = 1;
  static constexpr std::size_t default_min_freq = 2;

  Vocabulary() = default;

  // Tokens with frequency >= min_freq, ordered by descending frequency with
  // a lexicographic tie-break. Ids start at 2.
  static Vocabulary build(const std::vector<TokenSequence>& corpus,
                          std::size_t min_freq = default_min_freq);

  std::uint32_t id(const std::string& token) const;
  const std::string& token(std::uint32_t id) const;
  std::size_t size() const { return id_to_token_.size() + 2; }
  std::size_t min_freq() const { return min_freq_; }
  bool contains(const std::string& token) const { return token_to_id_.count(token) != 0; }

  // Text format: "min_freq N", "size N", then one token per line in id order
  // starting at id 2.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const {
    return min_freq_ == other.min_freq_ && id_to_token_ == other.id_to_token_;
  }

 private:
  std::size_t min_freq_ = default_min_freq;
  std::vector<std::string> id_to_token_;  // index = id - 2
  std::unordered_map<std::string, std::uint32_t> token_to_id_;
};

struct EncodedSequence {
  std::vector<std::uint32_t> ids;  // exactly max_len entries
  std::size_t true_length = 0;
};

// Keeps the first max_len tokens, right-pads with pad_id, maps OOV to unk_id.
EncodedSequence encode(const TokenSequence& tokens, const Vocabulary& vocab, std::size_t max_len);

// Inverse of encode for the first true_length positions ("<unk>" for UNK).
TokenSequence decode(const EncodedSequence& seq, const Vocabulary& vocab);

inline constexpr std::size_t kTimeBins = 25;
inline constexpr int kUnknownTimeBin = 24;

struct TimeBin {
  int bin = kUnknownTimeBin;  // 0-23 = UTC hour of day, 24 = unknown

  std::array<double, kTimeBins> one_hot() const {
    std::array<double, kTimeBins> v{};
    v[static_cast<std::size_t>(bin)] = 1.0;
    return v;
  }
};

// Accepts Twitter-style ("Sat Feb 27 23:14:41 +0000 2016") and ISO-8601
// ("2017-01-01T00:05:00+00:00", "...Z", or no offset meaning UTC) stamps.
// Anything missing or unparsable lands in the unknown bin.
TimeBin bin_time(const std::optional<std::string>& raw);

}  // namespace whitebait
