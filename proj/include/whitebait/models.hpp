#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "whitebait/corpus.hpp"
#include "whitebait/layers.hpp"
#include "whitebait/textprep.hpp"

namespace whitebait {

enum class SourceKind : std::size_t {
  post_text = 0,
  post_time = 1,
  target_title = 2,
  target_description = 3,
  target_keywords = 4,
  target_paragraphs = 5,
};

inline constexpr std::array<SourceKind, 6> kAllSources{
    SourceKind::post_text,          SourceKind::post_time,       SourceKind::target_title,
    SourceKind::target_description, SourceKind::target_keywords, SourceKind::target_paragraphs};

const char* to_string(SourceKind kind);
std::optional<SourceKind> parse_source(std::string_view name);
inline bool is_text_source(SourceKind kind) { return kind != SourceKind::post_time; }
std::size_t default_max_len(SourceKind kind);
const std::string& source_text(const Instance& instance, SourceKind kind);

// Encoded inputs of one instance. Only the slots of the sources a
// Preprocessor was fitted for are filled.
struct Features {
  std::array<EncodedSequence, 6> text;
  TimeBin time;

  const EncodedSequence& sequence(SourceKind kind) const { return text[static_cast<std::size_t>(kind)]; }
};

// Per-source vocabularies and sequence lengths.
class Preprocessor {
 public:
  struct SourceConfig {
    std::size_t max_len = 0;
    Vocabulary vocab;
  };

  static Preprocessor fit(std::span<const Instance> corpus, std::span<const SourceKind> sources,
                          std::size_t min_freq = Vocabulary::default_min_freq,
                          const std::map<SourceKind, std::size_t>& max_len_overrides = {});

  void add_source(SourceKind kind, SourceConfig config);
  void merge(const Preprocessor& other);

  Features encode(const Instance& instance) const;
  std::vector<Features> encode_all(std::span<const Instance> instances) const;

  bool has(SourceKind kind) const { return sources_.count(kind) != 0; }
  const SourceConfig& config(SourceKind kind) const;
  std::vector<SourceKind> sources() const;

 private:
  std::map<SourceKind, SourceConfig> sources_;
};

using Batch = std::span<const Features* const>;

class Model {
 public:
  virtual ~Model() = default;

  // Scores in (0,1), shape [batch, 1].
  virtual Var forward(Tape& t, Batch batch, Mode mode, Rng& rng) = 0;
  virtual std::vector<Parameter*> parameters() = 0;
  virtual std::vector<Buffer> buffers() = 0;
};

std::size_t parameter_count(Model& model);

struct SubmodelSpec {
  SourceKind kind = SourceKind::post_text;
  std::size_t vocab_size = 0;  // rows of the embedding table; kTimeBins for post_time
  std::size_t max_len = 0;     // text sources only
  std::size_t embed_dim = 100;
  std::size_t hidden_dim = 100;  // LSTM width, text sources only
  std::size_t dense_dim = 64;
  double dropout_rate = 0.3;
};

// Text:  embed -> dropout -> LSTM -> batchnorm -> dense(relu) -> dropout -> dense(1, sigmoid)
// Time:  one-hot(25) -> entity embedding -> batchnorm -> dense(relu) -> dropout -> dense(1, sigmoid)
// The dense(relu) output is the "penultimate" activation used by fusion.
class Submodel final : public Model {
 public:
  const SubmodelSpec& spec() const { return spec_; }
  SourceKind kind() const { return spec_.kind; }

  Var penultimate(Tape& t, Batch batch, Mode mode, Rng& rng);
  Var forward(Tape& t, Batch batch, Mode mode, Rng& rng) override;
  std::vector<Parameter*> parameters() override;
  std::vector<Buffer> buffers() override;

  // Zeroes the output layer so the initial prediction is exactly 0.5.
  void zero_head();

  friend Submodel build_text_submodel(const SubmodelSpec& spec, Rng& rng);
  friend Submodel build_time_submodel(const SubmodelSpec& spec, Rng& rng);

 private:
  SubmodelSpec spec_;
  EmbeddingTable embedding_;
  DropoutLayer input_dropout_;
  std::optional<LstmCell> lstm_;
  BatchNormLayer norm_;
  DenseLayer hidden_;
  DropoutLayer hidden_dropout_;
  DenseLayer head_;
};

Submodel build_text_submodel(const SubmodelSpec& spec, Rng& rng);
Submodel build_time_submodel(const SubmodelSpec& spec, Rng& rng);
inline Submodel build_submodel(const SubmodelSpec& spec, Rng& rng) {
  return is_text_source(spec.kind) ? build_text_submodel(spec, rng) : build_time_submodel(spec, rng);
}

struct FusionSpec {
  std::size_t fusion_dense_dim = 64;
  double dropout_rate = 0.3;
  // false: submodels are frozen and run in inference mode.
  bool fine_tune = true;
  // Learning-rate multiplier for pretrained submodel weights when fine-tuning.
  double submodel_lr_scale = 0.1;
};

// Concatenates the penultimate activations of pretrained submodels, then
// dense(relu) -> dropout -> dense(1, sigmoid).
class FusionModel final : public Model {
 public:
  FusionModel(std::vector<Submodel> submodels, const FusionSpec& spec, Rng& rng);

  const FusionSpec& spec() const { return spec_; }
  std::vector<Submodel>& submodels() { return submodels_; }
  const std::vector<Submodel>& submodels() const { return submodels_; }
  std::size_t input_width() const { return input_width_; }

  // Replaces the penultimate activation of every submodel whose flag is
  // false with zeros. Used for ablations.
  void set_path_mask(std::vector<bool> mask);

  Var forward(Tape& t, Batch batch, Mode mode, Rng& rng) override;
  std::vector<Parameter*> parameters() override;
  std::vector<Buffer> buffers() override;
  std::vector<Parameter*> head_parameters();

 private:
  FusionSpec spec_;
  std::vector<Submodel> submodels_;
  std::vector<bool> path_mask_;
  std::size_t input_width_ = 0;
  DenseLayer hidden_;
  DropoutLayer dropout_;
  DenseLayer head_;
};

// Throws InputError when the submodel list is empty or has duplicate sources.
FusionModel build_fusion_model(std::vector<Submodel> submodels, const FusionSpec& spec, Rng& rng);

}  // namespace whitebait
