#include "whitebait/models.hpp"

#include <algorithm>
#include <set>

#include "whitebait/error.hpp"
#include "whitebait/ops.hpp"

namespace whitebait {

namespace {

constexpr const char* kSourceNames[] = {"post_text",          "post_time",       "target_title",
                                        "target_description", "target_keywords", "target_paragraphs"};

}  // namespace

const char* to_string(SourceKind kind) { return kSourceNames[static_cast<std::size_t>(kind)]; }

std::optional<SourceKind> parse_source(std::string_view name) {
  for (auto kind : kAllSources) {
    std::string canonical = to_string(kind);
    std::string dashed = canonical;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (name == canonical || name == dashed) return kind;
  }
  return std::nullopt;
}

std::size_t default_max_len(SourceKind kind) {
  switch (kind) {
    case SourceKind::post_text:
    case SourceKind::target_title:
    case SourceKind::target_keywords:
      return 32;
    case SourceKind::target_description:
      return 64;
    case SourceKind::target_paragraphs:
      return 256;
    case SourceKind::post_time:
      return 0;
  }
  return 0;
}

const std::string& source_text(const Instance& instance, SourceKind kind) {
  switch (kind) {
    case SourceKind::post_text:
      return instance.post_text;
    case SourceKind::target_title:
      return instance.target_title;
    case SourceKind::target_description:
      return instance.target_description;
    case SourceKind::target_keywords:
      return instance.target_keywords;
    case SourceKind::target_paragraphs:
      return instance.target_paragraphs;
    case SourceKind::post_time:
      break;
  }
  throw std::logic_error("post_time has no text field");
}

// --- Preprocessor ----------------------------------------------------------

Preprocessor Preprocessor::fit(std::span<const Instance> corpus, std::span<const SourceKind> sources,
                               std::size_t min_freq, const std::map<SourceKind, std::size_t>& max_len_overrides) {
  Preprocessor p;
  for (auto kind : sources) {
    SourceConfig cfg;
    if (is_text_source(kind)) {
      auto it = max_len_overrides.find(kind);
      cfg.max_len = it != max_len_overrides.end() ? it->second : default_max_len(kind);
      std::vector<TokenSequence> tokens;
      tokens.reserve(corpus.size());
      for (const auto& inst : corpus) tokens.push_back(tokenize(source_text(inst, kind)));
      cfg.vocab = Vocabulary::build(tokens, min_freq);
    }
    p.add_source(kind, std::move(cfg));
  }
  return p;
}

void Preprocessor::add_source(SourceKind kind, SourceConfig config) {
  if (is_text_source(kind) && config.max_len < 1) throw InputError("max_len must be >= 1");
  sources_[kind] = std::move(config);
}

void Preprocessor::merge(const Preprocessor& other) {
  for (const auto& [kind, cfg] : other.sources_) sources_[kind] = cfg;
}

Features Preprocessor::encode(const Instance& instance) const {
  Features f;
  for (const auto& [kind, cfg] : sources_) {
    if (is_text_source(kind)) {
      f.text[static_cast<std::size_t>(kind)] = whitebait::encode(tokenize(source_text(instance, kind)), cfg.vocab,
                                                                 cfg.max_len);
    } else {
      f.time = bin_time(instance.post_timestamp);
    }
  }
  return f;
}

std::vector<Features> Preprocessor::encode_all(std::span<const Instance> instances) const {
  std::vector<Features> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(encode(inst));
  return out;
}

const Preprocessor::SourceConfig& Preprocessor::config(SourceKind kind) const {
  auto it = sources_.find(kind);
  if (it == sources_.end()) throw InputError(std::string("no preprocessing configured for ") + to_string(kind));
  return it->second;
}

std::vector<SourceKind> Preprocessor::sources() const {
  std::vector<SourceKind> out;
  for (const auto& [kind, cfg] : sources_) out.push_back(kind);
  return out;
}

// --- Submodels ---------------------------------------------------------------

std::size_t parameter_count(Model& model) {
  std::size_t n = 0;
  for (auto* p : model.parameters()) n += p->size();
  return n;
}

Submodel build_text_submodel(const SubmodelSpec& spec, Rng& rng) {
  if (!is_text_source(spec.kind)) throw InputError("build_text_submodel: post_time is not a text source");
  if (spec.vocab_size < 2) throw InputError("vocabulary must contain at least PAD and UNK");
  const std::string prefix = to_string(spec.kind);
  Submodel m;
  m.spec_ = spec;
  m.embedding_ = EmbeddingTable::make(prefix + ".embedding", spec.vocab_size, spec.embed_dim, rng);
  m.input_dropout_.rate = spec.dropout_rate;
  m.lstm_ = LstmCell::make(prefix + ".lstm", spec.embed_dim, spec.hidden_dim, rng);
  m.norm_ = BatchNormLayer::make(prefix + ".norm", spec.hidden_dim);
  m.hidden_ = DenseLayer::make(prefix + ".dense", spec.hidden_dim, spec.dense_dim, Activation::relu, rng);
  m.hidden_dropout_.rate = spec.dropout_rate;
  m.head_ = DenseLayer::make(prefix + ".head", spec.dense_dim, 1, Activation::sigmoid, rng);
  return m;
}

Submodel build_time_submodel(const SubmodelSpec& spec, Rng& rng) {
  if (spec.kind != SourceKind::post_time) throw InputError("build_time_submodel: source must be post_time");
  SubmodelSpec s = spec;
  s.vocab_size = kTimeBins;
  s.max_len = 0;
  const std::string prefix = to_string(s.kind);
  Submodel m;
  m.spec_ = s;
  m.embedding_ = EmbeddingTable::make(prefix + ".embedding", kTimeBins, s.embed_dim, rng);
  m.input_dropout_.rate = 0.0;
  m.norm_ = BatchNormLayer::make(prefix + ".norm", s.embed_dim);
  m.hidden_ = DenseLayer::make(prefix + ".dense", s.embed_dim, s.dense_dim, Activation::relu, rng);
  m.hidden_dropout_.rate = s.dropout_rate;
  m.head_ = DenseLayer::make(prefix + ".head", s.dense_dim, 1, Activation::sigmoid, rng);
  return m;
}

Var Submodel::penultimate(Tape& t, Batch batch, Mode mode, Rng& rng) {
  const std::size_t B = batch.size();
  if (B == 0) throw ShapeError("empty batch");
  Var features;
  if (lstm_) {
    std::vector<std::size_t> lengths(B);
    for (std::size_t r = 0; r < B; ++r) lengths[r] = batch[r]->sequence(spec_.kind).true_length;
    const std::size_t longest = *std::max_element(lengths.begin(), lengths.end());
    std::vector<Var> steps;
    steps.reserve(longest);
    std::vector<std::uint32_t> ids(B);
    for (std::size_t k = 0; k < longest; ++k) {
      for (std::size_t r = 0; r < B; ++r) {
        const auto& seq = batch[r]->sequence(spec_.kind);
        if (seq.ids.size() <= k && lengths[r] > k) throw ShapeError("encoded sequence shorter than its length");
        ids[r] = k < seq.ids.size() ? seq.ids[k] : Vocabulary::pad_id;
      }
      steps.push_back(dropout(t, embed_ids(t, embedding_, ids), input_dropout_, mode, rng));
    }
    features = lstm_sequence(t, *lstm_, steps, lengths);
  } else {
    std::vector<std::uint32_t> bins(B);
    for (std::size_t r = 0; r < B; ++r) bins[r] = static_cast<std::uint32_t>(batch[r]->time.bin);
    features = embed_ids(t, embedding_, bins);
  }
  Var normed = batchnorm(t, features, norm_, mode);
  return dense(t, normed, hidden_);
}

Var Submodel::forward(Tape& t, Batch batch, Mode mode, Rng& rng) {
  Var h = penultimate(t, batch, mode, rng);
  return dense(t, dropout(t, h, hidden_dropout_, mode, rng), head_);
}

std::vector<Parameter*> Submodel::parameters() {
  std::vector<Parameter*> out;
  embedding_.collect(out);
  if (lstm_) lstm_->collect(out);
  norm_.collect(out);
  hidden_.collect(out);
  head_.collect(out);
  return out;
}

std::vector<Buffer> Submodel::buffers() {
  std::vector<Buffer> out;
  norm_.collect_buffers(out);
  return out;
}

void Submodel::zero_head() {
  head_.w.value.fill(0.0);
  head_.b.value.fill(0.0);
}

// --- Fusion ------------------------------------------------------------------

FusionModel::FusionModel(std::vector<Submodel> submodels, const FusionSpec& spec, Rng& rng)
    : spec_(spec), submodels_(std::move(submodels)) {
  if (submodels_.empty()) throw InputError("fusion needs at least one submodel");
  std::set<SourceKind> seen;
  for (auto& sub : submodels_) {
    if (!seen.insert(sub.kind()).second)
      throw InputError(std::string("duplicate submodel for ") + to_string(sub.kind()));
    input_width_ += sub.spec().dense_dim;
    for (auto* p : sub.parameters()) {
      p->frozen = !spec_.fine_tune;
      p->lr_scale = spec_.submodel_lr_scale;
    }
  }
  path_mask_.assign(submodels_.size(), true);
  hidden_ = DenseLayer::make("fusion.dense", input_width_, spec_.fusion_dense_dim, Activation::relu, rng);
  dropout_.rate = spec_.dropout_rate;
  head_ = DenseLayer::make("fusion.head", spec_.fusion_dense_dim, 1, Activation::sigmoid, rng);
}

void FusionModel::set_path_mask(std::vector<bool> mask) {
  if (mask.size() != submodels_.size()) throw InputError("path mask size must equal the number of submodels");
  path_mask_ = std::move(mask);
}

Var FusionModel::forward(Tape& t, Batch batch, Mode mode, Rng& rng) {
  const Mode sub_mode = spec_.fine_tune ? mode : Mode::infer;
  std::vector<Var> parts;
  parts.reserve(submodels_.size());
  for (std::size_t k = 0; k < submodels_.size(); ++k) {
    auto& sub = submodels_[k];
    if (!path_mask_[k]) {
      parts.push_back(t.constant(Tensor({batch.size(), sub.spec().dense_dim})));
      continue;
    }
    Var p = sub.penultimate(t, batch, sub_mode, rng);
    if (t.value(p).cols() != sub.spec().dense_dim) throw ShapeError("fusion: submodel width mismatch");
    parts.push_back(p);
  }
  Var joined = ops::concat_cols(t, parts);
  if (t.value(joined).cols() != input_width_) throw ShapeError("fusion: input width mismatch");
  Var h = dense(t, joined, hidden_);
  return dense(t, dropout(t, h, dropout_, mode, rng), head_);
}

std::vector<Parameter*> FusionModel::parameters() {
  std::vector<Parameter*> out;
  for (auto& sub : submodels_) {
    auto ps = sub.parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  auto head = head_parameters();
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

std::vector<Parameter*> FusionModel::head_parameters() {
  std::vector<Parameter*> out;
  hidden_.collect(out);
  head_.collect(out);
  return out;
}

std::vector<Buffer> FusionModel::buffers() {
  std::vector<Buffer> out;
  for (auto& sub : submodels_) {
    auto bs = sub.buffers();
    out.insert(out.end(), bs.begin(), bs.end());
  }
  return out;
}

FusionModel build_fusion_model(std::vector<Submodel> submodels, const FusionSpec& spec, Rng& rng) {
  return FusionModel(std::move(submodels), spec, rng);
}

}  // namespace whitebait
