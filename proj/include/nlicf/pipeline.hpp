#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlicf/contrastive_trainer.hpp"
#include "nlicf/encoder_model.hpp"
#include "nlicf/eval_harness.hpp"
#include "nlicf/sentence_augment.hpp"
#include "nlicf/token_augment.hpp"

namespace nlicf {

enum class AugmentMethod { None, Token, Sentence, Both };
std::string_view augment_method_name(AugmentMethod m);
AugmentMethod parse_augment_method(std::string_view name);  // throws ValidationError

struct SplitPath {
  std::string name;
  std::filesystem::path path;
  bool operator==(const SplitPath&) const = default;
};

// Cross-entropy settings for the classifier retrained inside the
// sentence-level loop.
struct LoopClassifierConfig {
  int epochs = 25;
  double lr = 0.5;
  std::size_t batch_size = 32;
};

struct PipelineConfig {
  std::filesystem::path wordnet_dir;
  std::filesystem::path train_path;
  std::vector<SplitPath> test_splits;
  std::filesystem::path output_dir = "out";
  AugmentMethod method = AugmentMethod::Token;
  TokenAugmentConfig token;
  SentenceAugmentConfig sentence;
  LoopClassifierConfig loop_classifier;
  ContrastiveConfig train;
  Dims dims;
  std::uint64_t seed = 13;

  // Missing keys keep their defaults; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::ordered_json& j);
  // Relative paths resolve against the file's directory.
  static PipelineConfig load(const std::filesystem::path& path);
  // Complete, normalized form (every key present). Per-stage seeds are not
  // stored: they are derived from `seed`.
  nlohmann::ordered_json to_json() const;

  // Paths exist and sub-configs are valid; throws ValidationError.
  void validate() const;
  // Seeds per stage: stage_seed(seed, "<stage>").
  void derive_stage_seeds();
};

// Row label used in comparison tables: baseline, SCL, RDA, RDA-RCL, ...
std::string run_label(AugmentMethod method, ContrastiveMode mode);

struct PipelineResult {
  ModeReport metrics;
  TrainReport train;
  std::uint64_t checkpoint_checksum = 0;
  std::size_t sets = 0;
  std::size_t complete_sets = 0;
  std::string report_json;  // sentence-loop report, empty if not run
};

// Logs one line per stage to `log` when provided.
PipelineResult run_pipeline(const PipelineConfig& cfg,
                            const std::function<void(const std::string&)>& log = {});

// Classifier trainer for the sentence loop: fresh model on the current train
// set, cross-entropy only.
ClassifierTrainer make_loop_trainer(const Dims& dims, const LoopClassifierConfig& cfg,
                                    std::uint64_t seed);

// Model with vocabulary built from `train_pairs` + generated pairs and
// parameters initialized from `seed`.
Model init_model(std::span<const SentencePair> train_pairs, std::span<const AugmentedSet> sets,
                 const Dims& dims, std::uint64_t seed);

}  // namespace nlicf
