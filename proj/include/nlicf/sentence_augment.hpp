#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlicf/encoder_model.hpp"
#include "nlicf/nli_corpus.hpp"
#include "nlicf/wn_lexicon.hpp"

namespace nlicf {

struct Generation {
  SentencePair pair;                // label == requested target
  Substitution substituted;         // original word -> final word on the revised side
  std::vector<Substitution> chain;  // one or two relation steps leading to the final word
};

// Proposes a pair of a target label by revising one side of a pair. The
// non-revised sentence is copied verbatim.
class PairGenerator {
 public:
  virtual ~PairGenerator() = default;
  // Called once per loop iteration with the current training set.
  virtual void train(std::span<const SentencePair> /*train_set*/) {}
  // `draw` identifies the request; the same draw yields the same output.
  virtual std::optional<Generation> generate(const SentencePair& pair, Label target, Side side,
                                             std::uint64_t draw) const = 0;
};

// Stateless generator built on relation-typed noun substitution.
//
// For a noun w on the revised side it first looks for a pivot: w itself if
// it also occurs in the other sentence, else the first noun of the other
// sentence related to w (one alignment step w -> pivot). The final word is
// then drawn, frequency-weighted, from the pivot's candidates for the target
// label and side. When the target equals the pair's own label a synonym of w
// is tried first, which keeps the label with a single step.
class LexicalGenerator : public PairGenerator {
 public:
  LexicalGenerator(const wn::Lexicon& lex, const FrequencyTable& freq, std::uint64_t seed,
                   std::uint64_t smoothing = 1);

  std::optional<Generation> generate(const SentencePair& pair, Label target, Side side,
                                     std::uint64_t draw) const override;

 private:
  const wn::Lexicon* lex_;
  const FrequencyTable* freq_;
  std::uint64_t seed_;
  std::uint64_t smoothing_;
};

// Softmax probability of `target` under the classifier.
double confidence(const PairClassifier& classifier, const SentencePair& pair, Label target);

// Trains a fresh classifier on the given pairs; `iteration` is 1-based.
using ClassifierTrainer =
    std::function<std::unique_ptr<PairClassifier>(std::span<const SentencePair>, int iteration)>;

struct SentenceAugmentConfig {
  double tau = 0.9;
  double coverage_goal = 0.95;
  int max_iterations = 10;
  std::uint64_t seed = 0;

  void validate() const;  // throws ValidationError
};

enum class StopReason { CoverageGoal, MaxIterations };
std::string_view stop_reason_name(StopReason r);

struct IterationReport {
  int iteration = 0;
  std::size_t train_size = 0;
  std::size_t requested = 0;  // missing (pair, label) slots at iteration start
  std::size_t generated = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t generator_failures = 0;
  double coverage = 0.0;

  nlohmann::ordered_json to_json() const;
};

struct GeneratorFailure {
  std::string group_id;
  Label label;
  int iteration;
};

struct LoopReport {
  std::vector<IterationReport> iterations;
  StopReason stop_reason = StopReason::MaxIterations;
  double initial_coverage = 0.0;
  double final_coverage = 0.0;
  std::vector<GeneratorFailure> failures;

  nlohmann::ordered_json to_json() const;
};

struct SentenceAugmentResult {
  std::vector<AugmentedSet> sets;  // one per input pair, base = original pair
  LoopReport report;
};

// Fraction of sets holding a generated pair for every label.
double coverage(std::span<const AugmentedSet> sets);

// Iterates train -> generate missing labels -> keep pairs whose target
// confidence >= tau, until coverage >= coverage_goal or max_iterations.
// Accepted pairs are never removed. `on_iteration` sees each report as soon
// as the iteration finishes.
SentenceAugmentResult run_sentence_augmentation(
    std::span<const SentencePair> pairs, PairGenerator& generator, const ClassifierTrainer& trainer,
    const SentenceAugmentConfig& cfg,
    const std::function<void(const IterationReport&)>& on_iteration = {});

}  // namespace nlicf
