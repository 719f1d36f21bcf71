#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlicf/encoder_model.hpp"
#include "nlicf/nli_corpus.hpp"

namespace nlicf {

struct Metrics {
  std::string split;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;

  bool operator==(const Metrics&) const = default;
};

// Argmax over class probabilities; ties go to the lowest class index.
Label predict(const PairClassifier& classifier, const SentencePair& pair);

// Throws Error{"eval_harness", "EmptySplit"} for an empty split.
Metrics evaluate(const PairClassifier& classifier, std::span<const SentencePair> pairs,
                 const std::string& split_name);

// One row of a comparison table: a training mode and its per-split metrics.
struct ModeReport {
  std::string mode;
  std::vector<Metrics> splits;

  bool operator==(const ModeReport&) const = default;
};

nlohmann::ordered_json to_json(const ModeReport& report);
ModeReport mode_report_from_json(const nlohmann::ordered_json& j);

struct ComparisonTable {
  std::string text;             // aligned plain-text table, accuracies in percent
  nlohmann::ordered_json json;  // {"columns": [...], "rows": [{"mode":..,"accuracy":{..}}]}
};

// Rows keep input order; columns are split names in order of first appearance.
ComparisonTable compare(std::span<const ModeReport> reports);

}  // namespace nlicf
