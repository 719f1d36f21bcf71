#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nlicf/encoder_model.hpp"
#include "nlicf/nli_corpus.hpp"

namespace nlicf {

enum class ContrastiveMode { Rcl, Scl, None };

std::string_view mode_name(ContrastiveMode m);
ContrastiveMode parse_mode(std::string_view name);  // throws ValidationError

class TrainerError : public Error {
 public:
  enum class Code { NonPositiveTemperature, IncompleteSet, DegenerateBatch, EmptyBatch };
  TrainerError(Code code, const std::string& detail);
  Code code_kind() const noexcept { return code_; }

 private:
  Code code_;
};

struct ContrastiveConfig {
  double temperature = 0.1;
  int cl_epochs = 10;
  double cl_lr = 0.001;
  int ce_epochs = 25;
  double ce_lr = 0.5;
  std::size_t batch_size = 32;
  ContrastiveMode mode = ContrastiveMode::Rcl;
  std::uint64_t seed = 0;

  void validate() const;  // throws ValidationError
};

// -log( exp(s_y/T) / sum_c exp(s_c/T) ) over the three class similarities,
// evaluated as logsumexp(s/T) - s_y/T.
double rcl_loss(const std::array<double, 3>& sims, Label y, double temperature);
// d rcl_loss / d sims.
std::array<double, 3> rcl_loss_grad(const std::array<double, 3>& sims, Label y,
                                    double temperature);

struct LossAndGrad {
  double loss = 0.0;
  Gradients grads;
};

// Mean relation-based contrastive loss over complete sets. The base pair is
// the anchor; its positive is the generated pair carrying the base label.
LossAndGrad rcl_batch_loss(const EncoderParams& params, const Vocab& vocab,
                           std::span<const AugmentedSet* const> sets, double temperature);
LossAndGrad rcl_batch_loss(const EncoderParams& params, const Vocab& vocab,
                           std::span<const AugmentedSet> sets, double temperature);

// Supervised contrastive loss over in-batch embeddings; anchors without a
// same-label partner are skipped.
LossAndGrad scl_batch_loss(const EncoderParams& params, const Vocab& vocab,
                           std::span<const SentencePair* const> batch, double temperature);
LossAndGrad scl_batch_loss(const EncoderParams& params, const Vocab& vocab,
                           std::span<const SentencePair> batch, double temperature);

// Mean softmax cross-entropy of the classifier head.
LossAndGrad ce_batch_loss(const EncoderParams& params, const Vocab& vocab,
                          std::span<const SentencePair* const> batch);
LossAndGrad ce_batch_loss(const EncoderParams& params, const Vocab& vocab,
                          std::span<const SentencePair> batch);
double ce_loss(const EncoderParams& params, const Vocab& vocab,
               std::span<const SentencePair> pairs);

struct TrainReport {
  std::vector<double> cl_epoch_losses;
  std::vector<double> ce_epoch_losses;
  double ce_loss_before = 0.0;  // over the cross-entropy training pairs
  double ce_loss_after = 0.0;
  std::size_t contrastive_units = 0;  // complete sets (rcl) or pairs (scl)
  std::size_t ce_pairs = 0;
  std::size_t skipped_batches = 0;
  std::uint64_t checksum = 0;
  double wall_seconds = 0.0;

  nlohmann::ordered_json to_json() const;
};

// Stage 1: cl_epochs of the contrastive objective (rcl over complete sets,
// scl over labeled pairs). Stage 2: ce_epochs of cross-entropy over the
// originals plus every generated pair.
TrainReport train(EncoderParams& params, const Vocab& vocab,
                  std::span<const SentencePair> train_pairs, std::span<const AugmentedSet> sets,
                  const ContrastiveConfig& cfg);

}  // namespace nlicf
