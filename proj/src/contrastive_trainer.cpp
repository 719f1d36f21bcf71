#include "nlicf/contrastive_trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "nlicf/rng.hpp"

namespace nlicf {

namespace {

std::string code_name(TrainerError::Code c) {
  switch (c) {
    case TrainerError::Code::NonPositiveTemperature: return "NonPositiveTemperature";
    case TrainerError::Code::IncompleteSet: return "IncompleteSet";
    case TrainerError::Code::DegenerateBatch: return "DegenerateBatch";
    case TrainerError::Code::EmptyBatch: return "EmptyBatch";
  }
  return "Unknown";
}

void check_temperature(double t) {
  if (!(t > 0.0)) {
    throw TrainerError(TrainerError::Code::NonPositiveTemperature,
                       "temperature must be positive, got " + std::to_string(t));
  }
}

template <typename T>
std::vector<const T*> pointers(std::span<const T> items) {
  std::vector<const T*> out;
  out.reserve(items.size());
  for (const auto& x : items) out.push_back(&x);
  return out;
}

std::vector<double> unit_grad_buffer(std::size_t n) { return std::vector<double>(n, 0.0); }

}  // namespace

TrainerError::TrainerError(Code code, const std::string& detail)
    : Error("contrastive_trainer", code_name(code), detail), code_(code) {}

std::string_view mode_name(ContrastiveMode m) {
  switch (m) {
    case ContrastiveMode::Rcl: return "rcl";
    case ContrastiveMode::Scl: return "scl";
    case ContrastiveMode::None: return "none";
  }
  return "?";
}

ContrastiveMode parse_mode(std::string_view name) {
  if (name == "rcl") return ContrastiveMode::Rcl;
  if (name == "scl") return ContrastiveMode::Scl;
  if (name == "none") return ContrastiveMode::None;
  throw ValidationError("unknown training mode '" + std::string(name) + "'");
}

void ContrastiveConfig::validate() const {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be > 0");
  if (!(cl_lr > 0.0) || !(ce_lr > 0.0)) throw ValidationError("learning rates must be > 0");
  if (cl_epochs < 0 || ce_epochs < 0) throw ValidationError("epoch counts must be >= 0");
  if (batch_size == 0) throw ValidationError("batch size must be positive");
}

double rcl_loss(const std::array<double, 3>& sims, Label y, double temperature) {
  check_temperature(temperature);
  const double m = std::max({sims[0], sims[1], sims[2]}) / temperature;
  double sum = 0.0;
  for (double s : sims) sum += std::exp(s / temperature - m);
  return m + std::log(sum) - sims[index_of(y)] / temperature;
}

std::array<double, 3> rcl_loss_grad(const std::array<double, 3>& sims, Label y,
                                    double temperature) {
  check_temperature(temperature);
  std::array<double, 3> scaled{};
  for (std::size_t c = 0; c < 3; ++c) scaled[c] = sims[c] / temperature;
  auto p = softmax(scaled);
  p[index_of(y)] -= 1.0;
  for (double& g : p) g /= temperature;
  return p;
}

LossAndGrad rcl_batch_loss(const EncoderParams& params, const Vocab& vocab,
                           std::span<const AugmentedSet* const> sets, double temperature) {
  check_temperature(temperature);
  if (sets.empty()) throw TrainerError(TrainerError::Code::EmptyBatch, "empty rcl batch");
  for (const AugmentedSet* s : sets) {
    if (!s->complete()) throw TrainerError(TrainerError::Code::IncompleteSet, s->group_id);
  }

  LossAndGrad out{0.0, Gradients(params.vocab_size(), params.dims())};
  const double inv_b = 1.0 / static_cast<double>(sets.size());
  const std::size_t e = params.dims().proj;
  auto dx = unit_grad_buffer(e);
  auto dc = unit_grad_buffer(e);

  for (const AugmentedSet* s : sets) {
    const PairEmbedding anchor = encode(params, vocab, s->base);
    std::array<PairEmbedding, 3> members;
    std::array<double, 3> sims{};
    for (Label c : kLabels) {
      members[index_of(c)] = encode(params, vocab, s->generated.at(c));
      sims[index_of(c)] = cosine_sim(anchor.z, members[index_of(c)].z);
    }
    const Label y = s->base.label;
    out.loss += inv_b * rcl_loss(sims, y, temperature);
    const auto dsims = rcl_loss_grad(sims, y, temperature);

    std::vector<double> dz_anchor(e, 0.0);
    for (Label c : kLabels) {
      const std::size_t k = index_of(c);
      cosine_sim_grad(anchor.z, members[k].z, dx, dc);
      const double w = inv_b * dsims[k];
      for (std::size_t i = 0; i < e; ++i) {
        dz_anchor[i] += w * dx[i];
        dc[i] *= w;
      }
      backward_embedding(params, members[k], dc, out.grads);
    }
    backward_embedding(params, anchor, dz_anchor, out.grads);
  }
  return out;
}

LossAndGrad rcl_batch_loss(const EncoderParams& params, const Vocab& vocab,
                           std::span<const AugmentedSet> sets, double temperature) {
  const auto ptrs = pointers(sets);
  return rcl_batch_loss(params, vocab, std::span<const AugmentedSet* const>(ptrs), temperature);
}

LossAndGrad scl_batch_loss(const EncoderParams& params, const Vocab& vocab,
                           std::span<const SentencePair* const> batch, double temperature) {
  check_temperature(temperature);
  const std::size_t n = batch.size();
  if (n < 2) throw TrainerError(TrainerError::Code::DegenerateBatch, "batch needs >= 2 examples");

  std::vector<std::size_t> positives(n, 0);
  std::size_t anchors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && batch[j]->label == batch[i]->label) ++positives[i];
    }
    if (positives[i] > 0) ++anchors;
  }
  if (anchors == 0) throw TrainerError(TrainerError::Code::DegenerateBatch, "no anchor has a positive");

  std::vector<PairEmbedding> emb;
  emb.reserve(n);
  for (const SentencePair* p : batch) emb.push_back(encode(params, vocab, *p));

  std::vector<double> sim(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sim[i * n + j] = sim[j * n + i] = cosine_sim(emb[i].z, emb[j].z);
    }
  }

  // dsim[i*n+a] = d loss / d sim(i, a) as seen from anchor i.
  std::vector<double> dsim(n * n, 0.0);
  double loss = 0.0;
  const double inv_anchors = 1.0 / static_cast<double>(anchors);
  for (std::size_t i = 0; i < n; ++i) {
    if (positives[i] == 0) continue;
    double m = -INFINITY;
    for (std::size_t a = 0; a < n; ++a) {
      if (a != i) m = std::max(m, sim[i * n + a] / temperature);
    }
    double z = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (a != i) z += std::exp(sim[i * n + a] / temperature - m);
    }
    const double lse = m + std::log(z);
    const double inv_p = 1.0 / static_cast<double>(positives[i]);
    for (std::size_t a = 0; a < n; ++a) {
      if (a == i) continue;
      const double soft = std::exp(sim[i * n + a] / temperature - lse);
      const bool pos = batch[a]->label == batch[i]->label;
      if (pos) loss -= inv_anchors * inv_p * (sim[i * n + a] / temperature - lse);
      dsim[i * n + a] = inv_anchors * (soft - (pos ? inv_p : 0.0)) / temperature;
    }
  }

  const std::size_t e = params.dims().proj;
  std::vector<std::vector<double>> dz(n, std::vector<double>(e, 0.0));
  auto da = unit_grad_buffer(e);
  auto db = unit_grad_buffer(e);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = dsim[i * n + j] + dsim[j * n + i];
      if (g == 0.0) continue;
      cosine_sim_grad(emb[i].z, emb[j].z, da, db);
      for (std::size_t k = 0; k < e; ++k) {
        dz[i][k] += g * da[k];
        dz[j][k] += g * db[k];
      }
    }
  }
  LossAndGrad out{loss, Gradients(params.vocab_size(), params.dims())};
  for (std::size_t i = 0; i < n; ++i) backward_embedding(params, emb[i], dz[i], out.grads);
  return out;
}

LossAndGrad scl_batch_loss(const EncoderParams& params, const Vocab& vocab,
                           std::span<const SentencePair> batch, double temperature) {
  const auto ptrs = pointers(batch);
  return scl_batch_loss(params, vocab, std::span<const SentencePair* const>(ptrs), temperature);
}

LossAndGrad ce_batch_loss(const EncoderParams& params, const Vocab& vocab,
                          std::span<const SentencePair* const> batch) {
  if (batch.empty()) throw TrainerError(TrainerError::Code::EmptyBatch, "empty ce batch");
  LossAndGrad out{0.0, Gradients(params.vocab_size(), params.dims())};
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const SentencePair* p : batch) {
    const PairEmbedding emb = encode(params, vocab, *p);
    const auto logits = classify(params, emb);
    auto prob = softmax(logits);
    const std::size_t y = index_of(p->label);
    const double m = std::max({logits[0], logits[1], logits[2]});
    const double lse =
        m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m) + std::exp(logits[2] - m));
    out.loss += inv_b * (lse - logits[y]);
    prob[y] -= 1.0;
    for (double& g : prob) g *= inv_b;
    const auto dz = backward_classifier(params, emb, prob, out.grads);
    backward_embedding(params, emb, dz, out.grads);
  }
  return out;
}

LossAndGrad ce_batch_loss(const EncoderParams& params, const Vocab& vocab,
                          std::span<const SentencePair> batch) {
  const auto ptrs = pointers(batch);
  return ce_batch_loss(params, vocab, std::span<const SentencePair* const>(ptrs));
}

double ce_loss(const EncoderParams& params, const Vocab& vocab,
               std::span<const SentencePair> pairs) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : pairs) {
    const auto logits = classify(params, encode(params, vocab, p));
    const double m = std::max({logits[0], logits[1], logits[2]});
    const double lse =
        m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m) + std::exp(logits[2] - m));
    total += lse - logits[index_of(p.label)];
  }
  return total / static_cast<double>(pairs.size());
}

nlohmann::ordered_json TrainReport::to_json() const {
  nlohmann::ordered_json j;
  j["cl_epoch_losses"] = cl_epoch_losses;
  j["ce_epoch_losses"] = ce_epoch_losses;
  j["ce_loss_before"] = ce_loss_before;
  j["ce_loss_after"] = ce_loss_after;
  j["contrastive_units"] = contrastive_units;
  j["ce_pairs"] = ce_pairs;
  j["skipped_batches"] = skipped_batches;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum));
  j["checksum"] = buf;
  j["wall_seconds"] = wall_seconds;
  return j;
}

namespace {

// Runs one epoch over `items` in a freshly shuffled order and returns the mean
// batch loss. `step` computes loss and gradients for one batch, or returns
// false to skip it.
template <typename T, typename Step>
double run_epoch(std::vector<const T*>& items, std::size_t batch_size, Rng& rng,
                 EncoderParams& params, double lr, std::size_t& skipped, Step step) {
  shuffle(std::span<const T*>(items), rng);
  double sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < items.size(); start += batch_size) {
    const std::size_t end = std::min(items.size(), start + batch_size);
    std::span<const T* const> batch(items.data() + start, end - start);
    LossAndGrad lg;
    if (!step(batch, lg)) {
      ++skipped;
      continue;
    }
    lg.grads.apply_sgd(params, lr);
    sum += lg.loss;
    ++batches;
  }
  return batches == 0 ? 0.0 : sum / static_cast<double>(batches);
}

}  // namespace

TrainReport train(EncoderParams& params, const Vocab& vocab,
                  std::span<const SentencePair> train_pairs, std::span<const AugmentedSet> sets,
                  const ContrastiveConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  TrainReport report;
  Rng rng(cfg.seed);

  const auto ce_pairs = labeled_training_pairs(train_pairs, sets);
  report.ce_pairs = ce_pairs.size();
  report.ce_loss_before = ce_loss(params, vocab, ce_pairs);

  if (cfg.mode == ContrastiveMode::Rcl && cfg.cl_epochs > 0) {
    std::vector<const AugmentedSet*> complete;
    for (const auto& s : sets) {
      if (s.complete()) complete.push_back(&s);
    }
    report.contrastive_units = complete.size();
    if (!complete.empty()) {
      for (int ep = 0; ep < cfg.cl_epochs; ++ep) {
        report.cl_epoch_losses.push_back(run_epoch(
            complete, cfg.batch_size, rng, params, cfg.cl_lr, report.skipped_batches,
            [&](std::span<const AugmentedSet* const> b, LossAndGrad& lg) {
              lg = rcl_batch_loss(params, vocab, b, cfg.temperature);
              return true;
            }));
      }
    }
  } else if (cfg.mode == ContrastiveMode::Scl && cfg.cl_epochs > 0) {
    std::vector<const SentencePair*> items;
    for (const auto& p : train_pairs) items.push_back(&p);
    report.contrastive_units = items.size();
    for (int ep = 0; ep < cfg.cl_epochs; ++ep) {
      report.cl_epoch_losses.push_back(run_epoch(
          items, cfg.batch_size, rng, params, cfg.cl_lr, report.skipped_batches,
          [&](std::span<const SentencePair* const> b, LossAndGrad& lg) {
            try {
              lg = scl_batch_loss(params, vocab, b, cfg.temperature);
            } catch (const TrainerError& e) {
              if (e.code_kind() == TrainerError::Code::DegenerateBatch) return false;
              throw;
            }
            return true;
          }));
    }
  }

  if (cfg.ce_epochs > 0 && !ce_pairs.empty()) {
    std::vector<const SentencePair*> items;
    items.reserve(ce_pairs.size());
    for (const auto& p : ce_pairs) items.push_back(&p);
    for (int ep = 0; ep < cfg.ce_epochs; ++ep) {
      report.ce_epoch_losses.push_back(run_epoch(
          items, cfg.batch_size, rng, params, cfg.ce_lr, report.skipped_batches,
          [&](std::span<const SentencePair* const> b, LossAndGrad& lg) {
            lg = ce_batch_loss(params, vocab, b);
            return true;
          }));
    }
  }

  report.ce_loss_after = ce_loss(params, vocab, ce_pairs);
  report.checksum = params.checksum();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace nlicf
