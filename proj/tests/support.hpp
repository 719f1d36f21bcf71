#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlicf/contrastive_trainer.hpp"
#include "nlicf/encoder_model.hpp"
#include "nlicf/nli_corpus.hpp"
#include "nlicf/rng.hpp"

namespace nlicf::test {

inline const std::vector<std::string> kWords = {"dog", "cat", "animal", "poodle", "man", "woman",
                                                "car", "sits", "runs", "park", "river"};

inline std::string random_sentence(Rng& rng, std::size_t len) {
  std::string s = "The";
  for (std::size_t i = 0; i < len; ++i) s += " " + kWords[uniform_index(rng, kWords.size())];
  return s + ".";
}

inline SentencePair random_pair(Rng& rng) {
  return {random_sentence(rng, 1 + uniform_index(rng, 4)), random_sentence(rng, 1 + uniform_index(rng, 4)),
          kLabels[uniform_index(rng, 3)]};
}

inline Vocab fixture_vocab() {
  std::vector<std::string> tokens{"<pad>", "<sep>", "<unk>", "the"};
  tokens.insert(tokens.end(), kWords.begin(), kWords.end());
  return Vocab::from_tokens(tokens);
}

// Complete set whose members are random pairs labeled by role.
inline AugmentedSet random_set(Rng& rng, const std::string& id) {
  AugmentedSet s;
  s.group_id = id;
  s.base = random_pair(rng);
  for (Label l : kLabels) {
    SentencePair p = random_pair(rng);
    p.label = l;
    s.generated.emplace(l, p);
    s.provenance.emplace(l, Provenance{Method::Token, Side::Hypothesis, std::nullopt, std::nullopt});
  }
  return s;
}

struct GradCheck {
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
};

// Central differences on `n` coordinates drawn across all parameter blocks,
// compared against the analytic gradient returned by `f`.
inline GradCheck check_gradient(EncoderParams params,
                                const std::function<LossAndGrad(const EncoderParams&)>& f,
                                std::size_t n, std::uint64_t seed, double h = 1e-5) {
  const LossAndGrad analytic = f(params);
  const auto g = analytic.grads.values().blocks();
  auto p = params.blocks();
  Rng rng(seed);
  GradCheck out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = uniform_index(rng, p.size());
    const std::size_t k = uniform_index(rng, p[b].size());
    const double saved = p[b][k];
    p[b][k] = saved + h;
    const double up = f(params).loss;
    p[b][k] = saved - h;
    const double down = f(params).loss;
    p[b][k] = saved;
    const double numeric = (up - down) / (2 * h);
    const double a = g[b][k];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    out.max_rel_error = std::max(out.max_rel_error, rel);
    ++out.coordinates;
  }
  return out;
}

// Every entry drawn from U(-1, 1).
inline EncoderParams random_params(std::size_t vocab, const Dims& d, std::uint64_t seed) {
  EncoderParams p = EncoderParams::zeros(vocab, d);
  Rng rng(seed);
  for (auto block : p.blocks()) {
    for (double& v : block) v = uniform(rng, -1.0, 1.0);
  }
  return p;
}

// Step-by-step forward pass written out with plain loops.
inline std::vector<double> oracle_z(const EncoderParams& p, const std::vector<std::size_t>& ids,
                                    std::vector<double>* logits = nullptr) {
  const std::size_t d = p.w1.rows, h = p.w1.cols, e = p.w2.cols;
  std::vector<double> pooled(d, 0.0);
  for (std::size_t id : ids) {
    for (std::size_t k = 0; k < d; ++k) pooled[k] += p.embedding.data[id * d + k];
  }
  for (double& x : pooled) x /= static_cast<double>(ids.size());
  std::vector<double> hidden(h);
  for (std::size_t j = 0; j < h; ++j) {
    double s = p.b1[j];
    for (std::size_t k = 0; k < d; ++k) s += pooled[k] * p.w1.data[k * h + j];
    hidden[j] = std::tanh(s);
  }
  std::vector<double> z(e);
  for (std::size_t j = 0; j < e; ++j) {
    double s = p.b2[j];
    for (std::size_t k = 0; k < h; ++k) s += hidden[k] * p.w2.data[k * e + j];
    z[j] = s;
  }
  if (logits) {
    logits->assign(3, 0.0);
    for (std::size_t c = 0; c < 3; ++c) {
      double s = p.bc[c];
      for (std::size_t k = 0; k < e; ++k) s += z[k] * p.wc.data[k * 3 + c];
      (*logits)[c] = s;
    }
  }
  return z;
}

}  // namespace nlicf::test
