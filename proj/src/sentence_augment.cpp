#include "nlicf/sentence_augment.hpp"

#include <algorithm>

#include "nlicf/rng.hpp"
#include "nlicf/token_augment.hpp"

namespace nlicf {

using wn::RelationKind;

namespace {

constexpr std::array<RelationKind, 5> kAllKinds{RelationKind::Synonym, RelationKind::Hypernym,
                                                RelationKind::Hyponym, RelationKind::Antonym,
                                                RelationKind::CoHyponym};

bool related(const wn::Lexicon& lex, const std::string& a, const std::string& b) {
  for (RelationKind k : kAllKinds) {
    const auto c = lex.candidates(a, k);
    if (std::find(c.begin(), c.end(), b) != c.end()) return true;
  }
  return false;
}

}  // namespace

LexicalGenerator::LexicalGenerator(const wn::Lexicon& lex, const FrequencyTable& freq,
                                   std::uint64_t seed, std::uint64_t smoothing)
    : lex_(&lex), freq_(&freq), seed_(seed), smoothing_(smoothing) {}

std::optional<Generation> LexicalGenerator::generate(const SentencePair& pair, Label target,
                                                     Side side, std::uint64_t draw) const {
  Rng rng(mix_seed(seed_, draw));
  const std::string& revised = pair.side(side);
  const auto other_nouns = noun_tokens(pair.side(other_side(side)), *lex_);
  auto nouns = noun_tokens(revised, *lex_);
  shuffle(std::span<std::string>(nouns), rng);

  auto emit = [&](const std::string& word, const std::string& replacement,
                  std::vector<Substitution> chain) {
    Generation g;
    g.pair = pair;
    g.pair.side(side) = substitute_token(revised, word, replacement);
    g.pair.label = target;
    g.substituted = Substitution{word, replacement};
    g.chain = std::move(chain);
    return g;
  };

  for (const auto& w : nouns) {
    if (target == pair.label) {
      const std::array kinds{RelationKind::Synonym};
      const auto syn = gather_candidates(*lex_, w, kinds);
      if (!syn.empty()) {
        const auto& to = syn[sample_by_frequency(syn, *freq_, smoothing_, rng)];
        return emit(w, to, {Substitution{w, to}});
      }
    }

    std::string pivot = w;
    if (std::find(other_nouns.begin(), other_nouns.end(), w) == other_nouns.end()) {
      for (const auto& o : other_nouns) {
        if (related(*lex_, w, o)) {
          pivot = o;
          break;
        }
      }
    }
    const auto kinds = relation_kinds_for(target, side);
    auto cands = gather_candidates(*lex_, pivot, kinds);
    std::erase(cands, w);
    if (cands.empty()) continue;
    const auto& to = cands[sample_by_frequency(cands, *freq_, smoothing_, rng)];
    std::vector<Substitution> chain;
    if (pivot != w) chain.push_back(Substitution{w, pivot});
    chain.push_back(Substitution{pivot, to});
    return emit(w, to, std::move(chain));
  }
  return std::nullopt;
}

double confidence(const PairClassifier& classifier, const SentencePair& pair, Label target) {
  return classifier.probabilities(pair)[index_of(target)];
}

void SentenceAugmentConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
  if (!(coverage_goal > 0.0 && coverage_goal <= 1.0)) {
    throw ValidationError("coverage goal must lie in (0, 1]");
  }
  if (max_iterations <= 0) throw ValidationError("max iterations must be positive");
}

std::string_view stop_reason_name(StopReason r) {
  return r == StopReason::CoverageGoal ? "coverage_goal" : "max_iterations";
}

nlohmann::ordered_json IterationReport::to_json() const {
  nlohmann::ordered_json j;
  j["iteration"] = iteration;
  j["train_size"] = train_size;
  j["requested"] = requested;
  j["generated"] = generated;
  j["accepted"] = accepted;
  j["rejected"] = rejected;
  j["generator_failures"] = generator_failures;
  j["coverage"] = coverage;
  return j;
}

nlohmann::ordered_json LoopReport::to_json() const {
  nlohmann::ordered_json j;
  j["stop_reason"] = stop_reason_name(stop_reason);
  j["initial_coverage"] = initial_coverage;
  j["final_coverage"] = final_coverage;
  auto& its = j["iterations"] = nlohmann::ordered_json::array();
  for (const auto& it : iterations) its.push_back(it.to_json());
  j["generator_failure_count"] = failures.size();
  return j;
}

double coverage(std::span<const AugmentedSet> sets) {
  if (sets.empty()) return 0.0;
  const auto n = std::count_if(sets.begin(), sets.end(), [](const auto& s) { return s.complete(); });
  return static_cast<double>(n) / static_cast<double>(sets.size());
}

SentenceAugmentResult run_sentence_augmentation(
    std::span<const SentencePair> pairs, PairGenerator& generator, const ClassifierTrainer& trainer,
    const SentenceAugmentConfig& cfg,
    const std::function<void(const IterationReport&)>& on_iteration) {
  cfg.validate();
  if (pairs.empty()) throw ValidationError("sentence augmentation needs at least one pair");

  SentenceAugmentResult result;
  result.sets.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    AugmentedSet s;
    s.group_id = group_id_for('s', i);
    s.base = pairs[i];
    result.sets.push_back(std::move(s));
  }
  LoopReport& report = result.report;
  report.initial_coverage = coverage(result.sets);

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    IterationReport ir;
    ir.iteration = it;

    auto train_set = labeled_training_pairs(pairs, result.sets);
    ir.train_size = train_set.size();
    generator.train(train_set);
    const std::unique_ptr<PairClassifier> classifier = trainer(train_set, it);

    for (std::size_t i = 0; i < result.sets.size(); ++i) {
      AugmentedSet& s = result.sets[i];
      for (Label target : kLabels) {
        if (s.generated.contains(target)) continue;
        ++ir.requested;
        // Fresh draw per (iteration, pair, label); rejected slots are retried
        // with new randomness next iteration.
        const std::uint64_t draw =
            mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(it)), i * 3 + index_of(target));
        Rng side_rng(draw);
        const Side first = uniform01(side_rng) < 0.5 ? Side::Hypothesis : Side::Premise;
        Side used = first;
        auto gen = generator.generate(s.base, target, first, draw);
        if (!gen) {
          used = other_side(first);
          gen = generator.generate(s.base, target, used, draw);
        }
        if (!gen) {
          ++ir.generator_failures;
          report.failures.push_back({s.group_id, target, it});
          continue;
        }
        ++ir.generated;
        const double conf = confidence(*classifier, gen->pair, target);
        if (conf >= cfg.tau) {
          ++ir.accepted;
          s.generated.emplace(target, std::move(gen->pair));
          s.provenance.emplace(
              target, Provenance{Method::Sentence, used, std::move(gen->substituted), conf});
        } else {
          ++ir.rejected;
        }
      }
    }

    ir.coverage = coverage(result.sets);
    report.iterations.push_back(ir);
    if (on_iteration) on_iteration(ir);
    if (ir.coverage >= cfg.coverage_goal) {
      report.stop_reason = StopReason::CoverageGoal;
      break;
    }
    report.stop_reason = StopReason::MaxIterations;
  }
  report.final_coverage = coverage(result.sets);
  return result;
}

}  // namespace nlicf
