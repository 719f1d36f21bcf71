#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlicf/nli_corpus.hpp"
#include "nlicf/rng.hpp"
#include "nlicf/wn_lexicon.hpp"

namespace nlicf {

enum class SidePolicy { Premise, Hypothesis, Alternate };

std::string_view side_policy_name(SidePolicy p);
SidePolicy parse_side_policy(std::string_view name);  // throws ValidationError

struct TokenAugmentConfig {
  std::uint64_t seed = 0;
  SidePolicy side = SidePolicy::Alternate;
  std::uint64_t smoothing = 1;  // added to every candidate's frequency weight
};

// Relation kinds that turn a self-entailing copy into a pair of `target`
// label when the word is substituted on `side`.
std::vector<wn::RelationKind> relation_kinds_for(Label target, Side side);

// Copy of one sentence of `pair` into both slots, labeled Entailment.
SentencePair make_base(const SentencePair& pair, Side side);

// Side revised for the example at `index` (alternate: even -> hypothesis).
Side side_for_index(SidePolicy policy, std::size_t index);

// Articles, pronouns, auxiliaries and similar words that a lexicon may list
// as nouns but should never be substituted.
bool is_stop_token(std::string_view token);

// Distinct substitutable nouns of `sentence`, in order of first appearance.
std::vector<std::string> noun_tokens(std::string_view sentence, const wn::Lexicon& lex);

// Replaces every occurrence of token `from` (compared after tokenization) by
// `to`, keeping surrounding punctuation and leading capitalization.
std::string substitute_token(std::string_view sentence, std::string_view from,
                             std::string_view to);

// Candidates for `word` under all of `kinds`, concatenated in order and
// deduplicated; lemmas that would not survive tokenization unchanged are
// dropped.
std::vector<std::string> gather_candidates(const wn::Lexicon& lex, std::string_view word,
                                           std::span<const wn::RelationKind> kinds);

// Draws index i with probability proportional to freq(c_i) + smoothing.
std::size_t sample_by_frequency(std::span<const std::string> candidates,
                                const FrequencyTable& freq, std::uint64_t smoothing, Rng& rng);

struct TokenAugmentResult {
  AugmentedSet set;
  bool no_nouns = false;  // sentence had no lexicon nouns; generated is empty
};

TokenAugmentResult augment_token(const SentencePair& pair, std::string group_id, Side side,
                                 const wn::Lexicon& lex, const FrequencyTable& freq,
                                 const TokenAugmentConfig& cfg, Rng& rng);

struct TokenAugmentSummary {
  std::size_t pairs = 0;
  std::size_t complete = 0;
  std::size_t generated = 0;
  std::size_t no_nouns = 0;
};

// Augments every pair; group i uses side_for_index(cfg.side, i) and its own
// RNG stream seeded from (cfg.seed, i).
std::vector<AugmentedSet> augment_corpus_token(std::span<const SentencePair> pairs,
                                               const wn::Lexicon& lex,
                                               const FrequencyTable& freq,
                                               const TokenAugmentConfig& cfg,
                                               TokenAugmentSummary* summary = nullptr);

std::string group_id_for(char prefix, std::size_t index);

}  // namespace nlicf
