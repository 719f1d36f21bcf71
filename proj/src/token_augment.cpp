#include "nlicf/token_augment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <unordered_set>

namespace nlicf {

using wn::RelationKind;

std::string_view side_policy_name(SidePolicy p) {
  switch (p) {
    case SidePolicy::Premise: return "premise";
    case SidePolicy::Hypothesis: return "hypothesis";
    case SidePolicy::Alternate: return "alternate";
  }
  return "?";
}

SidePolicy parse_side_policy(std::string_view name) {
  if (name == "premise") return SidePolicy::Premise;
  if (name == "hypothesis") return SidePolicy::Hypothesis;
  if (name == "alternate") return SidePolicy::Alternate;
  throw ValidationError("unknown side '" + std::string(name) + "'");
}

std::vector<RelationKind> relation_kinds_for(Label target, Side side) {
  switch (target) {
    case Label::Entailment:
      return side == Side::Premise
                 ? std::vector{RelationKind::Synonym, RelationKind::Hyponym}
                 : std::vector{RelationKind::Synonym, RelationKind::Hypernym};
    case Label::Neutral:
      return side == Side::Premise ? std::vector{RelationKind::Hypernym}
                                   : std::vector{RelationKind::Hyponym};
    case Label::Contradiction:
      return {RelationKind::Antonym, RelationKind::CoHyponym};
  }
  return {};
}

SentencePair make_base(const SentencePair& pair, Side side) {
  const std::string& s = pair.side(side);
  return SentencePair{s, s, Label::Entailment};
}

Side side_for_index(SidePolicy policy, std::size_t index) {
  switch (policy) {
    case SidePolicy::Premise: return Side::Premise;
    case SidePolicy::Hypothesis: return Side::Hypothesis;
    case SidePolicy::Alternate: return index % 2 == 0 ? Side::Hypothesis : Side::Premise;
  }
  return Side::Hypothesis;
}

bool is_stop_token(std::string_view token) {
  static const std::unordered_set<std::string_view> kStop = {
      "a", "an", "the", "this", "that", "these", "those", "some", "any", "no", "not",
      "i", "me", "my", "mine", "you", "your", "he", "him", "his", "she", "her", "hers",
      "it", "its", "we", "us", "our", "they", "them", "their", "one", "ones",
      "is", "are", "was", "were", "be", "been", "being", "am", "do", "does", "did",
      "has", "have", "had", "will", "would", "can", "could", "shall", "should", "may",
      "might", "must", "there", "here", "and", "or", "but", "of", "to", "in", "on", "at",
      "by", "for", "with", "as", "so", "if"};
  return kStop.contains(token);
}

std::vector<std::string> noun_tokens(std::string_view sentence, const wn::Lexicon& lex) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(sentence)) {
    if (is_stop_token(tok) || !lex.is_noun(tok)) continue;
    if (std::find(out.begin(), out.end(), tok) == out.end()) out.push_back(std::move(tok));
  }
  return out;
}

std::string substitute_token(std::string_view sentence, std::string_view from,
                             std::string_view to) {
  std::string out;
  out.reserve(sentence.size() + to.size());
  std::size_t i = 0;
  while (i < sentence.size()) {
    if (std::isspace(static_cast<unsigned char>(sentence[i]))) {
      out.push_back(sentence[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < sentence.size() && !std::isspace(static_cast<unsigned char>(sentence[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && std::ispunct(static_cast<unsigned char>(sentence[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(sentence[e - 1]))) --e;
    const std::string_view core = sentence.substr(b, e - b);
    if (!core.empty() && wn::to_lower(core) == from) {
      out.append(sentence.substr(i, b - i));
      std::string repl(to);
      if (std::isupper(static_cast<unsigned char>(core.front())) && !repl.empty()) {
        repl.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(repl.front())));
      }
      out.append(repl);
      out.append(sentence.substr(e, j - e));
    } else {
      out.append(sentence.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

std::vector<std::string> gather_candidates(const wn::Lexicon& lex, std::string_view word,
                                           std::span<const RelationKind> kinds) {
  std::vector<std::string> out;
  for (RelationKind k : kinds) {
    for (auto& c : lex.candidates(word, k)) {
      const auto toks = tokenize(c);
      if (toks.size() != 1 || toks.front() != c || is_stop_token(c)) continue;
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
    }
  }
  return out;
}

std::size_t sample_by_frequency(std::span<const std::string> candidates,
                                const FrequencyTable& freq, std::uint64_t smoothing, Rng& rng) {
  std::vector<double> w;
  w.reserve(candidates.size());
  for (const auto& c : candidates) w.push_back(static_cast<double>(freq.count(c) + smoothing));
  return weighted_index(w, rng);
}

TokenAugmentResult augment_token(const SentencePair& pair, std::string group_id, Side side,
                                 const wn::Lexicon& lex, const FrequencyTable& freq,
                                 const TokenAugmentConfig& cfg, Rng& rng) {
  TokenAugmentResult result;
  result.set.group_id = std::move(group_id);
  result.set.base = make_base(pair, side);
  const std::string& sentence = result.set.base.side(side);

  const auto nouns = noun_tokens(sentence, lex);
  if (nouns.empty()) {
    result.no_nouns = true;
    return result;
  }

  for (Label target : kLabels) {
    const auto kinds = relation_kinds_for(target, side);
    // Uniform first pick, then the remaining nouns in random order.
    std::vector<std::string> order = nouns;
    shuffle(std::span<std::string>(order), rng);
    for (const auto& noun : order) {
      const auto cands = gather_candidates(lex, noun, kinds);
      if (cands.empty()) continue;
      const std::string& chosen = cands[sample_by_frequency(cands, freq, cfg.smoothing, rng)];
      SentencePair revised = result.set.base;
      revised.side(side) = substitute_token(sentence, noun, chosen);
      revised.label = target;
      result.set.generated.emplace(target, std::move(revised));
      result.set.provenance.emplace(
          target, Provenance{Method::Token, side, Substitution{noun, chosen}, std::nullopt});
      break;
    }
  }
  return result;
}

std::string group_id_for(char prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, index);
  return buf;
}

std::vector<AugmentedSet> augment_corpus_token(std::span<const SentencePair> pairs,
                                               const wn::Lexicon& lex,
                                               const FrequencyTable& freq,
                                               const TokenAugmentConfig& cfg,
                                               TokenAugmentSummary* summary) {
  std::vector<AugmentedSet> out;
  out.reserve(pairs.size());
  TokenAugmentSummary s;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Rng rng(mix_seed(cfg.seed, i));
    auto r = augment_token(pairs[i], group_id_for('t', i), side_for_index(cfg.side, i), lex, freq,
                           cfg, rng);
    ++s.pairs;
    if (r.no_nouns) ++s.no_nouns;
    if (r.set.complete()) ++s.complete;
    s.generated += r.set.generated.size();
    out.push_back(std::move(r.set));
  }
  if (summary) *summary = s;
  return out;
}

}  // namespace nlicf
