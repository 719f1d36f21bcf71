#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nlicf/nli_corpus.hpp"

namespace nlicf::synth {

// How the hypothesis noun relates to the premise noun in a generated pair.
enum class Relation { Identity, Synonym, Hypernym, Hyponym, Antonym, CoHyponym };
std::string_view relation_name(Relation r);
Label label_for(Relation r);

struct SyntheticPair {
  SentencePair pair;
  std::string premise_noun;
  std::string hypothesis_noun;
  Relation relation = Relation::Identity;
  std::string verb;
};

struct SyntheticCorpus {
  std::string index_noun;  // WNDB text of the fixture lexicon
  std::string data_noun;
  std::vector<SyntheticPair> train;
  std::vector<SyntheticPair> test_original;
  std::vector<SyntheticPair> test_rp;  // premise revised to flip the label
  std::vector<SyntheticPair> test_rh;  // hypothesis revised to flip the label
};

struct SyntheticOptions {
  // Probability that a pair's verb comes from the verb group tied to its
  // label: a surface cue that counterfactual revisions break.
  double cue_strength = 0.85;
};

// Fixture lexicon (31 noun synsets) in WNDB format; independent of the seed.
std::string fixture_index_noun();
std::string fixture_data_noun();

SyntheticCorpus make_synthetic(std::uint64_t seed, std::size_t n_train, std::size_t n_test,
                               const SyntheticOptions& options = {});

std::vector<SentencePair> pairs_of(const std::vector<SyntheticPair>& items);

// Writes wordnet/{index,data}.noun, train.jsonl and test_{original,rp,rh,rp_rh}.jsonl.
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace nlicf::synth
