#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nlicf/error.hpp"

namespace nlicf {

enum class Label : int { Entailment = 0, Neutral = 1, Contradiction = 2 };

inline constexpr std::array<Label, 3> kLabels{Label::Entailment, Label::Neutral,
                                              Label::Contradiction};

constexpr std::size_t index_of(Label l) noexcept { return static_cast<std::size_t>(l); }
std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view name);  // case-insensitive

enum class Side { Premise, Hypothesis };
std::string_view side_name(Side s);
std::optional<Side> parse_side(std::string_view name);
constexpr Side other_side(Side s) noexcept {
  return s == Side::Premise ? Side::Hypothesis : Side::Premise;
}

enum class Method { Token, Sentence };
std::string_view method_name(Method m);

struct SentencePair {
  std::string premise;
  std::string hypothesis;
  Label label = Label::Entailment;

  const std::string& side(Side s) const { return s == Side::Premise ? premise : hypothesis; }
  std::string& side(Side s) { return s == Side::Premise ? premise : hypothesis; }

  bool operator==(const SentencePair&) const = default;
};

struct Substitution {
  std::string from;
  std::string to;
  bool operator==(const Substitution&) const = default;
};

struct Provenance {
  Method method = Method::Token;
  Side revised_side = Side::Hypothesis;
  std::optional<Substitution> substituted;
  // Classifier confidence in the target label at acceptance time
  // (sentence-level generation only).
  std::optional<double> confidence;

  bool operator==(const Provenance&) const = default;
};

// One base pair plus up to one generated pair per target label.
struct AugmentedSet {
  std::string group_id;
  SentencePair base;
  std::map<Label, SentencePair> generated;
  std::map<Label, Provenance> provenance;

  bool complete() const noexcept { return generated.size() == kLabels.size(); }
  bool operator==(const AugmentedSet&) const = default;
};

class CorpusError : public Error {
 public:
  enum class Code { BadLabel, MissingField, EmptySentence, MalformedRecord, SchemaViolation };

  CorpusError(Code code, std::size_t line, const std::string& detail);

  Code code_kind() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Code code_;
  std::size_t line_;
};

// Lowercase, split on whitespace, strip punctuation from token edges, drop
// empty tokens.
std::vector<std::string> tokenize(std::string_view text);

class FrequencyTable {
 public:
  void add(std::string_view token, std::uint64_t n = 1);
  std::uint64_t count(std::string_view token) const;
  std::uint64_t total() const noexcept { return total_; }
  std::size_t distinct() const noexcept { return counts_.size(); }
  const std::unordered_map<std::string, std::uint64_t>& counts() const noexcept {
    return counts_;
  }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

FrequencyTable build_frequency(std::span<const SentencePair> pairs);

std::vector<SentencePair> load_pairs(std::istream& in);
std::vector<SentencePair> load_pairs_file(const std::string& path);
void save_pairs(std::ostream& out, std::span<const SentencePair> pairs);

void save_sets(std::ostream& out, std::span<const AugmentedSet> sets);
std::vector<AugmentedSet> load_sets(std::istream& in);

// Originals followed by every generated pair, each with its assigned label.
std::vector<SentencePair> labeled_training_pairs(std::span<const SentencePair> originals,
                                                 std::span<const AugmentedSet> sets);

// True when the tokenized `revised` sentence differs from `base` only at the
// positions holding `sub.from` (which now hold `sub.to`).
bool single_token_delta(std::string_view base, std::string_view revised,
                        const Substitution& sub);

}  // namespace nlicf
