#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nlicf/error.hpp"

namespace nlicf::wn {

enum class RelationKind { Synonym, Hypernym, Hyponym, Antonym, CoHyponym };

std::string_view to_string(RelationKind kind);

class LexiconError : public Error {
 public:
  enum class Code { MalformedLine, DanglingPointer, Io };

  LexiconError(Code code, std::size_t line, std::string offset, const std::string& detail);

  Code code_kind() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& offset() const noexcept { return offset_; }

 private:
  Code code_;
  std::size_t line_;
  std::string offset_;
};

struct Synset {
  std::string id;                   // synset offset, kept as written
  std::vector<std::string> lemmas;  // as written in data.noun
  std::vector<std::string> hypernyms;
  std::vector<std::string> hyponyms;
  std::map<std::string, std::vector<std::string>> antonym_lemmas;  // lowercase keys

  bool operator==(const Synset&) const = default;
};

// Noun relation graph parsed from WNDB index.noun / data.noun. Immutable
// after construction.
class Lexicon {
 public:
  Lexicon() = default;

  static Lexicon parse(std::istream& index_noun, std::istream& data_noun);
  static Lexicon load_dir(const std::filesystem::path& dir);

  std::size_t size() const noexcept { return synsets_.size(); }
  const std::vector<Synset>& synsets() const noexcept { return synsets_; }
  const Synset* find(std::string_view id) const;

  // Sense list for a lemma, in index-file order. Empty if unknown.
  std::span<const std::string> senses(std::string_view lemma) const;
  const Synset* first_sense(std::string_view word) const;

  bool is_noun(std::string_view word) const;

  // Substitution candidates for `word` under `kind`, taken from its first
  // listed sense: lowercase, single-word, deduplicated, query word removed.
  std::vector<std::string> candidates(std::string_view word, RelationKind kind) const;

  const std::map<std::string, std::vector<std::string>, std::less<>>& lemma_index() const noexcept {
    return lemma_index_;
  }

  bool operator==(const Lexicon& other) const {
    return synsets_ == other.synsets_ && lemma_index_ == other.lemma_index_;
  }

 private:
  std::vector<Synset> synsets_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::string, std::vector<std::string>, std::less<>> lemma_index_;
};

std::string to_lower(std::string_view s);

struct SymmetryCheck {
  std::size_t sampled = 0;
  std::size_t edges = 0;
  std::size_t violations = 0;  // hypernym/hyponym edges without their reverse
};

// Checks every synset when `sample` >= size(), else `sample` synsets drawn
// with replacement from `seed`.
SymmetryCheck check_edge_symmetry(const Lexicon& lex, std::size_t sample, std::uint64_t seed);

}  // namespace nlicf::wn
