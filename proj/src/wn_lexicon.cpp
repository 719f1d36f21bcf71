#include "nlicf/wn_lexicon.hpp"

#include "nlicf/rng.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <unordered_set>

namespace nlicf::wn {

namespace {

std::string code_name(LexiconError::Code code) {
  switch (code) {
    case LexiconError::Code::MalformedLine: return "MalformedLine";
    case LexiconError::Code::DanglingPointer: return "DanglingPointer";
    case LexiconError::Code::Io: return "Io";
  }
  return "Unknown";
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<unsigned long> parse_uint(std::string_view s, int base) {
  unsigned long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool skippable(std::string_view line) {
  if (line.starts_with("  ")) return true;  // license header
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  throw LexiconError(LexiconError::Code::MalformedLine, line_no, "", what);
}

struct PendingAntonym {
  std::size_t source;       // synset index
  std::string target;       // synset id
  unsigned source_word;     // 1-based, 0 = whole synset
  unsigned target_word;
};

struct RawEdges {
  std::vector<std::string> hyper;
  std::vector<std::string> hypo;
};

void push_unique(std::vector<std::string>& v, std::unordered_set<std::string>& seen,
                 const std::string& s) {
  if (seen.insert(s).second) v.push_back(s);
}

}  // namespace

std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::Synonym: return "synonym";
    case RelationKind::Hypernym: return "hypernym";
    case RelationKind::Hyponym: return "hyponym";
    case RelationKind::Antonym: return "antonym";
    case RelationKind::CoHyponym: return "co-hyponym";
  }
  return "?";
}

LexiconError::LexiconError(Code code, std::size_t line, std::string offset,
                           const std::string& detail)
    : Error("wn_lexicon", code_name(code), detail), code_(code), line_(line),
      offset_(std::move(offset)) {}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Lexicon Lexicon::parse(std::istream& index_noun, std::istream& data_noun) {
  Lexicon lex;
  std::vector<RawEdges> raw;
  std::vector<PendingAntonym> antonyms;

  // data.noun:
  // offset lex_filenum ss_type w_cnt word lex_id [word lex_id...] p_cnt
  //   [ptr_symbol offset pos source/target...] | gloss
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(data_noun, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::string_view body(line);
    if (auto bar = body.find('|'); bar != std::string_view::npos) body = body.substr(0, bar);
    const auto tok = split_ws(body);
    if (tok.size() < 6) malformed(line_no, "too few fields in data record");
    if (!parse_uint(tok[0], 10)) malformed(line_no, "bad synset offset");
    if (tok[2] != "n") malformed(line_no, "not a noun synset");
    const auto w_cnt = parse_uint(tok[3], 16);
    if (!w_cnt || *w_cnt == 0) malformed(line_no, "bad word count");
    std::size_t pos = 4;
    if (pos + 2 * *w_cnt >= tok.size()) malformed(line_no, "word list overruns record");

    Synset s;
    s.id = std::string(tok[0]);
    for (unsigned long i = 0; i < *w_cnt; ++i, pos += 2) s.lemmas.emplace_back(tok[pos]);
    const auto p_cnt = parse_uint(tok[pos++], 10);
    if (!p_cnt) malformed(line_no, "bad pointer count");
    if (pos + 4 * *p_cnt > tok.size()) malformed(line_no, "pointer list overruns record");

    RawEdges edges;
    const std::size_t self = lex.synsets_.size();
    for (unsigned long i = 0; i < *p_cnt; ++i, pos += 4) {
      const auto symbol = tok[pos];
      const auto target = tok[pos + 1];
      const auto target_pos = tok[pos + 2];
      const auto st = tok[pos + 3];
      if (!parse_uint(target, 10) || st.size() != 4 || !parse_uint(st, 16)) {
        malformed(line_no, "bad pointer");
      }
      if (target_pos != "n") continue;
      if (symbol == "@" || symbol == "@i") {
        edges.hyper.emplace_back(target);
      } else if (symbol == "~" || symbol == "~i") {
        edges.hypo.emplace_back(target);
      } else if (symbol == "!") {
        antonyms.push_back({self, std::string(target),
                            static_cast<unsigned>(*parse_uint(st.substr(0, 2), 16)),
                            static_cast<unsigned>(*parse_uint(st.substr(2, 2), 16))});
      }
    }
    if (lex.by_id_.contains(s.id)) malformed(line_no, "duplicate synset offset " + s.id);
    lex.by_id_.emplace(s.id, self);
    lex.synsets_.push_back(std::move(s));
    raw.push_back(std::move(edges));
  }

  auto require = [&](const std::string& id) -> std::size_t {
    auto it = lex.by_id_.find(id);
    if (it == lex.by_id_.end()) {
      throw LexiconError(LexiconError::Code::DanglingPointer, 0, id,
                         "pointer target " + id + " not found");
    }
    return it->second;
  };

  // Hypernym and hyponym lists are the union of both pointer directions, so
  // the edge relation is symmetric even if the file lists only one side.
  const std::size_t n = lex.synsets_.size();
  std::vector<std::unordered_set<std::string>> seen_hyper(n), seen_hypo(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : raw[i].hyper) {
      require(t);
      push_unique(lex.synsets_[i].hypernyms, seen_hyper[i], t);
    }
    for (const auto& t : raw[i].hypo) {
      require(t);
      push_unique(lex.synsets_[i].hyponyms, seen_hypo[i], t);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& id = lex.synsets_[i].id;
    for (const auto& t : raw[i].hyper) {
      const std::size_t j = require(t);
      push_unique(lex.synsets_[j].hyponyms, seen_hypo[j], id);
    }
    for (const auto& t : raw[i].hypo) {
      const std::size_t j = require(t);
      push_unique(lex.synsets_[j].hypernyms, seen_hyper[j], id);
    }
  }

  for (const auto& a : antonyms) {
    const std::size_t j = require(a.target);
    Synset& src = lex.synsets_[a.source];
    const Synset& dst = lex.synsets_[j];
    auto pick = [](const Synset& s, unsigned word) {
      std::vector<std::string> out;
      if (word == 0) {
        for (const auto& l : s.lemmas) out.push_back(to_lower(l));
      } else if (word <= s.lemmas.size()) {
        out.push_back(to_lower(s.lemmas[word - 1]));
      }
      return out;
    };
    for (const auto& from : pick(src, a.source_word)) {
      auto& list = src.antonym_lemmas[from];
      for (const auto& to : pick(dst, a.target_word)) {
        if (std::find(list.begin(), list.end(), to) == list.end()) list.push_back(to);
      }
    }
  }

  // index.noun:
  // lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt tagsense_cnt offsets...
  line_no = 0;
  while (std::getline(index_noun, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto tok = split_ws(line);
    if (tok.size() < 6) malformed(line_no, "too few fields in index record");
    if (tok[1] != "n") malformed(line_no, "not a noun index entry");
    const auto synset_cnt = parse_uint(tok[2], 10);
    const auto p_cnt = parse_uint(tok[3], 10);
    if (!synset_cnt || !p_cnt) malformed(line_no, "bad counts in index record");
    const std::size_t first_offset = 4 + *p_cnt + 2;
    if (first_offset + *synset_cnt != tok.size()) malformed(line_no, "offset count mismatch");
    std::vector<std::string> ids;
    for (std::size_t i = first_offset; i < tok.size(); ++i) {
      std::string id(tok[i]);
      if (!parse_uint(id, 10)) malformed(line_no, "bad offset in index record");
      require(id);
      ids.push_back(std::move(id));
    }
    auto& slot = lex.lemma_index_[to_lower(tok[0])];
    for (auto& id : ids) {
      if (std::find(slot.begin(), slot.end(), id) == slot.end()) slot.push_back(std::move(id));
    }
  }
  return lex;
}

Lexicon Lexicon::load_dir(const std::filesystem::path& dir) {
  std::ifstream index(dir / "index.noun");
  std::ifstream data(dir / "data.noun");
  if (!index || !data) {
    throw LexiconError(LexiconError::Code::Io, 0, "",
                       "cannot open index.noun/data.noun in " + dir.string());
  }
  return parse(index, data);
}

const Synset* Lexicon::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &synsets_[it->second];
}

std::span<const std::string> Lexicon::senses(std::string_view lemma) const {
  auto it = lemma_index_.find(to_lower(lemma));
  if (it == lemma_index_.end()) return {};
  return it->second;
}

const Synset* Lexicon::first_sense(std::string_view word) const {
  auto s = senses(word);
  return s.empty() ? nullptr : find(s.front());
}

bool Lexicon::is_noun(std::string_view word) const {
  return lemma_index_.find(to_lower(word)) != lemma_index_.end();
}

std::vector<std::string> Lexicon::candidates(std::string_view word, RelationKind kind) const {
  const std::string query = to_lower(word);
  std::vector<std::string> out;
  const Synset* sense = first_sense(query);
  if (query.empty() || sense == nullptr) return out;

  std::unordered_set<std::string> seen;
  auto add = [&](std::string_view lemma) {
    std::string l = to_lower(lemma);
    if (l == query || l.find('_') != std::string::npos) return;
    if (seen.insert(l).second) out.push_back(std::move(l));
  };
  auto add_synset = [&](const std::string& id) {
    for (const auto& l : find(id)->lemmas) add(l);
  };

  switch (kind) {
    case RelationKind::Synonym:
      for (const auto& l : sense->lemmas) add(l);
      break;
    case RelationKind::Hypernym:
      for (const auto& id : sense->hypernyms) add_synset(id);
      break;
    case RelationKind::Hyponym:
      for (const auto& id : sense->hyponyms) add_synset(id);
      break;
    case RelationKind::Antonym:
      if (auto it = sense->antonym_lemmas.find(query); it != sense->antonym_lemmas.end()) {
        for (const auto& l : it->second) add(l);
      }
      break;
    case RelationKind::CoHyponym:
      for (const auto& h : sense->hypernyms) {
        for (const auto& sib : find(h)->hyponyms) {
          if (sib != sense->id) add_synset(sib);
        }
      }
      break;
  }
  return out;
}

SymmetryCheck check_edge_symmetry(const Lexicon& lex, std::size_t sample, std::uint64_t seed) {
  const auto& all = lex.synsets();
  SymmetryCheck out;
  auto has = [](const std::vector<std::string>& v, const std::string& id) {
    return std::find(v.begin(), v.end(), id) != v.end();
  };
  auto check = [&](const Synset& s) {
    ++out.sampled;
    for (const auto& h : s.hypernyms) {
      ++out.edges;
      const Synset* p = lex.find(h);
      if (!p || !has(p->hyponyms, s.id)) ++out.violations;
    }
    for (const auto& h : s.hyponyms) {
      ++out.edges;
      const Synset* c = lex.find(h);
      if (!c || !has(c->hypernyms, s.id)) ++out.violations;
    }
  };
  if (sample >= all.size()) {
    for (const auto& s : all) check(s);
  } else {
    Rng rng(seed);
    for (std::size_t i = 0; i < sample; ++i) check(all[uniform_index(rng, all.size())]);
  }
  return out;
}

}  // namespace nlicf::wn
