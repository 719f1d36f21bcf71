#include "nlicf/nli_corpus.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

namespace nlicf {

using ojson = nlohmann::ordered_json;

namespace {

std::string code_name(CorpusError::Code c) {
  switch (c) {
    case CorpusError::Code::BadLabel: return "BadLabel";
    case CorpusError::Code::MissingField: return "MissingField";
    case CorpusError::Code::EmptySentence: return "EmptySentence";
    case CorpusError::Code::MalformedRecord: return "MalformedRecord";
    case CorpusError::Code::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

bool blank(std::string_view s) {
  for (unsigned char c : s) {
    if (!std::isspace(c)) return false;
  }
  return true;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

ojson parse_line(const std::string& line, std::size_t line_no) {
  try {
    ojson j = ojson::parse(line);
    if (!j.is_object()) throw CorpusError(CorpusError::Code::MalformedRecord, line_no, "not an object");
    return j;
  } catch (const ojson::parse_error& e) {
    throw CorpusError(CorpusError::Code::MalformedRecord, line_no, e.what());
  }
}

std::string string_field(const ojson& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw CorpusError(CorpusError::Code::MissingField, line_no, std::string("field '") + key + "'");
  }
  return it->get<std::string>();
}

SentencePair pair_from_json(const ojson& j, std::size_t line_no) {
  SentencePair p;
  p.premise = string_field(j, "premise", line_no);
  p.hypothesis = string_field(j, "hypothesis", line_no);
  const std::string label = string_field(j, "label", line_no);
  auto l = parse_label(label);
  if (!l) throw CorpusError(CorpusError::Code::BadLabel, line_no, "label '" + label + "'");
  p.label = *l;
  if (blank(p.premise) || blank(p.hypothesis)) {
    throw CorpusError(CorpusError::Code::EmptySentence, line_no, "empty premise or hypothesis");
  }
  return p;
}

}  // namespace

CorpusError::CorpusError(Code code, std::size_t line, const std::string& detail)
    : Error("nli_corpus", code_name(code), "line " + std::to_string(line) + ": " + detail),
      code_(code),
      line_(line) {}

std::string_view label_name(Label l) {
  switch (l) {
    case Label::Entailment: return "entailment";
    case Label::Neutral: return "neutral";
    case Label::Contradiction: return "contradiction";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view name) {
  const std::string n = lower_ascii(name);
  for (Label l : kLabels) {
    if (n == label_name(l)) return l;
  }
  return std::nullopt;
}

std::string_view side_name(Side s) { return s == Side::Premise ? "premise" : "hypothesis"; }

std::optional<Side> parse_side(std::string_view name) {
  if (name == "premise") return Side::Premise;
  if (name == "hypothesis") return Side::Hypothesis;
  return std::nullopt;
}

std::string_view method_name(Method m) { return m == Method::Token ? "token" : "sentence"; }

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && std::ispunct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > b) out.push_back(lower_ascii(text.substr(b, e - b)));
    i = j;
  }
  return out;
}

void FrequencyTable::add(std::string_view token, std::uint64_t n) {
  counts_[std::string(token)] += n;
  total_ += n;
}

std::uint64_t FrequencyTable::count(std::string_view token) const {
  auto it = counts_.find(std::string(token));
  return it == counts_.end() ? 0 : it->second;
}

FrequencyTable build_frequency(std::span<const SentencePair> pairs) {
  FrequencyTable t;
  for (const auto& p : pairs) {
    for (const auto& tok : tokenize(p.premise)) t.add(tok);
    for (const auto& tok : tokenize(p.hypothesis)) t.add(tok);
  }
  return t;
}

std::vector<SentencePair> load_pairs(std::istream& in) {
  std::vector<SentencePair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    out.push_back(pair_from_json(parse_line(line, line_no), line_no));
  }
  return out;
}

std::vector<SentencePair> load_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("nli_corpus", "Io", "cannot open " + path);
  return load_pairs(in);
}

void save_pairs(std::ostream& out, std::span<const SentencePair> pairs) {
  for (const auto& p : pairs) {
    ojson j;
    j["premise"] = p.premise;
    j["hypothesis"] = p.hypothesis;
    j["label"] = label_name(p.label);
    out << j.dump() << '\n';
  }
}

void save_sets(std::ostream& out, std::span<const AugmentedSet> sets) {
  for (const auto& s : sets) {
    auto member = [&](std::string_view role, const SentencePair& p, const Provenance* prov) {
      ojson j;
      j["group_id"] = s.group_id;
      j["role"] = role;
      j["premise"] = p.premise;
      j["hypothesis"] = p.hypothesis;
      j["label"] = label_name(p.label);
      if (prov == nullptr) {
        j["method"] = nullptr;
        j["revised_side"] = nullptr;
        j["substituted"] = nullptr;
      } else {
        j["method"] = method_name(prov->method);
        j["revised_side"] = side_name(prov->revised_side);
        if (prov->substituted) {
          j["substituted"] = ojson::array({prov->substituted->from, prov->substituted->to});
        } else {
          j["substituted"] = nullptr;
        }
        if (prov->confidence) j["confidence"] = *prov->confidence;
      }
      out << j.dump() << '\n';
    };
    member("base", s.base, nullptr);
    for (const auto& [label, pair] : s.generated) {
      auto it = s.provenance.find(label);
      member(label_name(label), pair, it == s.provenance.end() ? nullptr : &it->second);
    }
  }
}

std::vector<AugmentedSet> load_sets(std::istream& in) {
  std::vector<AugmentedSet> out;
  std::set<std::string> closed;  // group ids already finished
  std::string line;
  std::size_t line_no = 0;
  auto schema = [&](const std::string& what) {
    throw CorpusError(CorpusError::Code::SchemaViolation, line_no, what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const ojson j = parse_line(line, line_no);
    const std::string group = string_field(j, "group_id", line_no);
    const std::string role = string_field(j, "role", line_no);
    SentencePair pair = pair_from_json(j, line_no);

    if (role == "base") {
      if (!out.empty()) closed.insert(out.back().group_id);
      if (closed.contains(group)) schema("group '" + group + "' is not contiguous");
      AugmentedSet s;
      s.group_id = group;
      s.base = std::move(pair);
      out.push_back(std::move(s));
      continue;
    }

    auto role_label = parse_label(role);
    if (!role_label || role != label_name(*role_label)) schema("unknown role '" + role + "'");
    if (out.empty() || out.back().group_id != group) {
      schema("member of group '" + group + "' without a preceding base line");
    }
    AugmentedSet& s = out.back();
    if (pair.label != *role_label) schema("role '" + role + "' carries a different label");
    if (s.generated.contains(*role_label)) schema("duplicate role '" + role + "'");

    Provenance prov;
    const auto method = j.find("method");
    if (method == j.end() || !method->is_string()) schema("generated member needs a method");
    if (*method == "token") {
      prov.method = Method::Token;
    } else if (*method == "sentence") {
      prov.method = Method::Sentence;
    } else {
      schema("unknown method");
    }
    const auto side = j.find("revised_side");
    if (side == j.end() || !side->is_string() || !parse_side(side->get<std::string>())) {
      schema("bad revised_side");
    }
    prov.revised_side = *parse_side(side->get<std::string>());
    if (auto sub = j.find("substituted"); sub != j.end() && !sub->is_null()) {
      if (!sub->is_array() || sub->size() != 2 || !(*sub)[0].is_string() || !(*sub)[1].is_string()) {
        schema("substituted must be [from, to] or null");
      }
      prov.substituted = Substitution{(*sub)[0].get<std::string>(), (*sub)[1].get<std::string>()};
    }
    if (auto c = j.find("confidence"); c != j.end() && !c->is_null()) {
      if (!c->is_number()) schema("confidence must be a number");
      prov.confidence = c->get<double>();
    }
    if (prov.method == Method::Token) {
      if (!prov.substituted) schema("token member without substitution");
      if (!single_token_delta(s.base.side(prov.revised_side), pair.side(prov.revised_side),
                              *prov.substituted) ||
          s.base.side(other_side(prov.revised_side)) != pair.side(other_side(prov.revised_side))) {
        schema("token member is not a single-token revision of the base pair");
      }
    }
    s.generated.emplace(*role_label, std::move(pair));
    s.provenance.emplace(*role_label, std::move(prov));
  }
  return out;
}

std::vector<SentencePair> labeled_training_pairs(std::span<const SentencePair> originals,
                                                 std::span<const AugmentedSet> sets) {
  std::vector<SentencePair> out(originals.begin(), originals.end());
  for (const auto& s : sets) {
    for (const auto& [label, pair] : s.generated) out.push_back(pair);
  }
  return out;
}

bool single_token_delta(std::string_view base, std::string_view revised,
                        const Substitution& sub) {
  const auto a = tokenize(base);
  const auto b = tokenize(revised);
  if (a.size() != b.size() || sub.from == sub.to) return false;
  bool changed = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == sub.from) {
      if (b[i] != sub.to) return false;
      changed = true;
    } else if (a[i] != b[i]) {
      return false;
    }
  }
  return changed;
}

}  // namespace nlicf
