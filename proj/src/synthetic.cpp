#include "nlicf/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "nlicf/rng.hpp"

namespace nlicf::synth {

namespace {

struct Node {
  const char* key;
  std::vector<std::string> lemmas;
  const char* parent;   // nullptr for the root
  const char* antonym;  // nullptr if none
  int lexfile;
};

const std::vector<Node>& taxonomy() {
  static const std::vector<Node> kNodes = {
      {"entity", {"entity"}, nullptr, nullptr, 3},
      {"person", {"person", "individual"}, "entity", nullptr, 18},
      {"man", {"man", "fellow", "adult_male"}, "person", "woman", 18},
      {"woman", {"woman", "lady"}, "person", "man", 18},
      {"child", {"child", "kid"}, "person", nullptr, 18},
      {"boy", {"boy", "lad"}, "child", "girl", 18},
      {"girl", {"girl", "lass"}, "child", "boy", 18},
      {"musician", {"musician", "player"}, "person", nullptr, 18},
      {"guitarist", {"guitarist", "strummer"}, "musician", nullptr, 18},
      {"drummer", {"drummer", "percussionist"}, "musician", nullptr, 18},
      {"pianist", {"pianist", "keyboardist"}, "musician", nullptr, 18},
      {"animal", {"animal", "creature"}, "entity", nullptr, 5},
      {"canine", {"canine", "canid"}, "animal", nullptr, 5},
      {"dog", {"dog", "hound"}, "canine", nullptr, 5},
      {"poodle", {"poodle", "caniche"}, "dog", nullptr, 5},
      {"beagle", {"beagle", "harrier"}, "dog", nullptr, 5},
      {"wolf", {"wolf", "lobo"}, "canine", nullptr, 5},
      {"fox", {"fox", "reynard"}, "canine", nullptr, 5},
      {"feline", {"feline", "felid"}, "animal", nullptr, 5},
      {"cat", {"cat", "kitty"}, "feline", nullptr, 5},
      {"lion", {"lion", "leo"}, "feline", nullptr, 5},
      {"tiger", {"tiger", "tigon"}, "feline", nullptr, 5},
      {"bird", {"bird", "fowl"}, "animal", nullptr, 5},
      {"eagle", {"eagle", "erne"}, "bird", nullptr, 5},
      {"parrot", {"parrot", "polly"}, "bird", nullptr, 5},
      {"vehicle", {"vehicle", "conveyance"}, "entity", nullptr, 6},
      {"car", {"car", "automobile"}, "vehicle", nullptr, 6},
      {"sedan", {"sedan", "saloon"}, "car", nullptr, 6},
      {"taxi", {"taxi", "cab"}, "car", nullptr, 6},
      {"truck", {"truck", "lorry"}, "vehicle", nullptr, 6},
      {"bicycle", {"bicycle", "bike"}, "vehicle", nullptr, 6},
  };
  return kNodes;
}

const Node* node(std::string_view key) {
  for (const auto& n : taxonomy()) {
    if (key == n.key) return &n;
  }
  return nullptr;
}

std::vector<const Node*> children(std::string_view key) {
  std::vector<const Node*> out;
  for (const auto& n : taxonomy()) {
    if (n.parent && key == n.parent) out.push_back(&n);
  }
  return out;
}

struct Pointer {
  char symbol;
  const Node* target;
  bool lexical;
};

std::vector<Pointer> pointers(const Node& n) {
  std::vector<Pointer> out;
  if (n.parent) out.push_back({'@', node(n.parent), false});
  for (const Node* c : children(n.key)) out.push_back({'~', c, false});
  if (n.antonym) out.push_back({'!', node(n.antonym), true});
  return out;
}

const std::array<const char*, 2> kHeader = {
    "  1 Synthetic noun lexicon used by tests and demos.",
    "  2 WNDB layout: offset lex_filenum ss_type w_cnt words p_cnt pointers | gloss"};

// Data lines have fixed-width offsets, so line lengths do not depend on the
// offset values and can be computed in one pass with placeholders.
struct DataLayout {
  std::map<std::string, std::size_t> offsets;
  std::string text;
};

std::string data_line(const Node& n, const std::map<std::string, std::size_t>& offsets) {
  char buf[64];
  std::string line;
  std::snprintf(buf, sizeof buf, "%08zu %02d n %02zx", offsets.at(n.key), n.lexfile, n.lemmas.size());
  line += buf;
  for (const auto& l : n.lemmas) line += " " + l + " 0";
  const auto ptrs = pointers(n);
  std::snprintf(buf, sizeof buf, " %03zu", ptrs.size());
  line += buf;
  for (const auto& p : ptrs) {
    std::snprintf(buf, sizeof buf, " %c %08zu n %s", p.symbol, offsets.at(p.target->key),
                  p.lexical ? "0101" : "0000");
    line += buf;
  }
  line += " | synthetic noun: " + n.lemmas.front() + "  \n";
  return line;
}

DataLayout layout() {
  DataLayout d;
  std::size_t pos = 0;
  for (const char* h : kHeader) pos += std::string(h).size() + 1;
  std::map<std::string, std::size_t> zeros;
  for (const auto& n : taxonomy()) zeros[n.key] = 0;
  for (const auto& n : taxonomy()) {
    d.offsets[n.key] = pos;
    pos += data_line(n, zeros).size();
  }
  for (const char* h : kHeader) d.text += std::string(h) + "\n";
  for (const auto& n : taxonomy()) d.text += data_line(n, d.offsets);
  return d;
}

// ------------------------------------------------------------ pair sampling

const std::array<std::array<const char*, 4>, 3> kVerbGroups = {{
    {"sitting", "resting", "waiting", "standing"},
    {"running", "jumping", "playing", "moving"},
    {"sleeping", "eating", "watching", "hiding"},
}};

const std::array<const char*, 6> kPlaces = {"in the park",  "near the river", "on the street",
                                            "by the house", "at the beach",   "under a tree"};

std::vector<std::string> single_lemmas(const Node& n) {
  std::vector<std::string> out;
  for (const auto& l : n.lemmas) {
    if (l.find('_') == std::string::npos) out.push_back(l);
  }
  return out;
}

// Nouns that may appear in sentences: every synset below the root.
std::vector<const Node*> sentence_nodes() {
  std::vector<const Node*> out;
  for (const auto& n : taxonomy()) {
    if (n.parent) out.push_back(&n);
  }
  return out;
}

const Node* node_of_word(const std::string& w) {
  for (const auto& n : taxonomy()) {
    if (std::find(n.lemmas.begin(), n.lemmas.end(), w) != n.lemmas.end()) return &n;
  }
  return nullptr;
}

struct Option {
  std::string word;
  Relation relation;
};

// Words usable as hypothesis noun for premise word `p` under label `label`.
std::vector<Option> hypothesis_options(const std::string& p, Label label) {
  const Node* pn = node_of_word(p);
  std::vector<Option> out;
  auto add_node = [&](const Node* n, Relation r) {
    if (!n->parent) return;
    for (auto& l : single_lemmas(*n)) {
      if (l != p) out.push_back({l, r});
    }
  };
  switch (label) {
    case Label::Entailment:
      out.push_back({p, Relation::Identity});
      add_node(pn, Relation::Synonym);
      if (pn->parent) add_node(node(pn->parent), Relation::Hypernym);
      break;
    case Label::Neutral:
      for (const Node* c : children(pn->key)) add_node(c, Relation::Hyponym);
      break;
    case Label::Contradiction:
      if (pn->antonym) add_node(node(pn->antonym), Relation::Antonym);
      if (pn->parent) {
        for (const Node* s : children(pn->parent)) {
          if (s != pn && !(pn->antonym && std::string_view(s->key) == pn->antonym)) {
            add_node(s, Relation::CoHyponym);
          }
        }
      }
      break;
  }
  return out;
}

// Words usable as premise noun for hypothesis word `h` under label `label`.
std::vector<Option> premise_options(const std::string& h, Label label) {
  const Node* hn = node_of_word(h);
  std::vector<Option> out;
  auto add_node = [&](const Node* n, Relation r) {
    if (!n->parent) return;
    for (auto& l : single_lemmas(*n)) {
      if (l != h) out.push_back({l, r});
    }
  };
  switch (label) {
    case Label::Entailment:
      out.push_back({h, Relation::Identity});
      add_node(hn, Relation::Synonym);
      // h is the hypernym of any child of h.
      for (const Node* c : children(hn->key)) add_node(c, Relation::Hypernym);
      break;
    case Label::Neutral:
      // h is a hyponym of its parent.
      if (hn->parent) add_node(node(hn->parent), Relation::Hyponym);
      break;
    case Label::Contradiction:
      if (hn->antonym) add_node(node(hn->antonym), Relation::Antonym);
      if (hn->parent) {
        for (const Node* s : children(hn->parent)) {
          if (s != hn && !(hn->antonym && std::string_view(s->key) == hn->antonym)) {
            add_node(s, Relation::CoHyponym);
          }
        }
      }
      break;
  }
  return out;
}

std::string premise_text(const std::string& noun, const std::string& verb, const std::string& place) {
  return "The " + noun + " is " + verb + " " + place + ".";
}

std::string hypothesis_text(const std::string& noun, const std::string& verb) {
  return "The " + noun + " is " + verb + ".";
}

SyntheticPair make_pair(const std::string& p, const Option& h, Label label, const std::string& verb,
                        const std::string& place) {
  SyntheticPair s;
  s.pair = SentencePair{premise_text(p, verb, place), hypothesis_text(h.word, verb), label};
  s.premise_noun = p;
  s.hypothesis_noun = h.word;
  s.relation = h.relation;
  s.verb = verb;
  return s;
}

SyntheticPair sample_original(Rng& rng, double cue_strength) {
  static const auto nodes = sentence_nodes();
  const Label label = kLabels[uniform_index(rng, 3)];
  for (;;) {
    const Node* pn = nodes[uniform_index(rng, nodes.size())];
    const auto lemmas = single_lemmas(*pn);
    const std::string p = lemmas[uniform_index(rng, lemmas.size())];
    const auto opts = hypothesis_options(p, label);
    if (opts.empty()) continue;
    const Option h = opts[uniform_index(rng, opts.size())];
    std::string verb;
    if (uniform01(rng) < cue_strength) {
      const auto& g = kVerbGroups[index_of(label)];
      verb = g[uniform_index(rng, g.size())];
    } else {
      const std::size_t k = uniform_index(rng, 12);
      verb = kVerbGroups[k / 4][k % 4];
    }
    const std::string place = kPlaces[uniform_index(rng, kPlaces.size())];
    return make_pair(p, h, label, verb, place);
  }
}

std::string place_of(const SyntheticPair& s) {
  // premise = "The <noun> is <verb> <place>."
  const std::string prefix = "The " + s.premise_noun + " is " + s.verb + " ";
  std::string rest = s.pair.premise.substr(prefix.size());
  rest.pop_back();
  return rest;
}

}  // namespace

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::Identity: return "identity";
    case Relation::Synonym: return "synonym";
    case Relation::Hypernym: return "hypernym";
    case Relation::Hyponym: return "hyponym";
    case Relation::Antonym: return "antonym";
    case Relation::CoHyponym: return "co-hyponym";
  }
  return "?";
}

Label label_for(Relation r) {
  switch (r) {
    case Relation::Identity:
    case Relation::Synonym:
    case Relation::Hypernym: return Label::Entailment;
    case Relation::Hyponym: return Label::Neutral;
    case Relation::Antonym:
    case Relation::CoHyponym: return Label::Contradiction;
  }
  return Label::Entailment;
}

std::string fixture_data_noun() { return layout().text; }

std::string fixture_index_noun() {
  const DataLayout d = layout();
  std::map<std::string, const Node*> lemmas;
  for (const auto& n : taxonomy()) {
    for (const auto& l : n.lemmas) lemmas.emplace(l, &n);
  }
  std::string out;
  for (const char* h : kHeader) out += std::string(h) + "\n";
  char buf[64];
  for (const auto& [lemma, n] : lemmas) {
    std::set<char> symbols;
    for (const auto& p : pointers(*n)) symbols.insert(p.symbol);
    out += lemma + " n 1 " + std::to_string(symbols.size());
    for (char c : symbols) out += std::string(" ") + c;
    std::snprintf(buf, sizeof buf, " 1 0 %08zu  \n", d.offsets.at(n->key));
    out += buf;
  }
  return out;
}

SyntheticCorpus make_synthetic(std::uint64_t seed, std::size_t n_train, std::size_t n_test,
                               const SyntheticOptions& options) {
  SyntheticCorpus c;
  c.index_noun = fixture_index_noun();
  c.data_noun = fixture_data_noun();

  Rng train_rng(stage_seed(seed, "synth/train"));
  for (std::size_t i = 0; i < n_train; ++i) c.train.push_back(sample_original(train_rng, options.cue_strength));

  Rng test_rng(stage_seed(seed, "synth/test"));
  for (std::size_t i = 0; i < n_test; ++i) c.test_original.push_back(sample_original(test_rng, options.cue_strength));

  // Counterfactual splits: every other label reachable by revising one side,
  // with verb and place kept from the original.
  Rng cf_rng(stage_seed(seed, "synth/counterfactual"));
  for (const auto& o : c.test_original) {
    const std::string place = place_of(o);
    for (Label target : kLabels) {
      if (target == o.pair.label) continue;
      auto hopts = hypothesis_options(o.premise_noun, target);
      std::erase_if(hopts, [&](const Option& x) { return x.word == o.hypothesis_noun; });
      if (!hopts.empty()) {
        const Option h = hopts[uniform_index(cf_rng, hopts.size())];
        c.test_rh.push_back(make_pair(o.premise_noun, h, target, o.verb, place));
      }
      auto popts = premise_options(o.hypothesis_noun, target);
      std::erase_if(popts, [&](const Option& x) { return x.word == o.premise_noun; });
      if (!popts.empty()) {
        const Option p = popts[uniform_index(cf_rng, popts.size())];
        c.test_rp.push_back(
            make_pair(p.word, Option{o.hypothesis_noun, p.relation}, target, o.verb, place));
      }
    }
  }
  return c;
}

std::vector<SentencePair> pairs_of(const std::vector<SyntheticPair>& items) {
  std::vector<SentencePair> out;
  out.reserve(items.size());
  for (const auto& s : items) out.push_back(s.pair);
  return out;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "wordnet");
  auto write_text = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("synthetic", "Io", "cannot write " + p.string());
    out << text;
  };
  auto write_pairs = [](const std::filesystem::path& p, const std::vector<SentencePair>& pairs) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("synthetic", "Io", "cannot write " + p.string());
    save_pairs(out, pairs);
  };
  write_text(dir / "wordnet" / "index.noun", corpus.index_noun);
  write_text(dir / "wordnet" / "data.noun", corpus.data_noun);
  write_pairs(dir / "train.jsonl", pairs_of(corpus.train));
  write_pairs(dir / "test_original.jsonl", pairs_of(corpus.test_original));
  write_pairs(dir / "test_rp.jsonl", pairs_of(corpus.test_rp));
  write_pairs(dir / "test_rh.jsonl", pairs_of(corpus.test_rh));
  auto both = pairs_of(corpus.test_rp);
  const auto rh = pairs_of(corpus.test_rh);
  both.insert(both.end(), rh.begin(), rh.end());
  write_pairs(dir / "test_rp_rh.jsonl", both);
}

}  // namespace nlicf::synth
