#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "nlicf/pipeline.hpp"
#include "nlicf/synthetic.hpp"
#include "oracle.hpp"

using namespace nlicf;
using nlicf::test::OracleLexicon;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh scratch directory per call, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("nlicf_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PipelineConfig small_config(const fs::path& dir, std::size_t n_train = 120) {
  synth::write_synthetic(synth::make_synthetic(5, n_train, 40), dir / "data");
  PipelineConfig c;
  c.wordnet_dir = dir / "data" / "wordnet";
  c.train_path = dir / "data" / "train.jsonl";
  c.test_splits = {{"original", dir / "data" / "test_original.jsonl"}, {"rp", dir / "data" / "test_rp.jsonl"}};
  c.output_dir = dir / "out";
  c.dims = Dims{16, 16, 8};
  c.train.cl_epochs = 2;
  c.train.ce_epochs = 3;
  return c;
}

const OracleLexicon& oracle() {
  static const OracleLexicon o(synth::fixture_index_noun(), synth::fixture_data_noun());
  return o;
}

bool relation_holds(const synth::SyntheticPair& s) {
  using synth::Relation;
  using wn::RelationKind;
  const auto& a = s.premise_noun;
  const auto& b = s.hypothesis_noun;
  switch (s.relation) {
    case Relation::Identity: return a == b;
    case Relation::Synonym: return oracle().related(a, b, RelationKind::Synonym);
    case Relation::Hypernym: return oracle().related(a, b, RelationKind::Hypernym);
    case Relation::Hyponym: return oracle().related(a, b, RelationKind::Hyponym);
    // The generator relates concepts; the lexicon marks antonymy between words.
    case Relation::Antonym: return oracle().senses_antonymous(a, b);
    case Relation::CoHyponym: return oracle().related(a, b, RelationKind::CoHyponym);
  }
  return false;
}

bool mentions(const std::string& sentence, const std::string& noun) {
  const auto toks = tokenize(sentence);
  return std::find(toks.begin(), toks.end(), noun) != toks.end();
}

}  // namespace

TEST_CASE("config defaults and normalized round-trip") {
  const auto d = PipelineConfig::from_json(nlohmann::ordered_json::object());
  CHECK(d.seed == 13);
  CHECK(d.method == AugmentMethod::Token);
  CHECK(d.sentence.tau == 0.9);
  CHECK(d.sentence.coverage_goal == 0.95);
  CHECK(d.train.temperature == 0.1);
  const auto full = d.to_json();
  CHECK(PipelineConfig::from_json(full).to_json() == full);

  const auto j = nlohmann::ordered_json::parse(R"({
    "seed": 4, "method": "both",
    "paths": {"train": "t.jsonl", "tests": [{"name": "a", "path": "a.jsonl"}], "output_dir": "o"},
    "sentence": {"tau": 0.5, "max_iterations": 3},
    "train": {"mode": "scl", "T": 0.2, "ce_epochs": 7},
    "model": {"embed_dim": 8, "hidden_dim": 6, "proj_dim": 4}
  })");
  const auto c = PipelineConfig::from_json(j);
  CHECK(c.seed == 4);
  CHECK(c.method == AugmentMethod::Both);
  CHECK(c.sentence.tau == 0.5);
  CHECK(c.sentence.max_iterations == 3);
  CHECK(c.train.mode == ContrastiveMode::Scl);
  CHECK(c.train.temperature == 0.2);
  CHECK(c.train.ce_epochs == 7);
  CHECK(c.dims == Dims{8, 6, 4});
  REQUIRE(c.test_splits.size() == 1);
  CHECK(c.test_splits[0] == SplitPath{"a", "a.jsonl"});
  CHECK(PipelineConfig::from_json(c.to_json()).to_json() == c.to_json());
  CHECK(c.to_json().at("train").at("ce_epochs") == 7);
}

TEST_CASE("unknown or mistyped config keys are rejected") {
  using J = nlohmann::ordered_json;
  CHECK_THROWS_AS(PipelineConfig::from_json(J::parse(R"({"sed": 1})")), ValidationError);
  CHECK_THROWS_AS(PipelineConfig::from_json(J::parse(R"({"train": {"lr": 1}})")), ValidationError);
  CHECK_THROWS_AS(PipelineConfig::from_json(J::parse(R"({"method": "paraphrase"})")), ValidationError);
  CHECK_THROWS_AS(PipelineConfig::from_json(J::parse(R"({"seed": "x"})")), ValidationError);
  CHECK_THROWS_AS(PipelineConfig::from_json(J::parse(R"({"paths": {"tests": {}}})")), ValidationError);
  CHECK_THROWS_AS(PipelineConfig::from_json(J::parse("[]")), ValidationError);
}

TEST_CASE("config file paths resolve against the file's directory") {
  const fs::path demo = fs::path(NLICF_SOURCE_DIR) / "configs" / "demo.json";
  const auto c = PipelineConfig::load(demo);
  const fs::path root = fs::path(NLICF_SOURCE_DIR).lexically_normal();
  CHECK(c.train_path == root / "data" / "synth" / "train.jsonl");
  CHECK(c.wordnet_dir == root / "data" / "fixture_wordnet");
  CHECK(c.test_splits.size() == 4);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(PipelineConfig::load("/nonexistent/config.json"), ValidationError);
}

TEST_CASE("stage seeds derive from the global seed") {
  PipelineConfig c;
  c.seed = 99;
  c.derive_stage_seeds();
  CHECK(c.token.seed == stage_seed(99, "token_augment"));
  CHECK(c.sentence.seed == stage_seed(99, "sentence_augment"));
  CHECK(c.train.seed == stage_seed(99, "train"));
  const std::set<std::uint64_t> distinct{c.token.seed, c.sentence.seed, c.train.seed};
  CHECK(distinct.size() == 3);
  PipelineConfig d = c;
  d.seed = 100;
  d.derive_stage_seeds();
  CHECK(d.train.seed != c.train.seed);
}

TEST_CASE("run labels") {
  CHECK(run_label(AugmentMethod::None, ContrastiveMode::None) == "baseline");
  CHECK(run_label(AugmentMethod::None, ContrastiveMode::Scl) == "SCL");
  CHECK(run_label(AugmentMethod::Token, ContrastiveMode::None) == "RDA");
  CHECK(run_label(AugmentMethod::Token, ContrastiveMode::Rcl) == "RDA-RCL");
  CHECK(run_label(AugmentMethod::Sentence, ContrastiveMode::Scl) == "RDA-SCL");
  CHECK(parse_augment_method("none") == AugmentMethod::None);
  CHECK(augment_method_name(AugmentMethod::Sentence) == "sentence");
}

TEST_CASE("an invalid path fails validation before any output is written") {
  TempDir t("invalid");
  PipelineConfig c = small_config(t.path);
  c.test_splits.push_back({"missing", t.path / "nope.jsonl"});
  CHECK_THROWS_AS(run_pipeline(c), ValidationError);
  CHECK_FALSE(fs::exists(c.output_dir));

  PipelineConfig d = small_config(t.path);
  d.wordnet_dir = t.path / "no_wordnet";
  CHECK_THROWS_AS(run_pipeline(d), ValidationError);
  d.method = AugmentMethod::None;
  CHECK_NOTHROW(d.validate());

  PipelineConfig e = small_config(t.path);
  e.test_splits.push_back(e.test_splits[0]);
  CHECK_THROWS_AS(e.validate(), ValidationError);
  CHECK_FALSE(fs::exists(c.output_dir));
}

TEST_CASE("empty training file is an error") {
  TempDir t("empty");
  PipelineConfig c = small_config(t.path);
  std::ofstream(c.train_path, std::ios::trunc).close();
  try {
    run_pipeline(c);
    FAIL("expected EmptyTrain");
  } catch (const Error& e) {
    CHECK(e.code() == "EmptyTrain");
  }
}

TEST_CASE("degenerate schedule writes augmentation files and evaluates the untrained model") {
  TempDir t("degenerate");
  PipelineConfig c = small_config(t.path);
  c.train.ce_epochs = 0;
  c.train.cl_epochs = 0;
  std::vector<std::string> lines;
  const auto r = run_pipeline(c, [&](const std::string& s) { lines.push_back(s); });
  for (const char* f : {"sets.jsonl", "model.ckpt", "train_report.json", "metrics.json"}) {
    CHECK_MESSAGE(fs::exists(c.output_dir / f), f);
  }
  CHECK_FALSE(fs::exists(c.output_dir / "report.json"));
  CHECK(r.sets == 120);
  CHECK(r.complete_sets > 0);
  std::ifstream sets_in(c.output_dir / "sets.jsonl");
  CHECK(load_sets(sets_in).size() == 120);
  CHECK(r.train.cl_epoch_losses.empty());
  CHECK(r.train.ce_epoch_losses.empty());
  // Untrained: parameters are exactly the initialization.
  PipelineConfig seeded = c;
  seeded.derive_stage_seeds();
  const auto pairs = load_pairs_file(c.train_path.string());
  std::ifstream again(c.output_dir / "sets.jsonl");
  const Model init = init_model(pairs, load_sets(again), c.dims, stage_seed(c.seed, "init"));
  CHECK(r.checkpoint_checksum == init.params.checksum());
  CHECK(load_checkpoint_file((c.output_dir / "model.ckpt").string()).params == init.params);
  REQUIRE(r.metrics.splits.size() == 2);
  CHECK(r.metrics.mode == "RDA-RCL");
  CHECK(r.metrics.splits[0].n == 40);
  CHECK_FALSE(lines.empty());
  const auto metrics = nlohmann::ordered_json::parse(read_file(c.output_dir / "metrics.json"));
  CHECK(mode_report_from_json(metrics) == r.metrics);
}

TEST_CASE("pipeline runs are byte-identical for the same config and seed") {
  TempDir t("determinism");
  PipelineConfig c = small_config(t.path);
  PipelineConfig c2 = c;
  c2.output_dir = t.path / "out2";
  const auto a = run_pipeline(c);
  const auto b = run_pipeline(c2);
  CHECK(a.checkpoint_checksum == b.checkpoint_checksum);
  CHECK(read_file(c.output_dir / "metrics.json") == read_file(c2.output_dir / "metrics.json"));
  CHECK(read_file(c.output_dir / "sets.jsonl") == read_file(c2.output_dir / "sets.jsonl"));
  CHECK(read_file(c.output_dir / "model.ckpt") == read_file(c2.output_dir / "model.ckpt"));

  PipelineConfig other = c;
  other.output_dir = t.path / "out3";
  other.seed = 14;
  CHECK(run_pipeline(other).checkpoint_checksum != a.checkpoint_checksum);
}

TEST_CASE("method none trains on originals only and sentence writes a loop report") {
  TempDir t("methods");
  PipelineConfig c = small_config(t.path, 60);
  c.method = AugmentMethod::None;
  c.train.mode = ContrastiveMode::None;
  const auto r = run_pipeline(c);
  CHECK(r.sets == 0);
  CHECK(r.metrics.mode == "baseline");
  CHECK(r.train.ce_pairs == 60);

  PipelineConfig s = small_config(t.path, 60);
  s.output_dir = t.path / "sentence";
  s.method = AugmentMethod::Sentence;
  s.sentence.tau = 0.0;
  s.loop_classifier.epochs = 1;
  const auto rs = run_pipeline(s);
  CHECK(fs::exists(s.output_dir / "report.json"));
  CHECK(rs.sets == 60);
  CHECK(rs.complete_sets == 60);
  const auto report = nlohmann::ordered_json::parse(rs.report_json);
  CHECK(report.at("stop_reason") == "coverage_goal");
}

TEST_CASE("synthetic corpus is deterministic and seed-sensitive") {
  const auto a = synth::make_synthetic(3, 50, 20);
  const auto b = synth::make_synthetic(3, 50, 20);
  const auto c = synth::make_synthetic(4, 50, 20);
  CHECK(synth::pairs_of(a.train) == synth::pairs_of(b.train));
  CHECK(synth::pairs_of(a.test_rp) == synth::pairs_of(b.test_rp));
  CHECK(synth::pairs_of(a.train) != synth::pairs_of(c.train));
  CHECK(a.train.size() == 50);
  CHECK(a.test_original.size() == 20);
}

TEST_CASE("every synthetic label follows from its noun relation") {
  const auto corpus = synth::make_synthetic(8, 300, 100);
  for (const auto* split : {&corpus.train, &corpus.test_original, &corpus.test_rp, &corpus.test_rh}) {
    for (const auto& s : *split) {
      CHECK(s.pair.label == synth::label_for(s.relation));
      CHECK_MESSAGE(relation_holds(s), s.premise_noun, " ", synth::relation_name(s.relation), " ",
                    s.hypothesis_noun);
      CHECK(mentions(s.pair.premise, s.premise_noun));
      CHECK(mentions(s.pair.hypothesis, s.hypothesis_noun));
      CHECK(mentions(s.pair.premise, s.verb));
    }
  }
}

TEST_CASE("counterfactual splits flip the label and keep the verb") {
  const auto corpus = synth::make_synthetic(9, 10, 60);
  CHECK_FALSE(corpus.test_rp.empty());
  CHECK_FALSE(corpus.test_rh.empty());
  auto originals_by_verb = [&](const synth::SyntheticPair& cf, bool premise_revised) {
    for (const auto& o : corpus.test_original) {
      const bool kept = premise_revised ? o.hypothesis_noun == cf.hypothesis_noun
                                        : o.premise_noun == cf.premise_noun;
      if (kept && o.verb == cf.verb && o.pair.label != cf.pair.label) return true;
    }
    return false;
  };
  for (const auto& s : corpus.test_rp) CHECK(originals_by_verb(s, true));
  for (const auto& s : corpus.test_rh) CHECK(originals_by_verb(s, false));
}

TEST_CASE("a one-pair corpus writes loadable files") {
  TempDir t("one");
  synth::write_synthetic(synth::make_synthetic(1, 1, 1), t.path);
  CHECK(load_pairs_file((t.path / "train.jsonl").string()).size() == 1);
  CHECK(load_pairs_file((t.path / "test_original.jsonl").string()).size() == 1);
  CHECK(wn::Lexicon::load_dir(t.path / "wordnet").size() == 31);
}

TEST_CASE("committed synthetic data matches the generator") {
  TempDir t("committed");
  synth::write_synthetic(synth::make_synthetic(7, 2000, 600), t.path);
  const fs::path data = fs::path(NLICF_SOURCE_DIR) / "data" / "synth";
  for (const char* f : {"train.jsonl", "test_original.jsonl", "test_rp.jsonl", "test_rh.jsonl", "test_rp_rh.jsonl"}) {
    CHECK_MESSAGE(read_file(t.path / f) == read_file(data / f), f);
  }
}
