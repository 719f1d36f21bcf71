// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nlicf/pipeline.hpp"
#include "nlicf/synthetic.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace nlicf;
using namespace nlicf::test;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path kRoot = NLICF_SOURCE_DIR;

wn::Lexicon fixture_lexicon() {
  std::istringstream i(synth::fixture_index_noun()), d(synth::fixture_data_noun());
  return wn::Lexicon::parse(i, d);
}

void criterion_1() {
  const auto t0 = Clock::now();
  bool ok = true;
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double s = uniform(rng, -1, 1);
    const Label y = kLabels[uniform_index(rng, 3)];
    const double T = uniform(rng, 0.01, 5.0);
    worst = std::max(worst, std::abs(rcl_loss({s, s, s}, y, T) - std::log(3.0)));
  }
  ok = ok && worst <= 1e-9;
  const double exact = std::abs(rcl_loss({1, 0, 0}, Label::Entailment, 0.1) - std::log1p(2 * std::exp(-10.0)));
  ok = ok && exact <= 1e-9;
  double shift = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::array<double, 3> s{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
    const double k = uniform(rng, -10, 10);
    const Label y = kLabels[uniform_index(rng, 3)];
    shift = std::max(shift, std::abs(rcl_loss({s[0] + k, s[1] + k, s[2] + k}, y, 0.1) - rcl_loss(s, y, 0.1)));
  }
  ok = ok && shift < 1e-9;
  const double secs = seconds_since(t0);
  ok = ok && secs < 1.0;
  report(1, ok,
         "uniform err " + fmt("%.1e", worst) + ", (1,0,0) err " + fmt("%.1e", exact) + ", shift err " +
             fmt("%.1e", shift) + ", " + fmt("%.3f", secs) + " s");
}

void criterion_2() {
  const auto t0 = Clock::now();
  const Vocab vocab = fixture_vocab();
  const Dims d{4, 4, 4};
  Rng rng(11);
  std::vector<SentencePair> ce_batch, scl_batch;
  for (int i = 0; i < 6; ++i) ce_batch.push_back(random_pair(rng));
  for (int i = 0; i < 8; ++i) scl_batch.push_back(random_pair(rng));
  scl_batch[1].label = scl_batch[0].label;
  std::vector<AugmentedSet> sets;
  for (int i = 0; i < 4; ++i) sets.push_back(random_set(rng, std::to_string(i)));

  const auto ce = check_gradient(random_params(vocab.size(), d, 1),
                                 [&](const EncoderParams& p) { return ce_batch_loss(p, vocab, ce_batch); }, 250, 2);
  const auto rcl = check_gradient(random_params(vocab.size(), d, 3),
                                  [&](const EncoderParams& p) { return rcl_batch_loss(p, vocab, sets, 0.1); }, 250, 4);
  const auto scl = check_gradient(random_params(vocab.size(), d, 5),
                                  [&](const EncoderParams& p) { return scl_batch_loss(p, vocab, scl_batch, 0.1); },
                                  250, 6);
  const double secs = seconds_since(t0);
  bool ok = secs < 30.0;
  for (const auto* r : {&ce, &rcl, &scl}) ok = ok && r->coordinates >= 200 && r->max_rel_error < 1e-4;
  report(2, ok,
         "max rel err ce " + fmt("%.1e", ce.max_rel_error) + ", rcl " + fmt("%.1e", rcl.max_rel_error) + ", scl " +
             fmt("%.1e", scl.max_rel_error) + " over " + std::to_string(ce.coordinates) + " coords each, " +
             fmt("%.2f", secs) + " s");
}

void criterion_3() {
  const auto lex = fixture_lexicon();
  const OracleLexicon oracle(synth::fixture_index_noun(), synth::fixture_data_noun());
  const auto pairs = synth::pairs_of(synth::make_synthetic(7, 500, 1).train);
  TokenAugmentConfig cfg;
  cfg.seed = stage_seed(13, "token_augment");
  const auto sets = augment_corpus_token(pairs, lex, build_frequency(pairs), cfg);
  std::size_t checked = 0, violations = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (const auto& [label, prov] : sets[i].provenance) {
      const auto& sub = *prov.substituted;
      bool sound = false;
      for (auto k : relation_kinds_for(label, prov.revised_side)) sound = sound || oracle.related(sub.from, sub.to, k);
      ++checked;
      if (!sound) ++violations;
    }
  }
  report(3, checked > 0 && violations == 0,
         std::to_string(checked) + " substitutions over " + std::to_string(pairs.size()) + " pairs, " +
             std::to_string(violations) + " violations");
}

void criterion_4() {
  using K = wn::RelationKind;
  const std::map<std::pair<Label, Side>, std::vector<K>> table{
      {{Label::Entailment, Side::Premise}, {K::Synonym, K::Hyponym}},
      {{Label::Entailment, Side::Hypothesis}, {K::Synonym, K::Hypernym}},
      {{Label::Neutral, Side::Premise}, {K::Hypernym}},
      {{Label::Neutral, Side::Hypothesis}, {K::Hyponym}},
      {{Label::Contradiction, Side::Premise}, {K::Antonym, K::CoHyponym}},
      {{Label::Contradiction, Side::Hypothesis}, {K::Antonym, K::CoHyponym}},
  };
  int matched = 0;
  for (const auto& [cell, kinds] : table) matched += relation_kinds_for(cell.first, cell.second) == kinds ? 1 : 0;
  report(4, matched == 6, std::to_string(matched) + "/6 cells match");
}

struct NeverAccepts : PairClassifier {
  std::array<double, 3> probabilities(const SentencePair&) const override { return {0.0, 0.0, 0.0}; }
};

bool non_decreasing(const LoopReport& r) {
  double prev = r.initial_coverage;
  for (const auto& it : r.iterations) {
    if (it.coverage < prev) return false;
    prev = it.coverage;
  }
  return true;
}

void criterion_5() {
  const auto pairs = load_pairs_file((kRoot / "data" / "synth" / "train.jsonl").string());
  const auto lex = wn::Lexicon::load_dir(kRoot / "data" / "fixture_wordnet");
  const auto freq = build_frequency(pairs);
  LexicalGenerator gen(lex, freq, stage_seed(13, "lexical_generator"));

  SentenceAugmentConfig open;
  open.tau = 0.0;
  open.seed = stage_seed(13, "sentence_augment");
  const auto a = run_sentence_augmentation(pairs, gen, make_loop_trainer(Dims{}, LoopClassifierConfig{}, 5), open);
  const bool first_complete = !a.report.iterations.empty() && a.report.iterations[0].coverage == 1.0 &&
                              a.report.stop_reason == StopReason::CoverageGoal;

  SentenceAugmentConfig closed;
  closed.seed = open.seed;
  const ClassifierTrainer never = [](std::span<const SentencePair>, int) {
    return std::make_unique<NeverAccepts>();
  };
  const auto b = run_sentence_augmentation(pairs, gen, never, closed);
  const bool halted = b.report.stop_reason == StopReason::MaxIterations &&
                      static_cast<int>(b.report.iterations.size()) == closed.max_iterations &&
                      b.report.final_coverage == b.report.initial_coverage;

  const bool monotone = non_decreasing(a.report) && non_decreasing(b.report);
  report(5, first_complete && halted && monotone,
         "tau=0: coverage " + fmt("%.3f", a.report.iterations.empty() ? 0.0 : a.report.iterations[0].coverage) +
             " after iteration 1; stub: " + std::to_string(b.report.iterations.size()) + " iterations, coverage " +
             fmt("%.3f", b.report.initial_coverage) + " -> " + fmt("%.3f", b.report.final_coverage) +
             "; non-decreasing " + (monotone ? "yes" : "no"));
}

struct Run {
  std::string label;
  AugmentMethod method;
  ContrastiveMode mode;
  std::map<std::string, double> pinned;  // percent
};

PipelineConfig demo_config(const fs::path& out) {
  PipelineConfig c = PipelineConfig::load(kRoot / "configs" / "demo.json");
  c.output_dir = out;
  return c;
}

void criteria_6_and_7(const fs::path& scratch) {
  const auto t0 = Clock::now();
  const std::vector<Run> runs{
      {"baseline", AugmentMethod::None, ContrastiveMode::None,
       {{"original", 88.17}, {"rp", 7.14}, {"rh", 5.82}, {"rp_rh", 6.53}}},
      {"RDA", AugmentMethod::Token, ContrastiveMode::None,
       {{"original", 82.17}, {"rp", 20.05}, {"rh", 12.38}, {"rp_rh", 16.52}}},
      {"RDA-RCL", AugmentMethod::Token, ContrastiveMode::Rcl,
       {{"original", 66.00}, {"rp", 21.68}, {"rh", 15.24}, {"rp_rh", 18.71}}},
  };
  std::map<std::string, std::map<std::string, double>> acc;
  std::map<std::string, PipelineResult> results;
  bool pinned_ok = true;
  for (const auto& r : runs) {
    PipelineConfig c = demo_config(scratch / r.label);
    c.method = r.method;
    c.train.mode = r.mode;
    const auto res = run_pipeline(c);
    std::printf("  %-8s", r.label.c_str());
    for (const auto& m : res.metrics.splits) {
      acc[r.label][m.split] = 100.0 * m.accuracy;
      const double want = r.pinned.at(m.split);
      const bool within = std::abs(100.0 * m.accuracy - want) <= 1.0;
      pinned_ok = pinned_ok && within;
      std::printf("  %s %.2f (pinned %.2f%s)", m.split.c_str(), 100.0 * m.accuracy, want, within ? "" : ", OUT");
    }
    std::printf("\n");
    results[r.label] = res;
  }
  const double secs = seconds_since(t0);

  bool order_ok = true;
  double min_gap = 1e9;
  for (const char* split : {"rp", "rh", "rp_rh"}) {
    const double base = acc["baseline"][split], rda = acc["RDA"][split], rcl = acc["RDA-RCL"][split];
    order_ok = order_ok && rcl >= rda && rda >= base && rcl - base >= 5.0;
    min_gap = std::min(min_gap, rcl - base);
  }
  report(6, order_ok && pinned_ok && secs < 300.0,
         std::string("RDA-RCL >= RDA >= baseline on rp/rh/rp_rh: ") + (order_ok ? "yes" : "no") +
             ", min RDA-RCL gap over baseline " + fmt("%.2f", min_gap) + " pp, pinned values within 1 pp: " +
             (pinned_ok ? "yes" : "no") + ", " + fmt("%.1f", secs) + " s");

  const auto again = run_pipeline(demo_config(scratch / "RDA-RCL-again"));
  const bool same_metrics =
      read_file(scratch / "RDA-RCL" / "metrics.json") == read_file(scratch / "RDA-RCL-again" / "metrics.json");
  const bool same_checksum = again.checkpoint_checksum == results["RDA-RCL"].checkpoint_checksum;
  char sum[32];
  std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(again.checkpoint_checksum));
  report(7, same_metrics && same_checksum,
         std::string("metrics.json identical: ") + (same_metrics ? "yes" : "no") + ", checksum " + sum +
             (same_checksum ? " on both runs" : " differs"));
}

void criterion_8() {
  const auto lex = wn::Lexicon::load_dir(kRoot / "data" / "fixture_wordnet");
  const auto sym = wn::check_edge_symmetry(lex, lex.size(), 1);
  bool ok = sym.violations == 0 && sym.edges > 0;

  bool dangling = false;
  try {
    std::istringstream i("dog n 1 1 @ 1 0 00000010\n"), d("00000010 05 n 01 dog 0 001 @ 00000099 n 0000 | x\n");
    wn::Lexicon::parse(i, d);
  } catch (const wn::LexiconError& e) {
    dangling = e.code_kind() == wn::LexiconError::Code::DanglingPointer;
  }
  ok = ok && dangling;
  std::string detail = "fixture: " + std::to_string(lex.size()) + " synsets, " + std::to_string(sym.edges) +
                       " edges, " + std::to_string(sym.violations) + " asymmetric; dangling pointer detected: " +
                       (dangling ? "yes" : "no");

  const char* env = std::getenv("NLICF_WORDNET_DIR");
  if (env && *env && fs::exists(fs::path(env) / "data.noun")) {
    const auto t0 = Clock::now();
    const auto real = wn::Lexicon::load_dir(env);
    const auto rs = wn::check_edge_symmetry(real, 10000, 7);
    ok = ok && rs.sampled == 10000 && rs.violations == 0;
    detail += "; real lexicon: " + std::to_string(real.size()) + " synsets, " + std::to_string(rs.sampled) +
              " sampled, " + std::to_string(rs.violations) + " asymmetric, " + fmt("%.1f", seconds_since(t0)) + " s";
  } else {
    detail += "; real lexicon not present (set NLICF_WORDNET_DIR), fixture only";
  }
  report(8, ok, detail);
}

template <typename F>
void guarded(int id, F f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / ("nlicf_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(scratch);
  guarded(1, criterion_1);
  guarded(2, criterion_2);
  guarded(3, criterion_3);
  guarded(4, criterion_4);
  guarded(5, criterion_5);
  guarded(6, [&] { criteria_6_and_7(scratch); });
  guarded(8, criterion_8);
  fs::remove_all(scratch);
  std::printf("%s: %d failed\n", failures == 0 ? "ALL PASS" : "SOME FAIL", failures);
  return failures == 0 ? 0 : 1;
}
