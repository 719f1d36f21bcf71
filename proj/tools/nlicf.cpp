// nlicf: counterfactual augmentation and relation-based contrastive training
// for NLI pair classifiers.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlicf/contrastive_trainer.hpp"
#include "nlicf/encoder_model.hpp"
#include "nlicf/error.hpp"
#include "nlicf/eval_harness.hpp"
#include "nlicf/nli_corpus.hpp"
#include "nlicf/pipeline.hpp"
#include "nlicf/rng.hpp"
#include "nlicf/sentence_augment.hpp"
#include "nlicf/synthetic.hpp"
#include "nlicf/token_augment.hpp"
#include "nlicf/wn_lexicon.hpp"

namespace fs = std::filesystem;
using namespace nlicf;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kWordnetEnv = "NLICF_WORDNET_DIR";

fs::path wordnet_dir_or_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kWordnetEnv); env && *env) return env;
  throw ValidationError(std::string("no WordNet dir: pass --wordnet or set ") + kWordnetEnv);
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw ValidationError(what + " not found: '" + path + "'");
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cli", "Io", "cannot write " + path.string());
  return out;
}

std::vector<AugmentedSet> load_sets_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("nli_corpus", "Io", "cannot open " + path);
  return load_sets(in);
}

SplitPath parse_split(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw ValidationError("split must be name=path, got '" + arg + "'");
  }
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

// ---- wordnet-check ----

struct WordnetCheckArgs {
  std::string dir;
  std::size_t sample = 10000;
  std::uint64_t seed = 0;
};

int cmd_wordnet_check(const WordnetCheckArgs& a) {
  const fs::path dir = wordnet_dir_or_env(a.dir);
  const wn::Lexicon lex = wn::Lexicon::load_dir(dir);
  const wn::SymmetryCheck c = wn::check_edge_symmetry(lex, a.sample, a.seed);
  ojson j;
  j["dir"] = dir.string();
  j["synsets"] = lex.size();
  j["lemmas"] = lex.lemma_index().size();
  j["sampled"] = c.sampled;
  j["edges_checked"] = c.edges;
  j["symmetry_violations"] = c.violations;
  std::cout << j.dump(2) << '\n';
  return c.violations == 0 ? 0 : 2;
}

// ---- augment ----

struct AugmentArgs {
  std::string in, wordnet, out, report;
  std::uint64_t seed = 0;
  std::string side = "alternate";
  std::uint64_t smoothing = 1;
  SentenceAugmentConfig sentence;
  LoopClassifierConfig loop;
  Dims dims;
};

int cmd_augment_token(const AugmentArgs& a) {
  require_file(a.in, "input pairs");
  TokenAugmentConfig cfg;
  cfg.seed = a.seed;
  cfg.side = parse_side_policy(a.side);
  cfg.smoothing = a.smoothing;
  const fs::path dir = wordnet_dir_or_env(a.wordnet);
  const auto pairs = load_pairs_file(a.in);
  const wn::Lexicon lex = wn::Lexicon::load_dir(dir);
  const FrequencyTable freq = build_frequency(pairs);
  TokenAugmentSummary s;
  const auto sets = augment_corpus_token(pairs, lex, freq, cfg, &s);
  auto out = open_out(a.out);
  save_sets(out, sets);
  ojson j{{"pairs", s.pairs}, {"complete", s.complete}, {"generated", s.generated}, {"no_nouns", s.no_nouns}};
  log_line(j.dump());
  return 0;
}

int cmd_augment_sentence(const AugmentArgs& a) {
  require_file(a.in, "input pairs");
  SentenceAugmentConfig cfg = a.sentence;
  cfg.seed = stage_seed(a.seed, "sentence_augment");
  cfg.validate();
  const fs::path dir = wordnet_dir_or_env(a.wordnet);
  const auto pairs = load_pairs_file(a.in);
  const wn::Lexicon lex = wn::Lexicon::load_dir(dir);
  const FrequencyTable freq = build_frequency(pairs);
  LexicalGenerator gen(lex, freq, stage_seed(a.seed, "lexical_generator"), a.smoothing);
  auto trainer = make_loop_trainer(a.dims, a.loop, stage_seed(a.seed, "loop_classifier"));
  auto r = run_sentence_augmentation(pairs, gen, trainer, cfg,
                                     [](const IterationReport& ir) { log_line(ir.to_json().dump()); });
  auto out = open_out(a.out);
  save_sets(out, r.sets);
  const fs::path report = a.report.empty() ? fs::path(a.out).parent_path() / "report.json" : fs::path(a.report);
  open_out(report) << r.report.to_json().dump(2) << '\n';
  log_line(ojson{{"stop_reason", stop_reason_name(r.report.stop_reason)},
                 {"final_coverage", r.report.final_coverage}}
               .dump());
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string sets, pairs, out, report;
  ContrastiveConfig cfg;
  std::string mode = "rcl";
  Dims dims;
};

int cmd_train(TrainArgs a) {
  require_file(a.pairs, "train pairs");
  if (!a.sets.empty()) require_file(a.sets, "sets");
  a.cfg.mode = parse_mode(a.mode);
  a.cfg.validate();
  const std::uint64_t seed = a.cfg.seed;
  a.cfg.seed = stage_seed(seed, "train");
  const auto pairs = load_pairs_file(a.pairs);
  const auto sets = a.sets.empty() ? std::vector<AugmentedSet>{} : load_sets_file(a.sets);
  Model model = init_model(pairs, sets, a.dims, stage_seed(seed, "init"));
  const TrainReport rep = train(model.params, model.vocab, pairs, sets, a.cfg);
  save_checkpoint_file(a.out, model);
  const fs::path report = a.report.empty() ? fs::path(a.out).parent_path() / "train_report.json" : fs::path(a.report);
  open_out(report) << rep.to_json().dump(2) << '\n';
  log_line(ojson{{"ce_loss_before", rep.ce_loss_before}, {"ce_loss_after", rep.ce_loss_after},
                 {"checksum", rep.checksum}}
               .dump());
  return 0;
}

// ---- eval / compare ----

struct EvalArgs {
  std::string model, out, mode = "model";
  std::vector<std::string> splits;
};

int cmd_eval(const EvalArgs& a) {
  require_file(a.model, "checkpoint");
  std::vector<SplitPath> splits;
  for (const auto& s : a.splits) {
    splits.push_back(parse_split(s));
    require_file(splits.back().path.string(), "split '" + splits.back().name + "'");
  }
  const Model model = load_checkpoint_file(a.model);
  ModeReport report{a.mode, {}};
  for (const auto& s : splits) report.splits.push_back(evaluate(model, load_pairs_file(s.path.string()), s.name));
  const std::string text = to_json(report).dump(2);
  if (a.out.empty()) {
    std::cout << text << '\n';
  } else {
    open_out(a.out) << text << '\n';
  }
  return 0;
}

struct CompareArgs {
  std::vector<std::string> in;
  std::string json_out;
};

int cmd_compare(const CompareArgs& a) {
  std::vector<ModeReport> reports;
  for (const auto& p : a.in) {
    require_file(p, "metrics");
    std::ifstream in(p);
    ojson j;
    try {
      j = ojson::parse(in);
    } catch (const ojson::parse_error& e) {
      throw ValidationError(p + " is not valid JSON");
    }
    reports.push_back(mode_report_from_json(j));
  }
  const ComparisonTable t = compare(reports);
  std::cout << t.text;
  if (!a.json_out.empty()) open_out(a.json_out) << t.json.dump(2) << '\n';
  return 0;
}

// ---- pipeline ----

struct PipelineArgs {
  std::string config;
  std::string wordnet, train, out, method, mode;
  std::vector<std::string> splits;
  std::uint64_t seed = 0;
  double tau = 0, T = 0, cl_lr = 0, ce_lr = 0;
  int cl_epochs = 0, ce_epochs = 0, max_iter = 0;
  std::size_t batch = 0;
  bool print_config = false;
};

int cmd_pipeline(const PipelineArgs& a, const CLI::App& app) {
  auto given = [&](const char* name) { return app.count(name) > 0; };
  PipelineConfig cfg;
  if (!a.config.empty()) {
    require_file(a.config, "config");
    cfg = PipelineConfig::load(a.config);
  }
  if (given("--wordnet")) cfg.wordnet_dir = a.wordnet;
  if (cfg.wordnet_dir.empty()) {
    if (const char* env = std::getenv(kWordnetEnv); env && *env) cfg.wordnet_dir = env;
  }
  if (given("--train")) cfg.train_path = a.train;
  if (given("--out")) cfg.output_dir = a.out;
  if (given("--split")) {
    cfg.test_splits.clear();
    for (const auto& s : a.splits) cfg.test_splits.push_back(parse_split(s));
  }
  if (given("--method")) cfg.method = parse_augment_method(a.method);
  if (given("--mode")) cfg.train.mode = parse_mode(a.mode);
  if (given("--seed")) cfg.seed = a.seed;
  if (given("--tau")) cfg.sentence.tau = a.tau;
  if (given("--max-iter")) cfg.sentence.max_iterations = a.max_iter;
  if (given("--T")) cfg.train.temperature = a.T;
  if (given("--cl-epochs")) cfg.train.cl_epochs = a.cl_epochs;
  if (given("--cl-lr")) cfg.train.cl_lr = a.cl_lr;
  if (given("--ce-epochs")) cfg.train.ce_epochs = a.ce_epochs;
  if (given("--ce-lr")) cfg.train.ce_lr = a.ce_lr;
  if (given("--batch")) cfg.train.batch_size = a.batch;
  if (a.print_config) {
    std::cout << cfg.to_json().dump(2) << '\n';
    return 0;
  }
  const PipelineResult r = run_pipeline(cfg, log_line);
  std::cout << compare(std::span<const ModeReport>(&r.metrics, 1)).text;
  return 0;
}

// ---- synth ----

struct SynthArgs {
  std::string out;
  std::uint64_t seed = 7;
  std::size_t n_train = 2000, n_test = 600;
  double cue = 0.85;
};

int cmd_synth(const SynthArgs& a) {
  if (a.n_train == 0 || a.n_test == 0) throw ValidationError("--n-train and --n-test must be >= 1");
  if (!(a.cue >= 0.0 && a.cue <= 1.0)) throw ValidationError("--cue must be in [0, 1]");
  const auto corpus = synth::make_synthetic(a.seed, a.n_train, a.n_test, {a.cue});
  synth::write_synthetic(corpus, a.out);
  log_line(ojson{{"train", corpus.train.size()},
                 {"test_original", corpus.test_original.size()},
                 {"test_rp", corpus.test_rp.size()},
                 {"test_rh", corpus.test_rh.size()}}
               .dump());
  return 0;
}

// ---- model ----

int cmd_model_info(const std::string& path) {
  require_file(path, "checkpoint");
  const Model m = load_checkpoint_file(path);
  const Dims d = m.params.dims();
  ojson j{{"vocab", m.vocab.size()},
          {"embed_dim", d.embed},
          {"hidden_dim", d.hidden},
          {"proj_dim", d.proj},
          {"parameters", m.params.parameter_count()},
          {"checksum", m.params.checksum()}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_model_copy(const std::string& in, const std::string& out) {
  require_file(in, "checkpoint");
  const Model m = load_checkpoint_file(in);
  save_checkpoint_file(out, m);
  return 0;
}

void add_dims(CLI::App* app, Dims& d) {
  app->add_option("--embed-dim", d.embed, "Embedding width")->capture_default_str();
  app->add_option("--hidden-dim", d.hidden, "Hidden width")->capture_default_str();
  app->add_option("--proj-dim", d.proj, "Projection width")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual NLI augmentation and contrastive training"};
  app.require_subcommand(1);
  int status = 0;

  WordnetCheckArgs wc;
  auto* wcmd = app.add_subcommand("wordnet-check", "Parse a WNDB noun database and check edge symmetry");
  wcmd->add_option("--wordnet", wc.dir, "Directory holding index.noun and data.noun");
  wcmd->add_option("--sample", wc.sample, "Synsets to check")->capture_default_str();
  wcmd->add_option("--seed", wc.seed, "Sampling seed")->capture_default_str();
  wcmd->callback([&] { status = cmd_wordnet_check(wc); });

  AugmentArgs aa;
  auto* aug = app.add_subcommand("augment", "Generate counterfactual sets");
  aug->require_subcommand(1);
  auto* tok = aug->add_subcommand("token", "Relation-typed noun substitution");
  auto* sen = aug->add_subcommand("sentence", "Confidence-filtered generation loop");
  for (auto* sub : {tok, sen}) {
    sub->add_option("--in", aa.in, "Input pairs (.jsonl)")->required();
    sub->add_option("--wordnet", aa.wordnet, "WordNet dir");
    sub->add_option("--out", aa.out, "Output sets (.jsonl)")->required();
    sub->add_option("--seed", aa.seed, "Seed")->capture_default_str();
    sub->add_option("--smoothing", aa.smoothing, "Added to candidate frequency weights")->capture_default_str();
  }
  tok->add_option("--side", aa.side, "premise | hypothesis | alternate")->capture_default_str();
  tok->callback([&] { status = cmd_augment_token(aa); });
  sen->add_option("--tau", aa.sentence.tau, "Confidence threshold")->capture_default_str();
  sen->add_option("--coverage", aa.sentence.coverage_goal, "Coverage goal")->capture_default_str();
  sen->add_option("--max-iter", aa.sentence.max_iterations, "Iteration cap")->capture_default_str();
  sen->add_option("--report", aa.report, "Loop report path (default: report.json next to --out)");
  sen->add_option("--loop-epochs", aa.loop.epochs, "Epochs of the loop classifier")->capture_default_str();
  sen->add_option("--loop-lr", aa.loop.lr, "Learning rate of the loop classifier")->capture_default_str();
  add_dims(sen, aa.dims);
  sen->callback([&] { status = cmd_augment_sentence(aa); });

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Contrastive then cross-entropy training");
  tr->add_option("--pairs", ta.pairs, "Original train pairs (.jsonl)")->required();
  tr->add_option("--sets", ta.sets, "Augmented sets (.jsonl)");
  tr->add_option("--mode", ta.mode, "rcl | scl | none")->capture_default_str();
  tr->add_option("--T", ta.cfg.temperature, "Temperature")->capture_default_str();
  tr->add_option("--cl-epochs", ta.cfg.cl_epochs, "Contrastive epochs")->capture_default_str();
  tr->add_option("--cl-lr", ta.cfg.cl_lr, "Contrastive learning rate")->capture_default_str();
  tr->add_option("--ce-epochs", ta.cfg.ce_epochs, "Cross-entropy epochs")->capture_default_str();
  tr->add_option("--ce-lr", ta.cfg.ce_lr, "Cross-entropy learning rate")->capture_default_str();
  tr->add_option("--batch", ta.cfg.batch_size, "Batch size")->capture_default_str();
  tr->add_option("--seed", ta.cfg.seed, "Seed")->capture_default_str();
  tr->add_option("--out", ta.out, "Checkpoint path")->required();
  tr->add_option("--report", ta.report, "Report path (default: train_report.json next to --out)");
  add_dims(tr, ta.dims);
  tr->callback([&] { status = cmd_train(ta); });

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Accuracy per split");
  ev->add_option("--model", ea.model, "Checkpoint")->required();
  ev->add_option("--split", ea.splits, "name=path, repeatable")->required();
  ev->add_option("--mode", ea.mode, "Row label for comparison tables")->capture_default_str();
  ev->add_option("--out", ea.out, "metrics.json (default: stdout)");
  ev->callback([&] { status = cmd_eval(ea); });

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "Table of accuracies across runs");
  cmp->add_option("--in", ca.in, "metrics.json files")->required();
  cmp->add_option("--json", ca.json_out, "Also write the table as JSON");
  cmp->callback([&] { status = cmd_compare(ca); });

  PipelineArgs pa;
  auto* pl = app.add_subcommand("pipeline", "Augment, train and evaluate from one config");
  pl->add_option("--config", pa.config, "JSON config");
  pl->add_option("--wordnet", pa.wordnet, "WordNet dir");
  pl->add_option("--train", pa.train, "Train pairs");
  pl->add_option("--split", pa.splits, "name=path, repeatable (replaces config splits)");
  pl->add_option("--out", pa.out, "Output dir");
  pl->add_option("--method", pa.method, "none | token | sentence | both");
  pl->add_option("--mode", pa.mode, "rcl | scl | none");
  pl->add_option("--seed", pa.seed, "Global seed");
  pl->add_option("--tau", pa.tau, "Confidence threshold");
  pl->add_option("--max-iter", pa.max_iter, "Sentence loop iteration cap");
  pl->add_option("--T", pa.T, "Temperature");
  pl->add_option("--cl-epochs", pa.cl_epochs, "Contrastive epochs");
  pl->add_option("--cl-lr", pa.cl_lr, "Contrastive learning rate");
  pl->add_option("--ce-epochs", pa.ce_epochs, "Cross-entropy epochs");
  pl->add_option("--ce-lr", pa.ce_lr, "Cross-entropy learning rate");
  pl->add_option("--batch", pa.batch, "Batch size");
  pl->add_flag("--print-config", pa.print_config, "Print the resolved config and exit");
  pl->callback([&] { status = cmd_pipeline(pa, *pl); });

  SynthArgs sa;
  auto* sy = app.add_subcommand("synth", "Write the synthetic corpus and fixture lexicon");
  sy->add_option("--out", sa.out, "Output dir")->required();
  sy->add_option("--seed", sa.seed, "Seed")->capture_default_str();
  sy->add_option("--n-train", sa.n_train, "Train pairs")->capture_default_str();
  sy->add_option("--n-test", sa.n_test, "Original test pairs")->capture_default_str();
  sy->add_option("--cue", sa.cue, "Probability of the label-tied verb")->capture_default_str();
  sy->callback([&] { status = cmd_synth(sa); });

  std::string model_in, model_out;
  auto* md = app.add_subcommand("model", "Checkpoint utilities");
  md->require_subcommand(1);
  auto* info = md->add_subcommand("info", "Shapes and checksum");
  info->add_option("checkpoint", model_in)->required();
  info->callback([&] { status = cmd_model_info(model_in); });
  auto* copy = md->add_subcommand("copy", "Load and save again");
  copy->add_option("in", model_in)->required();
  copy->add_option("out", model_out)->required();
  copy->callback([&] { status = cmd_model_copy(model_in, model_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
