#include "nlicf/pipeline.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "nlicf/rng.hpp"

namespace nlicf {

using ojson = nlohmann::ordered_json;

std::string_view augment_method_name(AugmentMethod m) {
  switch (m) {
    case AugmentMethod::None: return "none";
    case AugmentMethod::Token: return "token";
    case AugmentMethod::Sentence: return "sentence";
    case AugmentMethod::Both: return "both";
  }
  return "?";
}

AugmentMethod parse_augment_method(std::string_view name) {
  if (name == "none") return AugmentMethod::None;
  if (name == "token") return AugmentMethod::Token;
  if (name == "sentence") return AugmentMethod::Sentence;
  if (name == "both") return AugmentMethod::Both;
  throw ValidationError("unknown augmentation method '" + std::string(name) + "'");
}

std::string run_label(AugmentMethod method, ContrastiveMode mode) {
  const bool aug = method != AugmentMethod::None;
  switch (mode) {
    case ContrastiveMode::None: return aug ? "RDA" : "baseline";
    case ContrastiveMode::Scl: return aug ? "RDA-SCL" : "SCL";
    case ContrastiveMode::Rcl: return aug ? "RDA-RCL" : "RCL";
  }
  return "?";
}

namespace {

void check_keys(const ojson& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.contains(k)) throw ValidationError("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read(const ojson& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(std::string("bad value for '") + key + "'");
    }
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const ojson& j) {
  PipelineConfig c;
  check_keys(j, {"seed", "method", "paths", "token", "sentence", "loop_classifier", "train", "model"},
             "config");
  read(j, "seed", c.seed);
  if (auto it = j.find("method"); it != j.end()) c.method = parse_augment_method(it->get<std::string>());

  if (auto p = j.find("paths"); p != j.end()) {
    check_keys(*p, {"wordnet_dir", "train", "tests", "output_dir"}, "paths");
    std::string s;
    if (p->contains("wordnet_dir")) read(*p, "wordnet_dir", s), c.wordnet_dir = s;
    if (p->contains("train")) read(*p, "train", s), c.train_path = s;
    if (p->contains("output_dir")) read(*p, "output_dir", s), c.output_dir = s;
    if (auto t = p->find("tests"); t != p->end()) {
      if (!t->is_array()) throw ValidationError("paths.tests must be an array");
      for (const auto& e : *t) {
        check_keys(e, {"name", "path"}, "paths.tests[]");
        SplitPath sp;
        std::string path;
        read(e, "name", sp.name);
        read(e, "path", path);
        sp.path = path;
        c.test_splits.push_back(std::move(sp));
      }
    }
  }
  if (auto t = j.find("token"); t != j.end()) {
    check_keys(*t, {"side", "smoothing"}, "token");
    if (auto s = t->find("side"); s != t->end()) c.token.side = parse_side_policy(s->get<std::string>());
    read(*t, "smoothing", c.token.smoothing);
  }
  if (auto s = j.find("sentence"); s != j.end()) {
    check_keys(*s, {"tau", "coverage_goal", "max_iterations"}, "sentence");
    read(*s, "tau", c.sentence.tau);
    read(*s, "coverage_goal", c.sentence.coverage_goal);
    read(*s, "max_iterations", c.sentence.max_iterations);
  }
  if (auto l = j.find("loop_classifier"); l != j.end()) {
    check_keys(*l, {"epochs", "lr", "batch_size"}, "loop_classifier");
    read(*l, "epochs", c.loop_classifier.epochs);
    read(*l, "lr", c.loop_classifier.lr);
    read(*l, "batch_size", c.loop_classifier.batch_size);
  }
  if (auto t = j.find("train"); t != j.end()) {
    check_keys(*t, {"mode", "T", "cl_epochs", "cl_lr", "ce_epochs", "ce_lr", "batch_size"}, "train");
    if (auto m = t->find("mode"); m != t->end()) c.train.mode = parse_mode(m->get<std::string>());
    read(*t, "T", c.train.temperature);
    read(*t, "cl_epochs", c.train.cl_epochs);
    read(*t, "cl_lr", c.train.cl_lr);
    read(*t, "ce_epochs", c.train.ce_epochs);
    read(*t, "ce_lr", c.train.ce_lr);
    read(*t, "batch_size", c.train.batch_size);
  }
  if (auto m = j.find("model"); m != j.end()) {
    check_keys(*m, {"embed_dim", "hidden_dim", "proj_dim"}, "model");
    read(*m, "embed_dim", c.dims.embed);
    read(*m, "hidden_dim", c.dims.hidden);
    read(*m, "proj_dim", c.dims.proj);
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  PipelineConfig cfg;
  try {
    cfg = from_json(ojson::parse(in));
  } catch (const ojson::parse_error& e) {
    throw ValidationError("config is not valid JSON: " + std::string(e.what()));
  }
  const std::filesystem::path base = path.parent_path();
  auto rebase = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = (base / p).lexically_normal();
  };
  rebase(cfg.wordnet_dir);
  rebase(cfg.train_path);
  rebase(cfg.output_dir);
  for (auto& s : cfg.test_splits) rebase(s.path);
  return cfg;
}

ojson PipelineConfig::to_json() const {
  ojson j;
  j["seed"] = seed;
  j["method"] = augment_method_name(method);
  auto& p = j["paths"];
  p["wordnet_dir"] = wordnet_dir.string();
  p["train"] = train_path.string();
  p["tests"] = ojson::array();
  for (const auto& s : test_splits) p["tests"].push_back({{"name", s.name}, {"path", s.path.string()}});
  p["output_dir"] = output_dir.string();
  j["token"] = {{"side", side_policy_name(token.side)}, {"smoothing", token.smoothing}};
  j["sentence"] = {{"tau", sentence.tau},
                   {"coverage_goal", sentence.coverage_goal},
                   {"max_iterations", sentence.max_iterations}};
  j["loop_classifier"] = {{"epochs", loop_classifier.epochs},
                          {"lr", loop_classifier.lr},
                          {"batch_size", loop_classifier.batch_size}};
  j["train"] = {{"mode", mode_name(train.mode)},  {"T", train.temperature},
                {"cl_epochs", train.cl_epochs},   {"cl_lr", train.cl_lr},
                {"ce_epochs", train.ce_epochs},   {"ce_lr", train.ce_lr},
                {"batch_size", train.batch_size}};
  j["model"] = {{"embed_dim", dims.embed}, {"hidden_dim", dims.hidden}, {"proj_dim", dims.proj}};
  return j;
}

void PipelineConfig::validate() const {
  namespace fs = std::filesystem;
  if (train_path.empty() || !fs::is_regular_file(train_path)) {
    throw ValidationError("train file not found: '" + train_path.string() + "'");
  }
  if (method != AugmentMethod::None) {
    if (wordnet_dir.empty() || !fs::is_regular_file(wordnet_dir / "index.noun") ||
        !fs::is_regular_file(wordnet_dir / "data.noun")) {
      throw ValidationError("wordnet dir lacks index.noun/data.noun: '" + wordnet_dir.string() + "'");
    }
  }
  std::set<std::string> names;
  for (const auto& s : test_splits) {
    if (s.name.empty()) throw ValidationError("test split without a name");
    if (!names.insert(s.name).second) throw ValidationError("duplicate test split '" + s.name + "'");
    if (!fs::is_regular_file(s.path)) {
      throw ValidationError("test split '" + s.name + "' not found: '" + s.path.string() + "'");
    }
  }
  if (output_dir.empty()) throw ValidationError("output dir is empty");
  if (dims.embed == 0 || dims.hidden == 0 || dims.proj == 0) throw ValidationError("model dims must be positive");
  if (loop_classifier.epochs < 0 || !(loop_classifier.lr > 0.0) || loop_classifier.batch_size == 0) {
    throw ValidationError("bad loop_classifier settings");
  }
  sentence.validate();
  train.validate();
}

void PipelineConfig::derive_stage_seeds() {
  token.seed = stage_seed(seed, "token_augment");
  sentence.seed = stage_seed(seed, "sentence_augment");
  train.seed = stage_seed(seed, "train");
}

Model init_model(std::span<const SentencePair> train_pairs, std::span<const AugmentedSet> sets,
                 const Dims& dims, std::uint64_t seed) {
  const auto all = labeled_training_pairs(train_pairs, sets);
  Vocab vocab = Vocab::build(all);
  EncoderParams params = EncoderParams::init_uniform(vocab.size(), dims, seed);
  return Model(std::move(vocab), std::move(params));
}

ClassifierTrainer make_loop_trainer(const Dims& dims, const LoopClassifierConfig& cfg,
                                    std::uint64_t seed) {
  return [dims, cfg, seed](std::span<const SentencePair> pairs,
                           int iteration) -> std::unique_ptr<PairClassifier> {
    const std::uint64_t it_seed = mix_seed(seed, static_cast<std::uint64_t>(iteration));
    auto model = std::make_unique<Model>(init_model(pairs, {}, dims, it_seed));
    ContrastiveConfig cc;
    cc.mode = ContrastiveMode::None;
    cc.cl_epochs = 0;
    cc.ce_epochs = cfg.epochs;
    cc.ce_lr = cfg.lr;
    cc.batch_size = cfg.batch_size;
    cc.seed = mix_seed(it_seed, 1);
    train(model->params, model->vocab, pairs, {}, cc);
    return model;
  };
}

PipelineResult run_pipeline(const PipelineConfig& input,
                            const std::function<void(const std::string&)>& log) {
  PipelineConfig cfg = input;
  cfg.validate();
  cfg.derive_stage_seeds();
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);

  const auto train_pairs = load_pairs_file(cfg.train_path.string());
  if (train_pairs.empty()) throw Error("cli_pipeline", "EmptyTrain", "train split is empty");
  say("loaded " + std::to_string(train_pairs.size()) + " train pairs");

  PipelineResult result;
  std::vector<AugmentedSet> sets;
  if (cfg.method != AugmentMethod::None) {
    const wn::Lexicon lex = wn::Lexicon::load_dir(cfg.wordnet_dir);
    const FrequencyTable freq = build_frequency(train_pairs);
    say("lexicon: " + std::to_string(lex.size()) + " synsets");
    if (cfg.method == AugmentMethod::Token || cfg.method == AugmentMethod::Both) {
      TokenAugmentSummary s;
      auto token_sets = augment_corpus_token(train_pairs, lex, freq, cfg.token, &s);
      say("token augmentation: " + std::to_string(s.complete) + "/" + std::to_string(s.pairs) +
          " complete sets, " + std::to_string(s.no_nouns) + " without nouns");
      sets.insert(sets.end(), std::make_move_iterator(token_sets.begin()),
                  std::make_move_iterator(token_sets.end()));
    }
    if (cfg.method == AugmentMethod::Sentence || cfg.method == AugmentMethod::Both) {
      LexicalGenerator gen(lex, freq, stage_seed(cfg.seed, "lexical_generator"), cfg.token.smoothing);
      auto trainer = make_loop_trainer(cfg.dims, cfg.loop_classifier, stage_seed(cfg.seed, "loop_classifier"));
      auto r = run_sentence_augmentation(train_pairs, gen, trainer, cfg.sentence,
                                         [&](const IterationReport& ir) { say(ir.to_json().dump()); });
      say("sentence augmentation: coverage " + std::to_string(r.report.final_coverage) + ", stop " +
          std::string(stop_reason_name(r.report.stop_reason)));
      result.report_json = r.report.to_json().dump(2);
      std::ofstream(cfg.output_dir / "report.json") << result.report_json << '\n';
      sets.insert(sets.end(), std::make_move_iterator(r.sets.begin()),
                  std::make_move_iterator(r.sets.end()));
    }
  }
  result.sets = sets.size();
  for (const auto& s : sets) result.complete_sets += s.complete() ? 1 : 0;
  {
    std::ofstream out(cfg.output_dir / "sets.jsonl", std::ios::binary);
    save_sets(out, sets);
  }

  Model model = init_model(train_pairs, sets, cfg.dims, stage_seed(cfg.seed, "init"));
  result.train = train(model.params, model.vocab, train_pairs, sets, cfg.train);
  say("trained: ce loss " + std::to_string(result.train.ce_loss_before) + " -> " +
      std::to_string(result.train.ce_loss_after));
  save_checkpoint_file((cfg.output_dir / "model.ckpt").string(), model);
  result.checkpoint_checksum = model.params.checksum();
  std::ofstream(cfg.output_dir / "train_report.json") << result.train.to_json().dump(2) << '\n';

  result.metrics.mode = run_label(cfg.method, cfg.train.mode);
  for (const auto& split : cfg.test_splits) {
    const auto pairs = load_pairs_file(split.path.string());
    result.metrics.splits.push_back(evaluate(model, pairs, split.name));
    const auto& m = result.metrics.splits.back();
    say("eval " + m.split + ": " + std::to_string(m.correct) + "/" + std::to_string(m.n));
  }
  std::ofstream(cfg.output_dir / "metrics.json", std::ios::binary)
      << to_json(result.metrics).dump(2) << '\n';
  return result;
}

}  // namespace nlicf
