#include <algorithm>

#include "doctest.h"
#include "nlicf/eval_harness.hpp"
#include "support.hpp"

using namespace nlicf;
using namespace nlicf::test;

namespace {

// Knows the gold label of every pair it was built from.
struct Oracle : PairClassifier {
  std::vector<SentencePair> known;
  std::array<double, 3> probabilities(const SentencePair& pair) const override {
    for (const auto& k : known) {
      if (k.premise == pair.premise && k.hypothesis == pair.hypothesis) {
        std::array<double, 3> p{0, 0, 0};
        p[index_of(k.label)] = 1.0;
        return p;
      }
    }
    return {1.0 / 3, 1.0 / 3, 1.0 / 3};
  }
};

struct Fixed : PairClassifier {
  std::array<double, 3> p;
  explicit Fixed(std::array<double, 3> probs) : p(probs) {}
  std::array<double, 3> probabilities(const SentencePair&) const override { return p; }
};

std::vector<SentencePair> distinct_pairs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SentencePair> out;
  for (std::size_t i = 0; i < n; ++i) {
    SentencePair p = random_pair(rng);
    p.premise += " " + std::to_string(i);
    out.push_back(p);
  }
  return out;
}

Metrics metrics(const std::string& split, std::size_t n, std::size_t correct) {
  return {split, n, correct, static_cast<double>(correct) / static_cast<double>(n)};
}

}  // namespace

TEST_CASE("a classifier that always knows the label scores 1.0") {
  Oracle o;
  o.known = distinct_pairs(10, 1);
  const auto m = evaluate(o, o.known, "fixture");
  CHECK(m.split == "fixture");
  CHECK(m.n == 10);
  CHECK(m.correct == 10);
  CHECK(m.accuracy == 1.0);
}

TEST_CASE("ties go to the lowest class index") {
  CHECK(predict(Fixed({0.4, 0.4, 0.2}), {"a", "b", Label::Neutral}) == Label::Entailment);
  CHECK(predict(Fixed({0.2, 0.4, 0.4}), {"a", "b", Label::Neutral}) == Label::Neutral);
  CHECK(predict(Fixed({0.1, 0.2, 0.7}), {"a", "b", Label::Neutral}) == Label::Contradiction);

  const Vocab v = fixture_vocab();
  const Model zero(v, EncoderParams::zeros(v.size(), Dims{4, 4, 4}));
  Rng rng(2);
  std::vector<SentencePair> pairs;
  for (int i = 0; i < 12; ++i) {
    SentencePair p = random_pair(rng);
    p.label = kLabels[i % 3];
    pairs.push_back(p);
  }
  const auto m = evaluate(zero, pairs, "balanced");
  CHECK(m.correct == 4);
  CHECK(m.accuracy == doctest::Approx(1.0 / 3));
}

TEST_CASE("accuracy with hand-set weights matches an independent recount") {
  const Vocab v = fixture_vocab();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Model model(v, random_params(v.size(), Dims{4, 4, 3}, 40 + seed));
    const auto pairs = distinct_pairs(30, 50 + seed);
    std::size_t correct = 0;
    for (const auto& p : pairs) {
      std::vector<double> logits;
      oracle_z(model.params, v.encode_pair(p), &logits);
      const std::size_t best =
          static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
      if (best == index_of(p.label)) ++correct;
    }
    const auto m = evaluate(model, pairs, "hand");
    CHECK(m.correct == correct);
    CHECK(m.accuracy == doctest::Approx(correct / 30.0).epsilon(1e-15));
  }
}

TEST_CASE("evaluation does not depend on input order") {
  const Vocab v = fixture_vocab();
  const Model model(v, random_params(v.size(), Dims{4, 4, 3}, 7));
  auto pairs = distinct_pairs(40, 8);
  const auto first = evaluate(model, pairs, "s");
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    shuffle(std::span<SentencePair>(pairs), rng);
    CHECK(evaluate(model, pairs, "s") == first);
  }
}

TEST_CASE("an empty split is an error") {
  try {
    evaluate(Fixed({1, 0, 0}), {}, "empty");
    FAIL("expected EmptySplit");
  } catch (const Error& e) {
    CHECK(e.code() == "EmptySplit");
  }
}

TEST_CASE("single mode and split gives a one-cell table") {
  const std::vector<ModeReport> reports{{"baseline", {metrics("original", 4, 3)}}};
  const auto t = compare(reports);
  CHECK(t.text == "mode      original\nbaseline     75.00\n");
  CHECK(t.json.at("columns") == nlohmann::ordered_json::array({"original"}));
  CHECK(t.json.at("rows").size() == 1);
  CHECK(t.json.at("rows")[0].at("accuracy").at("original") == 0.75);
}

TEST_CASE("no reports gives a header only") {
  const auto t = compare({});
  CHECK(t.text == "mode\n");
  CHECK(t.json.at("rows").empty());
  CHECK(t.json.at("columns").empty());
}

TEST_CASE("row order and values are kept verbatim") {
  const std::vector<std::string> modes{"RDA-RCL", "baseline", "SCL", "RDA"};
  std::vector<ModeReport> reports;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    reports.push_back({modes[i], {metrics("original", 600, 500 + i), metrics("rp", 300, 10 * i + 1)}});
  }
  const auto t = compare(reports);
  const auto& rows = t.json.at("rows");
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    CHECK(rows[i].at("mode") == modes[i]);
    CHECK(rows[i].at("accuracy").at("original") == reports[i].splits[0].accuracy);
    CHECK(rows[i].at("accuracy").at("rp") == reports[i].splits[1].accuracy);
  }
  // Text rows appear in the same order.
  std::size_t last = 0;
  for (const auto& m : modes) {
    const auto at = t.text.find("\n" + m + " ");
    REQUIRE(at != std::string::npos);
    CHECK(at >= last);
    last = at;
  }
}

TEST_CASE("columns follow first appearance and missing cells show a dash") {
  const std::vector<ModeReport> reports{{"a", {metrics("rp", 2, 1)}},
                                        {"b", {metrics("original", 2, 2), metrics("rp", 2, 0)}}};
  const auto t = compare(reports);
  CHECK(t.json.at("columns") == nlohmann::ordered_json::array({"rp", "original"}));
  CHECK(t.text.find("-") != std::string::npos);
  CHECK_FALSE(t.json.at("rows")[0].at("accuracy").contains("original"));
}

TEST_CASE("mode reports round-trip through json") {
  const ModeReport r{"RDA", {metrics("original", 600, 493), metrics("rp_rh", 2052, 339)}};
  CHECK(mode_report_from_json(to_json(r)) == r);
  CHECK(mode_report_from_json(nlohmann::ordered_json::parse(to_json(r).dump())) == r);
  CHECK_THROWS_AS(mode_report_from_json(nlohmann::ordered_json{{"mode", "x"}}), Error);
}
