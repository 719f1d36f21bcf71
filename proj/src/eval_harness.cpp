#include "nlicf/eval_harness.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace nlicf {

Label predict(const PairClassifier& classifier, const SentencePair& pair) {
  const auto p = classifier.probabilities(pair);
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;
  }
  return kLabels[best];
}

Metrics evaluate(const PairClassifier& classifier, std::span<const SentencePair> pairs,
                 const std::string& split_name) {
  if (pairs.empty()) throw Error("eval_harness", "EmptySplit", "split '" + split_name + "' is empty");
  Metrics m;
  m.split = split_name;
  m.n = pairs.size();
  for (const auto& p : pairs) {
    if (predict(classifier, p) == p.label) ++m.correct;
  }
  m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.n);
  return m;
}

nlohmann::ordered_json to_json(const ModeReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = report.mode;
  auto& splits = j["splits"] = nlohmann::ordered_json::array();
  for (const auto& m : report.splits) {
    splits.push_back({{"split", m.split}, {"n", m.n}, {"correct", m.correct}, {"accuracy", m.accuracy}});
  }
  return j;
}

ModeReport mode_report_from_json(const nlohmann::ordered_json& j) {
  try {
    ModeReport r;
    r.mode = j.at("mode").get<std::string>();
    for (const auto& s : j.at("splits")) {
      Metrics m;
      m.split = s.at("split").get<std::string>();
      m.n = s.at("n").get<std::size_t>();
      m.correct = s.at("correct").get<std::size_t>();
      m.accuracy = s.at("accuracy").get<double>();
      r.splits.push_back(std::move(m));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error("eval_harness", "BadMetrics", e.what());
  }
}

ComparisonTable compare(std::span<const ModeReport> reports) {
  std::vector<std::string> columns;
  for (const auto& r : reports) {
    for (const auto& m : r.splits) {
      if (std::find(columns.begin(), columns.end(), m.split) == columns.end()) {
        columns.push_back(m.split);
      }
    }
  }

  auto cell = [](const ModeReport& r, const std::string& col) -> std::string {
    for (const auto& m : r.splits) {
      if (m.split == col) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", 100.0 * m.accuracy);
        return buf;
      }
    }
    return "-";
  };

  std::size_t mode_w = 4;
  for (const auto& r : reports) mode_w = std::max(mode_w, r.mode.size());
  std::vector<std::size_t> widths;
  for (const auto& c : columns) widths.push_back(std::max<std::size_t>(c.size(), 6));

  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t w, bool left) {
    const std::string fill(w > s.size() ? w - s.size() : 0, ' ');
    out << (left ? s + fill : fill + s);
  };
  pad("mode", mode_w, true);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << "  ";
    pad(columns[i], widths[i], false);
  }
  out << '\n';

  ComparisonTable table;
  table.json["columns"] = columns;
  auto& rows = table.json["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    pad(r.mode, mode_w, true);
    nlohmann::ordered_json row;
    row["mode"] = r.mode;
    auto& acc = row["accuracy"] = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << "  ";
      pad(cell(r, columns[i]), widths[i], false);
      for (const auto& m : r.splits) {
        if (m.split == columns[i]) acc[columns[i]] = m.accuracy;
      }
    }
    out << '\n';
    rows.push_back(std::move(row));
  }
  table.text = out.str();
  return table;
}

}  // namespace nlicf
