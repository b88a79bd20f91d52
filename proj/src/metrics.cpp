#include "relpred/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "relpred/error.hpp"
#include "relpred/text_io.hpp"

namespace relpred {

ConfusionMatrix confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels) {
  if (predictions.size() != labels.size()) {
    fail(ErrorKind::kLengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                         std::to_string(labels.size()) + " labels");
  }
  if (predictions.empty()) fail(ErrorKind::kEmptyInput, "no predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool p = predictions[i] != 0;
    const bool l = labels[i] != 0;
    if (p && l) ++cm.tp;
    else if (p) ++cm.fp;
    else if (l) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

std::optional<double> mean_defined(std::span<const RelationMetrics> rows, std::optional<double> Metrics::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (const auto& v = r.metrics.*field) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

Metrics metrics(const ConfusionMatrix& cm) {
  Metrics m;
  const auto tp = static_cast<double>(cm.tp);
  m.recall = ratio(tp, tp + static_cast<double>(cm.fn));
  m.precision = ratio(tp, tp + static_cast<double>(cm.fp));
  if (m.recall && m.precision) m.f1 = ratio(2.0 * *m.precision * *m.recall, *m.precision + *m.recall);
  m.accuracy = ratio(tp + static_cast<double>(cm.tn), static_cast<double>(cm.total()));
  return m;
}

MacroAverage macro_average(std::span<const RelationMetrics> per_relation) {
  MacroAverage avg;
  avg.recall = mean_defined(per_relation, &Metrics::recall);
  avg.precision = mean_defined(per_relation, &Metrics::precision);
  avg.f1 = mean_defined(per_relation, &Metrics::f1);
  const bool any = std::any_of(per_relation.begin(), per_relation.end(), [](const RelationMetrics& r) {
    return r.metrics.recall || r.metrics.precision || r.metrics.f1 || r.metrics.accuracy;
  });
  if (!any) fail(ErrorKind::kAllUndefined, "no relation has a defined metric");
  return avg;
}

MacroAverage macro_average(const MetricsReport& report) { return macro_average(report.per_relation); }

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::vector<const RelationMetrics*> in_label_order(const MetricsReport& report) {
  std::vector<const RelationMetrics*> out;
  for (auto code : kLabelOrder) {
    for (const auto& r : report.per_relation) {
      if (r.relation == code) out.push_back(&r);
    }
  }
  return out;
}

std::string two_decimals(const std::optional<double>& v) {
  if (!v) return "—";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  // The em dash is three bytes but one column.
  std::size_t cols = 0;
  for (unsigned char c : s) cols += (c & 0xC0) != 0x80;
  if (cols < width) s.append(width - cols, ' ');
  return s;
}

struct MetricRow {
  const char* text_label;
  const char* key;
  std::optional<double> Metrics::*field;
  std::optional<double> MacroAverage::*macro_field;
};

constexpr MetricRow kRows[] = {
    {"Recall", "recall", &Metrics::recall, &MacroAverage::recall},
    {"Precision", "precision", &Metrics::precision, &MacroAverage::precision},
    {"F1 Score", "f1", &Metrics::f1, &MacroAverage::f1},
    {"Accuracy", "accuracy", &Metrics::accuracy, nullptr},
};

std::string render_text(const MetricsReport& report) {
  const auto rels = in_label_order(report);
  constexpr std::size_t kFirst = 11;
  constexpr std::size_t kCol = 11;
  std::string out = pad("", kFirst);
  for (const auto* r : rels) out += pad(RelationType(r->relation).str(), kCol);
  out += pad("macro", kCol);
  while (!out.empty() && out.back() == ' ') out.pop_back();
  out += '\n';
  for (const auto& row : kRows) {
    std::string line = pad(row.text_label, kFirst);
    for (const auto* r : rels) line += pad(two_decimals(r->metrics.*row.field), kCol);
    line += pad(row.macro_field ? two_decimals(report.macro.*row.macro_field) : "", kCol);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  if (!report.metadata.empty()) {
    out += '\n';
    for (const auto& [k, v] : report.metadata) out += k + ": " + v + '\n';
  }
  return out;
}

std::string csv_value(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string render_csv(const MetricsReport& report) {
  const auto rels = in_label_order(report);
  std::string out = "metric";
  for (const auto* r : rels) out += "," + RelationType(r->relation).str();
  out += ",macro\n";
  for (const auto& row : kRows) {
    out += row.key;
    for (const auto* r : rels) out += "," + csv_value(r->metrics.*row.field);
    out += "," + (row.macro_field ? csv_value(report.macro.*row.macro_field) : std::string());
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json json_value(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string render_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["label_order"] = nlohmann::ordered_json::array();
  for (auto code : kLabelOrder) j["label_order"].push_back(RelationType(code).str());
  auto& rels = j["relations"] = nlohmann::ordered_json::array();
  for (const auto* r : in_label_order(report)) {
    nlohmann::ordered_json e;
    e["relation"] = RelationType(r->relation).str();
    for (const auto& row : kRows) e[row.key] = json_value(r->metrics.*row.field);
    e["confusion"] = {{"tp", r->confusion.tp}, {"fp", r->confusion.fp}, {"tn", r->confusion.tn}, {"fn", r->confusion.fn}};
    rels.push_back(std::move(e));
  }
  j["macro"] = {{"recall", json_value(report.macro.recall)},
                {"precision", json_value(report.macro.precision)},
                {"f1", json_value(report.macro.f1)}};
  auto& meta = j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metadata) meta[k] = v;
  return j.dump(2) + "\n";
}

}  // namespace

std::string render_report(const MetricsReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kText: return render_text(report);
    case ReportFormat::kCsv: return render_csv(report);
    case ReportFormat::kJson: return render_json(report);
  }
  return {};
}

MetricsReport parse_report_csv(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() != 1 + std::size(kRows)) fail(ErrorKind::kFormatError, "report CSV must have 5 lines");
  const auto header = split(lines[0], ',');
  if (header.size() < 2 || header.front() != "metric" || header.back() != "macro") {
    fail(ErrorKind::kFormatError, "bad report CSV header");
  }
  MetricsReport report;
  for (std::size_t c = 1; c + 1 < header.size(); ++c) {
    const auto rel = RelationType::parse(header[c]);
    if (!is_predictable(rel)) fail(ErrorKind::kFormatError, "unknown relation column " + std::string(header[c]));
    report.per_relation.push_back({rel.code, {}, {}});
  }
  auto cell = [](std::string_view s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    const auto v = parse_double(s);
    if (!v) fail(ErrorKind::kFormatError, "bad report value '" + std::string(s) + "'");
    return v;
  };
  for (std::size_t i = 0; i < std::size(kRows); ++i) {
    const auto fields = split(lines[i + 1], ',');
    if (fields.size() != header.size() || fields[0] != kRows[i].key) fail(ErrorKind::kFormatError, "bad report row");
    for (std::size_t c = 1; c + 1 < header.size(); ++c) report.per_relation[c - 1].metrics.*kRows[i].field = cell(fields[c]);
    if (kRows[i].macro_field) report.macro.*kRows[i].macro_field = cell(fields.back());
  }
  return report;
}

}  // namespace relpred
