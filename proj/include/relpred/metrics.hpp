#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relpred/graph.hpp"

namespace relpred {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Throws kLengthMismatch, kEmptyInput.
ConfusionMatrix confusion(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels);

// nullopt marks a 0/0 ratio. Never substituted by 0.
struct Metrics {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
  std::optional<double> accuracy;
};

Metrics metrics(const ConfusionMatrix& cm);

struct MacroAverage {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
};

struct RelationMetrics {
  RelationCode relation;
  ConfusionMatrix confusion;
  Metrics metrics;
};

struct MetricsReport {
  std::vector<RelationMetrics> per_relation;
  MacroAverage macro;
  std::vector<std::pair<std::string, std::string>> metadata;
};

// Unweighted mean of each metric over the relations where it is defined.
// Throws kAllUndefined when no relation has any defined metric.
MacroAverage macro_average(std::span<const RelationMetrics> per_relation);
MacroAverage macro_average(const MetricsReport& report);

enum class ReportFormat { kText, kCsv, kJson };

// Relations become columns in label order and metrics become rows. Text
// rounds to two decimals and shows undefined values as an em dash; CSV
// leaves them empty; JSON writes null.
std::string render_report(const MetricsReport& report, ReportFormat format);

// Reads back the per-relation and macro values written by the CSV renderer.
MetricsReport parse_report_csv(std::string_view text);

}  // namespace relpred
