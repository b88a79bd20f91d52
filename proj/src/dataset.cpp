#include "relpred/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "relpred/error.hpp"
#include "relpred/random.hpp"
#include "relpred/text_io.hpp"

namespace relpred {
namespace {

DatasetRow make_row(const TypedGraph& g, const EmbeddingMatrix& e, NodeId src, NodeId dst) {
  DatasetRow row;
  row.source_id = src;
  row.target_id = dst;
  row.source_name = g.node(src).name;
  row.target_name = g.node(dst).name;
  const auto lookup = [&](const std::string& name) {
    const auto idx = e.find(name);
    if (!idx) fail(ErrorKind::kMissingEmbedding, name);
    return e.input(*idx);
  };
  const auto us = lookup(row.source_name);
  const auto vs = lookup(row.target_name);
  row.features.reserve(us.size() + vs.size());
  row.features.insert(row.features.end(), us.begin(), us.end());
  row.features.insert(row.features.end(), vs.begin(), vs.end());
  return row;
}

}  // namespace

EdgeDataset build_dataset(const TypedGraph& g, const EmbeddingMatrix& e, const DatasetOptions& options) {
  std::map<std::pair<NodeId, NodeId>, std::array<std::uint8_t, kLabelCount>> labelled;
  for (const auto& edge : g.edges()) {
    const auto col = label_index(edge.rel);
    if (!col || !(edge.weight > options.min_label_weight)) continue;
    labelled[{edge.src, edge.dst}][*col] = 1;
  }

  EdgeDataset ds;
  ds.feature_dim = 2 * e.dim();

  if (options.unconnected_ratio > 0.0 && !labelled.empty()) {
    std::vector<NodeId> candidates;
    for (const auto& n : g.nodes()) {
      if (e.find(n.name)) candidates.push_back(n.id);
    }
    std::set<std::pair<NodeId, NodeId>> connected;
    for (const auto& edge : g.edges()) connected.insert({edge.src, edge.dst});
    const auto wanted = static_cast<std::size_t>(std::llround(options.unconnected_ratio * static_cast<double>(labelled.size())));
    Rng rng(derive_seed(options.seed, {0x6e6567}));
    std::size_t added = 0;
    const std::size_t max_attempts = 100 * wanted + 100;
    for (std::size_t attempt = 0; added < wanted && attempt < max_attempts && candidates.size() > 1; ++attempt) {
      const NodeId u = candidates[rng.below(candidates.size())];
      const NodeId v = candidates[rng.below(candidates.size())];
      if (u == v || connected.contains({u, v}) || labelled.contains({u, v})) continue;
      labelled[{u, v}] = {};
      ++added;
    }
  }

  ds.rows.reserve(labelled.size());
  for (const auto& [pair, labels] : labelled) {
    auto row = make_row(g, e, pair.first, pair.second);
    row.labels = labels;
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

std::array<LabelCounts, kLabelCount> per_label_counts(const EdgeDataset& ds) {
  std::array<LabelCounts, kLabelCount> counts{};
  for (const auto& row : ds.rows) {
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      if (row.labels[k]) {
        ++counts[k].positives;
      } else {
        ++counts[k].negatives;
      }
    }
  }
  return counts;
}

DatasetSplit split(const EdgeDataset& ds, const SplitConfig& cfg) {
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "test_fraction must be in (0, 1)");
  }
  const std::size_t n = ds.rows.size();
  if (n < 2) fail(ErrorKind::kTooFewRows, "need at least 2 rows, have " + std::to_string(n));
  const auto test_size = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(n))), 1, n - 1);

  Rng rng(derive_seed(cfg.seed, {0x73706c6974}));
  std::vector<bool> in_test(n, false);
  DatasetSplit out;

  std::optional<std::size_t> column;
  if (cfg.stratify_on) column = label_index(*cfg.stratify_on);
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  if (column) {
    for (std::size_t i = 0; i < n; ++i) (ds.rows[i].labels[*column] ? pos : neg).push_back(i);
  }
  if (column && pos.size() >= 2 && neg.size() >= 2) {
    auto test_pos = static_cast<std::size_t>(
        std::llround(static_cast<double>(pos.size()) * static_cast<double>(test_size) / static_cast<double>(n)));
    test_pos = std::min(test_pos, pos.size());
    if (test_size - test_pos > neg.size()) test_pos = test_size - neg.size();
    const std::size_t test_neg = test_size - test_pos;
    shuffle(std::span(pos), rng);
    shuffle(std::span(neg), rng);
    for (std::size_t i = 0; i < test_pos; ++i) in_test[pos[i]] = true;
    for (std::size_t i = 0; i < test_neg; ++i) in_test[neg[i]] = true;
  } else {
    out.stratification_fallback = cfg.stratify_on.has_value();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(std::span(order), rng);
    for (std::size_t i = 0; i < test_size; ++i) in_test[order[i]] = true;
  }

  out.train.feature_dim = out.test.feature_dim = ds.feature_dim;
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? out.test : out.train).rows.push_back(ds.rows[i]);
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

void append_csv_field(std::string& out, std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

std::vector<std::string> parse_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      field_was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) fail(ErrorKind::kFormatError, "dataset line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

std::string serialize_dataset(const EdgeDataset& ds) {
  std::string out = "source,target,source_id,target_id";
  for (std::size_t k = 0; k < ds.feature_dim; ++k) out += ",f" + std::to_string(k);
  for (auto code : kLabelOrder) out += "," + RelationType(code).str();
  out += '\n';
  for (const auto& row : ds.rows) {
    append_csv_field(out, row.source_name);
    out += ',';
    append_csv_field(out, row.target_name);
    out += ',' + std::to_string(row.source_id) + ',' + std::to_string(row.target_id);
    for (double f : row.features) out += ',' + format_double(f);
    for (auto l : row.labels) out += l ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

EdgeDataset parse_dataset(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorKind::kFormatError, "dataset file has no header");
  const auto header = parse_csv_line(lines[0], 1);
  if (header.size() < 4 + kLabelCount || header[0] != "source" || header[1] != "target") {
    fail(ErrorKind::kFormatError, "unexpected dataset header");
  }
  EdgeDataset ds;
  ds.feature_dim = header.size() - 4 - kLabelCount;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    if (header[4 + ds.feature_dim + k] != RelationType(kLabelOrder[k]).str()) {
      fail(ErrorKind::kFormatError, "label columns out of canonical order");
    }
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = parse_csv_line(lines[li], li + 1);
    const auto where = "dataset line " + std::to_string(li + 1);
    if (fields.size() != header.size()) fail(ErrorKind::kFormatError, where + ": wrong field count");
    DatasetRow row;
    row.source_name = fields[0];
    row.target_name = fields[1];
    const auto sid = parse_int(fields[2]);
    const auto tid = parse_int(fields[3]);
    if (!sid || !tid || *sid < 0 || *tid < 0) fail(ErrorKind::kFormatError, where + ": bad node id");
    row.source_id = static_cast<NodeId>(*sid);
    row.target_id = static_cast<NodeId>(*tid);
    row.features.reserve(ds.feature_dim);
    for (std::size_t k = 0; k < ds.feature_dim; ++k) {
      const auto v = parse_double(fields[4 + k]);
      if (!v || !std::isfinite(*v)) fail(ErrorKind::kFormatError, where + ": bad feature value");
      row.features.push_back(*v);
    }
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      const auto& f = fields[4 + ds.feature_dim + k];
      if (f != "0" && f != "1") fail(ErrorKind::kFormatError, where + ": label must be 0 or 1");
      row.labels[k] = f == "1" ? 1 : 0;
    }
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

void write_dataset(const EdgeDataset& ds, const std::filesystem::path& path) { write_file(path, serialize_dataset(ds)); }

EdgeDataset read_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::kMissingArtifact, path.string());
  return parse_dataset(read_file(path));
}

}  // namespace relpred
