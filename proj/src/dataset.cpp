// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "ctqw/errors.hpp"
#include "ctqw/rng.hpp"

namespace ctqw {

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(node_count, 0);
  for (const auto& [i, j] : edges) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

std::vector<std::size_t> Dataset::labels() const {
  std::vector<std::size_t> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.label);
  return out;
}

std::size_t Dataset::max_nodes() const {
  std::size_t best = 0;
  for (const auto& g : graphs) best = std::max(best, g.node_count);
  return best;
}

std::vector<Edge> normalize_edges(std::vector<Edge> edges) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (auto [i, j] : edges) {
    if (i == j) continue;
    out.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void validate(const Graph& graph) {
  if (graph.node_count == 0) throw ContractViolation("graph has no nodes");
  if (graph.features.size() != graph.node_count * graph.feature_dim) {
    throw ContractViolation("graph feature matrix has " + std::to_string(graph.features.size()) +
                            " values, expected " + std::to_string(graph.node_count) + " x " +
                            std::to_string(graph.feature_dim));
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto [i, j] = graph.edges[e];
    if (i >= graph.node_count || j >= graph.node_count) {
      throw ContractViolation("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") outside a graph of " + std::to_string(graph.node_count) + " nodes");
    }
    if (i >= j) throw ContractViolation("edge list must hold pairs i < j without self-loops");
    if (e > 0 && graph.edges[e - 1] >= graph.edges[e]) {
      throw ContractViolation("edge list must be sorted and deduplicated");
    }
  }
}

void validate(const Dataset& dataset) {
  if (dataset.num_classes < 2) throw ContractViolation("dataset needs at least two classes");
  std::vector<bool> seen(dataset.num_classes, false);
  for (const auto& g : dataset.graphs) {
    validate(g);
    if (g.feature_dim != dataset.feature_dim) {
      throw ContractViolation("graph feature width " + std::to_string(g.feature_dim) +
                              " differs from dataset width " + std::to_string(dataset.feature_dim));
    }
    if (g.label >= dataset.num_classes) {
      throw ContractViolation("label " + std::to_string(g.label) + " outside [0, " +
                              std::to_string(dataset.num_classes) + ")");
    }
    seen[g.label] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ContractViolation("some class has no graphs");
  }
}

namespace {

struct LineReader {
  std::ifstream in;
  std::filesystem::path path;
  std::size_t line_no = 0;
  std::string line;

  explicit LineReader(const std::filesystem::path& p) : in(p), path(p) {
    if (!in) throw DatasetError("malformed dataset: cannot read " + p.filename().string());
  }

  // Next non-blank line, or false at end of file.
  bool next() {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path.filename().string() + ":" + std::to_string(line_no) + ": " + what);
  }

  std::vector<std::string_view> fields(char sep) const {
    std::vector<std::string_view> out;
    std::string_view rest(line);
    while (true) {
      const auto pos = rest.find(sep);
      out.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    return out;
  }
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long parse_int(const LineReader& r, std::string_view text) {
  text = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    r.fail("expected integer, got '" + std::string(text) + "'");
  }
  return value;
}

double parse_real(const LineReader& r, std::string_view text) {
  text = trim(text);
  std::string owned(text);
  std::istringstream in(owned);
  in.imbue(std::locale::classic());
  double value = 0.0;
  in >> value;
  if (owned.empty() || in.fail() || !(in >> std::ws).eof()) {
    r.fail("expected real number, got '" + owned + "'");
  }
  return value;
}

std::filesystem::path required(const std::filesystem::path& dir, const std::string& name,
                               const std::string& suffix) {
  auto p = dir / (name + "_" + suffix + ".txt");
  if (!std::filesystem::is_regular_file(p)) {
    throw DatasetError("malformed dataset: missing file " + p.filename().string() + " in " +
                       dir.string());
  }
  return p;
}

}  // namespace

Dataset parse_tu_dataset(const std::filesystem::path& root_dir, const std::string& name) {
  const auto dir = root_dir / name;
  if (!std::filesystem::is_directory(dir)) {
    throw DatasetError("dataset directory " + dir.string() + " not found");
  }
  const auto a_path = required(dir, name, "A");
  const auto indicator_path = required(dir, name, "graph_indicator");
  const auto labels_path = required(dir, name, "graph_labels");

  // Node -> graph (both 1-based on disk).
  std::vector<std::size_t> node_graph;
  {
    LineReader r(indicator_path);
    while (r.next()) {
      const auto g = parse_int(r, r.line);
      if (g < 1) r.fail("graph id " + std::to_string(g) + " below 1");
      node_graph.push_back(static_cast<std::size_t>(g - 1));
    }
  }
  std::vector<long long> raw_labels;
  {
    LineReader r(labels_path);
    while (r.next()) raw_labels.push_back(parse_int(r, r.line));
  }
  const std::size_t graph_count = raw_labels.size();
  if (graph_count == 0) throw DatasetError("malformed dataset: no graph labels in " + labels_path.filename().string());

  std::vector<std::size_t> local_index(node_graph.size());
  std::vector<std::size_t> sizes(graph_count, 0);
  {
    for (std::size_t v = 0; v < node_graph.size(); ++v) {
      if (node_graph[v] >= graph_count) {
        throw ParseError(indicator_path.filename().string() + ":" + std::to_string(v + 1) +
                         ": graph id " + std::to_string(node_graph[v] + 1) + " exceeds graph count " +
                         std::to_string(graph_count));
      }
      local_index[v] = sizes[node_graph[v]]++;
    }
  }
  for (std::size_t g = 0; g < graph_count; ++g) {
    if (sizes[g] == 0) throw DatasetError("malformed dataset: graph " + std::to_string(g + 1) + " has no nodes");
  }

  std::vector<std::vector<Edge>> edges(graph_count);
  {
    LineReader r(a_path);
    while (r.next()) {
      const auto f = r.fields(',');
      if (f.size() != 2) r.fail("expected 'i, j'");
      const auto i = parse_int(r, f[0]), j = parse_int(r, f[1]);
      const auto n = static_cast<long long>(node_graph.size());
      if (i < 1 || i > n || j < 1 || j > n) {
        r.fail("node index out of range [1, " + std::to_string(n) + "]");
      }
      const auto gi = node_graph[static_cast<std::size_t>(i - 1)];
      const auto gj = node_graph[static_cast<std::size_t>(j - 1)];
      if (gi != gj) r.fail("edge joins nodes of different graphs");
      edges[gi].emplace_back(local_index[static_cast<std::size_t>(i - 1)],
                             local_index[static_cast<std::size_t>(j - 1)]);
    }
  }

  std::vector<long long> node_labels;
  const auto node_labels_path = dir / (name + "_node_labels.txt");
  if (std::filesystem::is_regular_file(node_labels_path)) {
    LineReader r(node_labels_path);
    while (r.next()) node_labels.push_back(parse_int(r, r.fields(',')[0]));
    if (node_labels.size() != node_graph.size()) {
      throw DatasetError("malformed dataset: " + node_labels_path.filename().string() + " has " +
                         std::to_string(node_labels.size()) + " rows for " +
                         std::to_string(node_graph.size()) + " nodes");
    }
  }
  std::vector<std::vector<double>> attributes;
  const auto attributes_path = dir / (name + "_node_attributes.txt");
  if (std::filesystem::is_regular_file(attributes_path)) {
    LineReader r(attributes_path);
    while (r.next()) {
      std::vector<double> row;
      for (auto field : r.fields(',')) row.push_back(parse_real(r, field));
      if (!attributes.empty() && row.size() != attributes.front().size()) {
        r.fail("expected " + std::to_string(attributes.front().size()) + " attributes");
      }
      attributes.push_back(std::move(row));
    }
    if (attributes.size() != node_graph.size()) {
      throw DatasetError("malformed dataset: " + attributes_path.filename().string() + " has " +
                         std::to_string(attributes.size()) + " rows for " +
                         std::to_string(node_graph.size()) + " nodes");
    }
  }

  std::map<long long, std::size_t> label_code;
  for (auto v : node_labels) label_code.emplace(v, 0);
  {
    std::size_t code = 0;
    for (auto& [v, c] : label_code) c = code++;
  }
  std::map<long long, std::size_t> class_code;
  for (auto v : raw_labels) class_code.emplace(v, 0);
  {
    std::size_t code = 0;
    for (auto& [v, c] : class_code) c = code++;
  }

  const std::size_t onehot = label_code.size();
  const std::size_t attr = attributes.empty() ? 0 : attributes.front().size();
  Dataset ds;
  ds.name = name;
  ds.num_classes = class_code.size();
  ds.feature_dim = onehot + attr;
  ds.graphs.resize(graph_count);
  for (std::size_t g = 0; g < graph_count; ++g) {
    auto& graph = ds.graphs[g];
    graph.node_count = sizes[g];
    graph.feature_dim = ds.feature_dim;
    graph.features.assign(sizes[g] * ds.feature_dim, 0.0);
    graph.label = class_code.at(raw_labels[g]);
    graph.edges = normalize_edges(std::move(edges[g]));
  }
  for (std::size_t v = 0; v < node_graph.size(); ++v) {
    auto& graph = ds.graphs[node_graph[v]];
    double* row = graph.features.data() + local_index[v] * ds.feature_dim;
    if (onehot) row[label_code.at(node_labels[v])] = 1.0;
    for (std::size_t a = 0; a < attr; ++a) row[onehot + a] = attributes[v][a];
  }
  if (ds.num_classes < 2) throw DatasetError("malformed dataset: fewer than two graph classes");
  return ds;
}

Dataset augment_degree_features(const Dataset& dataset) {
  std::size_t deg_max = 0;
  for (const auto& g : dataset.graphs) {
    for (auto d : g.degrees()) deg_max = std::max(deg_max, d);
  }
  if (deg_max == 0) {
    std::clog << "warning: " << dataset.name
              << ": every graph is edgeless; degree feature set to 0\n";
  }
  const double denom = deg_max == 0 ? 1.0 : std::log1p(static_cast<double>(deg_max));
  Dataset out = dataset;
  out.feature_dim = dataset.feature_dim + 1;
  for (auto& g : out.graphs) {
    const auto deg = g.degrees();
    std::vector<double> features;
    features.reserve(g.node_count * out.feature_dim);
    for (std::size_t v = 0; v < g.node_count; ++v) {
      auto row = g.features.begin() + static_cast<std::ptrdiff_t>(v * g.feature_dim);
      features.insert(features.end(), row, row + static_cast<std::ptrdiff_t>(g.feature_dim));
      features.push_back(deg_max == 0 ? 0.0 : std::log1p(static_cast<double>(deg[v])) / denom);
    }
    g.features = std::move(features);
    g.feature_dim = out.feature_dim;
  }
  return out;
}

void write_fixture(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot open " + path.string() + " for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << dataset.graphs.size() << ' ' << dataset.num_classes << ' ' << dataset.feature_dim << '\n';
  for (const auto& g : dataset.graphs) {
    out << g.node_count << ' ' << g.edges.size() << ' ' << g.label << '\n';
    for (std::size_t v = 0; v < g.node_count; ++v) {
      for (std::size_t k = 0; k < g.feature_dim; ++k) {
        if (k) out << ' ';
        out << g.features[v * g.feature_dim + k];
      }
      out << '\n';
    }
    for (const auto& [i, j] : g.edges) out << i << ' ' << j << '\n';
  }
  if (!out) throw DatasetError("failed writing " + path.string());
}

Dataset read_fixture(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw DatasetError("fixture " + path.string() + " not found");
  }
  LineReader r(path);
  auto ints = [&r](std::size_t expected) {
    if (!r.next()) r.fail("unexpected end of file");
    std::vector<std::size_t> out;
    std::istringstream in(r.line);
    std::string tok;
    while (in >> tok) {
      const auto v = parse_int(r, tok);
      if (v < 0) r.fail("negative value " + tok);
      out.push_back(static_cast<std::size_t>(v));
    }
    if (out.size() != expected) r.fail("expected " + std::to_string(expected) + " integers");
    return out;
  };
  const auto header = ints(3);
  Dataset ds;
  ds.name = path.stem().string();
  ds.num_classes = header[1];
  ds.feature_dim = header[2];
  for (std::size_t g = 0; g < header[0]; ++g) {
    const auto gh = ints(3);
    Graph graph;
    graph.node_count = gh[0];
    graph.label = gh[2];
    graph.feature_dim = ds.feature_dim;
    for (std::size_t v = 0; v < graph.node_count; ++v) {
      if (ds.feature_dim == 0) continue;
      if (!r.next()) r.fail("unexpected end of file");
      std::istringstream in(r.line);
      std::string tok;
      std::size_t count = 0;
      while (in >> tok) {
        graph.features.push_back(parse_real(r, tok));
        ++count;
      }
      if (count != ds.feature_dim) r.fail("expected " + std::to_string(ds.feature_dim) + " features");
    }
    std::vector<Edge> edges;
    for (std::size_t e = 0; e < gh[1]; ++e) {
      const auto pair = ints(2);
      if (pair[0] >= graph.node_count || pair[1] >= graph.node_count) r.fail("edge endpoint out of range");
      edges.emplace_back(pair[0], pair[1]);
    }
    graph.edges = normalize_edges(std::move(edges));
    ds.graphs.push_back(std::move(graph));
  }
  return ds;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t f, std::size_t total) const {
  std::vector<bool> excluded(total, false);
  for (auto i : folds.at(f)) excluded[i] = true;
  for (auto i : inner_val.at(f)) excluded[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < total; ++i) {
    if (!excluded[i]) out.push_back(i);
  }
  return out;
}

FoldPlan make_folds(const Dataset& dataset, std::size_t k, double val_fraction, std::uint64_t seed) {
  const std::size_t n = dataset.graphs.size();
  if (k < 2) throw ConfigError("fold count must be at least 2, got " + std::to_string(k));
  if (k > n) {
    throw ConfigError("fold count " + std::to_string(k) + " exceeds dataset size " + std::to_string(n));
  }
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(std::max<std::size_t>(dataset.num_classes, 1));
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = dataset.graphs[i].label;
    if (c >= by_class.size()) by_class.resize(c + 1);
    by_class[c].push_back(i);
  }

  // Class-major dealing: members of each class are shuffled, the classes are
  // laid end to end, and position p goes to fold p mod k. Every fold then
  // holds floor or ceil of N_c / k members of each class c.
  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(k);
  Rng rng({seed, 0x464f4c44});
  std::size_t position = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng.engine());
    for (auto i : members) plan.folds[position++ % k].push_back(i);
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());

  plan.inner_val.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<bool> in_test(n, false);
    for (auto i : plan.folds[f]) in_test[i] = true;
    Rng fold_rng({seed, 0x56414c, f});
    for (const auto& members : by_class) {
      std::vector<std::size_t> train;
      for (auto i : members) {
        if (!in_test[i]) train.push_back(i);
      }
      std::sort(train.begin(), train.end());
      std::shuffle(train.begin(), train.end(), fold_rng.engine());
      auto take = static_cast<std::size_t>(std::ceil(val_fraction * static_cast<double>(train.size())));
      if (take >= train.size() && train.size() > 1) take = train.size() - 1;
      plan.inner_val[f].insert(plan.inner_val[f].end(), train.begin(),
                               train.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(plan.inner_val[f].begin(), plan.inner_val[f].end());
  }
  return plan;
}

}  // namespace ctqw
