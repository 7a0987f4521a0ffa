// Copyright 2026 The ergoset Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ergoset/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ergoset/errors.hpp"

namespace ergoset {

NodeSet::NodeSet(std::vector<NodeIndex> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
}

NodeSet NodeSet::Range(std::size_t n) {
  std::vector<NodeIndex> nodes(n);
  std::iota(nodes.begin(), nodes.end(), NodeIndex{0});
  NodeSet s;
  s.nodes_ = std::move(nodes);
  return s;
}

bool NodeSet::contains(NodeIndex v) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), v);
}

DiGraph DiGraph::FromEdges(std::vector<std::string> labels,
                           std::vector<Edge> edges) {
  DiGraph g;
  const std::size_t n = labels.size();
  g.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.index_.emplace(labels[i], static_cast<NodeIndex>(i)).second) {
      throw DomainError("duplicate node label '" + labels[i] + "'");
    }
  }
  g.labels_ = std::move(labels);

  for (const Edge& e : edges) {
    if (e.source >= n || e.target >= n) {
      throw DomainError(fmt::format("edge ({}, {}) outside node range [0, {})",
                                    e.source, e.target, n));
    }
    if (!std::isfinite(e.weight) || e.weight <= 0.0) {
      throw DomainError(fmt::format("edge ({}, {}) has non-positive weight {}",
                                    e.source, e.target, e.weight));
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  for (const Edge& e : edges) {
    if (!g.edges_.empty() && g.edges_.back().source == e.source &&
        g.edges_.back().target == e.target) {
      g.edges_.back().weight += e.weight;
    } else {
      g.edges_.push_back(e);
    }
  }

  g.out_offsets_.assign(n + 1, 0);
  g.in_offsets_.assign(n + 1, 0);
  for (const Edge& e : g.edges_) {
    ++g.out_offsets_[e.source + 1];
    ++g.in_offsets_[e.target + 1];
  }
  std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(),
                   g.out_offsets_.begin());
  std::partial_sum(g.in_offsets_.begin(), g.in_offsets_.end(),
                   g.in_offsets_.begin());
  g.out_.resize(g.edges_.size());
  g.in_.resize(g.edges_.size());
  std::vector<std::size_t> in_fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    const Edge& e = g.edges_[i];
    // Edges are sorted by source, so out_ is filled in order.
    g.out_[i] = {e.target, e.weight};
    g.in_[in_fill[e.target]++] = {e.source, e.weight};
  }
  return g;
}

DiGraph DiGraph::FromEdges(std::size_t node_count, std::vector<Edge> edges) {
  std::vector<std::string> labels(node_count);
  for (std::size_t i = 0; i < node_count; ++i) labels[i] = std::to_string(i);
  return FromEdges(std::move(labels), std::move(edges));
}

std::optional<NodeIndex> DiGraph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const Neighbor> DiGraph::out_neighbors(NodeIndex v) const {
  return {out_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
}

std::span<const Neighbor> DiGraph::in_neighbors(NodeIndex v) const {
  return {in_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
}

double DiGraph::weighted_out(NodeIndex v) const {
  double sum = 0.0;
  for (const Neighbor& nb : out_neighbors(v)) sum += nb.weight;
  return sum;
}

double DiGraph::weighted_in(NodeIndex v) const {
  double sum = 0.0;
  for (const Neighbor& nb : in_neighbors(v)) sum += nb.weight;
  return sum;
}

std::optional<double> DiGraph::weight(NodeIndex source, NodeIndex target) const {
  auto row = out_neighbors(source);
  auto it = std::lower_bound(
      row.begin(), row.end(), target,
      [](const Neighbor& nb, NodeIndex t) { return nb.node < t; });
  if (it == row.end() || it->node != target) return std::nullopt;
  return it->weight;
}

double DiGraph::total_weight() const {
  double sum = 0.0;
  for (const Edge& e : edges_) sum += e.weight;
  return sum;
}

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\v\f");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\v\f");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> SplitFields(std::string_view line,
                                          Delimiter delimiter) {
  std::vector<std::string_view> fields;
  if (delimiter == Delimiter::kComma) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(Trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

double ParseWeight(std::string_view field, std::size_t line_no) {
  const std::string text(field);
  char* end = nullptr;
  errno = 0;
  const double w = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw ParseError(line_no, "invalid weight '" + text + "'");
  }
  if (!std::isfinite(w) || w <= 0.0) {
    throw ParseError(line_no, "weight must be positive and finite, got '" + text + "'");
  }
  return w;
}

class GraphBuilder {
 public:
  NodeIndex Intern(std::string_view label) {
    auto [it, inserted] =
        index_.emplace(std::string(label), static_cast<NodeIndex>(labels_.size()));
    if (inserted) labels_.emplace_back(label);
    return it->second;
  }

  void AddEdge(NodeIndex s, NodeIndex t, double w) { edges_.push_back({s, t, w}); }

  bool empty() const { return labels_.empty(); }

  DiGraph Build() && {
    return DiGraph::FromEdges(std::move(labels_), std::move(edges_));
  }

 private:
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
};

}  // namespace

DiGraph ReadEdgeList(std::istream& in, const EdgeListOptions& options) {
  if (!std::isfinite(options.default_weight) || options.default_weight <= 0.0) {
    throw ParseError(0, "default weight must be positive and finite");
  }
  GraphBuilder builder;
  bool in_node_section = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    if (line == "NODES:") {
      in_node_section = true;
      continue;
    }
    if (line == "EDGES:") {
      in_node_section = false;
      continue;
    }

    const auto fields = SplitFields(line, options.delimiter);
    for (std::string_view f : fields) {
      if (f.empty()) throw ParseError(line_no, "empty field");
    }
    if (in_node_section) {
      for (std::string_view f : fields) builder.Intern(f);
      continue;
    }
    if (fields.size() != 2 && fields.size() != 3) {
      throw ParseError(line_no, fmt::format("expected 'src dst [weight]', got {} field(s)",
                                            fields.size()));
    }
    const double w = fields.size() == 3 ? ParseWeight(fields[2], line_no)
                                        : options.default_weight;
    const NodeIndex s = builder.Intern(fields[0]);
    const NodeIndex t = builder.Intern(fields[1]);
    builder.AddEdge(s, t, w);
  }
  if (builder.empty()) throw ParseError(0, "empty input: no nodes");
  return std::move(builder).Build();
}

DiGraph ParseEdgeList(std::string_view text, const EdgeListOptions& options) {
  std::istringstream in{std::string(text)};
  return ReadEdgeList(in, options);
}

void WriteEdgeList(std::ostream& out, const DiGraph& g) {
  out << "NODES:\n";
  for (const std::string& label : g.labels()) out << label << '\n';
  out << "EDGES:\n";
  for (const Edge& e : g.edges()) {
    out << g.label(e.source) << ' ' << g.label(e.target) << ' '
        << fmt::format("{:.17g}", e.weight) << '\n';
  }
}

std::string ToEdgeList(const DiGraph& g) {
  std::ostringstream out;
  WriteEdgeList(out, g);
  return out.str();
}

DiGraph Reverse(const DiGraph& g) {
  std::vector<Edge> edges;
  edges.reserve(g.edge_count());
  for (const Edge& e : g.edges()) edges.push_back({e.target, e.source, e.weight});
  return DiGraph::FromEdges(std::vector<std::string>(g.labels().begin(), g.labels().end()),
                            std::move(edges));
}

DiGraph InducedSubgraph(const DiGraph& g, const NodeSet& s) {
  if (!s.empty() && s.back() >= g.node_count()) {
    throw DomainError(fmt::format("node index {} outside graph of {} nodes", s.back(),
                                  g.node_count()));
  }
  constexpr NodeIndex kAbsent = ~NodeIndex{0};
  std::vector<NodeIndex> local(g.node_count(), kAbsent);
  std::vector<std::string> labels;
  labels.reserve(s.size());
  for (NodeIndex v : s) {
    local[v] = static_cast<NodeIndex>(labels.size());
    labels.push_back(g.label(v));
  }
  std::vector<Edge> edges;
  for (NodeIndex v : s) {
    for (const Neighbor& nb : g.out_neighbors(v)) {
      if (local[nb.node] != kAbsent) edges.push_back({local[v], local[nb.node], nb.weight});
    }
  }
  return DiGraph::FromEdges(std::move(labels), std::move(edges));
}

std::vector<NodeSet> WeaklyConnectedComponents(const DiGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<NodeIndex> parent(n);
  std::iota(parent.begin(), parent.end(), NodeIndex{0});
  auto find = [&](NodeIndex v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const Edge& e : g.edges()) {
    const NodeIndex a = find(e.source);
    const NodeIndex b = find(e.target);
    // Root at the smaller index so roots order components by smallest member.
    if (a < b) parent[b] = a;
    else if (b < a) parent[a] = b;
  }
  std::vector<std::vector<NodeIndex>> groups;
  std::vector<std::size_t> group_of(n, 0);
  for (NodeIndex v = 0; v < n; ++v) {
    const NodeIndex root = find(v);
    if (root == v) {
      group_of[v] = groups.size();
      groups.emplace_back();
    }
    groups[group_of[root]].push_back(v);
  }
  std::vector<NodeSet> components;
  components.reserve(groups.size());
  for (auto& members : groups) components.emplace_back(std::move(members));
  return components;
}

}  // namespace ergoset
