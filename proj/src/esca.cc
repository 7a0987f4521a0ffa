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

#include "ergoset/esca.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "ergoset/errors.hpp"

namespace ergoset {

namespace {

std::vector<bool> Membership(std::size_t n, const NodeSet& s) {
  if (!s.empty() && s.back() >= n) {
    throw DomainError("node set refers to an index outside the graph");
  }
  std::vector<bool> in(n, false);
  for (NodeIndex v : s) in[v] = true;
  return in;
}

// Stationary distribution of the walk restricted to g[y]. y is strongly
// connected, so the distribution is unique; it is obtained from
// π (I - T) = 0 with one equation replaced by Σ π = 1.
std::vector<double> StationaryOnInducedSubgraph(const DiGraph& g, const NodeSet& y,
                                                bool weighted) {
  const DiGraph sub = InducedSubgraph(g, y);
  const Eigen::Index m = static_cast<Eigen::Index>(sub.node_count());
  std::vector<Eigen::Triplet<double>> triplets;
  // Row i of the system is column i of (I - T); the last row is all ones.
  for (NodeIndex u = 0; u < m; ++u) {
    const double norm = weighted ? sub.weighted_out(u)
                                 : static_cast<double>(sub.out_degree(u));
    if (norm <= 0.0) {
      throw ContractViolation("backward set member without an internal out-edge");
    }
    if (u + 1 < m) triplets.emplace_back(u, u, 1.0);
    for (const Neighbor& nb : sub.out_neighbors(u)) {
      if (static_cast<Eigen::Index>(nb.node) + 1 == m) continue;
      const double t = (weighted ? nb.weight : 1.0) / norm;
      triplets.emplace_back(nb.node, u, -t);
    }
    triplets.emplace_back(m - 1, u, 1.0);
  }
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("stationary distribution: singular system");
  }
  const Eigen::VectorXd pi = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !pi.allFinite()) {
    throw NumericalError("stationary distribution: solve failed");
  }
  return {pi.data(), pi.data() + m};
}

std::string UniqueLabel(std::string label, std::unordered_set<std::string>& used) {
  while (!used.insert(label).second) label += '\'';
  return label;
}

}  // namespace

std::vector<Neighbor> CollapseForward(const DiGraph& g, const NodeSet& x) {
  const auto in_x = Membership(g.node_count(), x);
  std::map<NodeIndex, double> weights;
  for (NodeIndex v : x) {
    for (const Neighbor& nb : g.out_neighbors(v)) {
      if (!in_x[nb.node]) {
        throw ContractViolation(fmt::format(
            "forward collapse: edge {} -> {} leaves the set", g.label(v), g.label(nb.node)));
      }
    }
    for (const Neighbor& nb : g.in_neighbors(v)) {
      if (!in_x[nb.node]) weights[nb.node] += nb.weight;
    }
  }
  std::vector<Neighbor> out;
  out.reserve(weights.size());
  for (const auto& [w, weight] : weights) out.push_back({w, weight});
  return out;
}

std::vector<double> SiteProbabilities(const DiGraph& g, const NodeSet& y,
                                      const CollapseOptions& options) {
  if (y.empty()) throw ContractViolation("site probabilities of an empty set");
  if (y.size() == 1) return {1.0};
  switch (options.site_probability) {
    case SiteProbability::kUniform:
      return std::vector<double>(y.size(), 1.0 / static_cast<double>(y.size()));
    case SiteProbability::kStationary:
      return StationaryOnInducedSubgraph(g, y, options.weighted_site_prob);
    case SiteProbability::kInDegree:
      break;
  }
  std::vector<double> p;
  p.reserve(y.size());
  double total = 0.0;
  for (NodeIndex u : y) {
    const double d = options.weighted_site_prob ? g.weighted_in(u)
                                                : static_cast<double>(g.in_degree(u));
    p.push_back(d);
    total += d;
  }
  if (total <= 0.0) throw ContractViolation("backward set without internal in-edges");
  for (double& value : p) value /= total;
  return p;
}

std::vector<Neighbor> CollapseBackward(const DiGraph& g, const NodeSet& y,
                                       const CollapseOptions& options) {
  const auto in_y = Membership(g.node_count(), y);
  for (NodeIndex u : y) {
    for (const Neighbor& nb : g.in_neighbors(u)) {
      if (!in_y[nb.node]) {
        throw ContractViolation(fmt::format(
            "backward collapse: edge {} -> {} enters the set", g.label(nb.node), g.label(u)));
      }
    }
    if (g.out_degree(u) == 0) {
      throw ContractViolation("backward collapse: member " + g.label(u) +
                              " has no out-edge");
    }
  }
  const std::vector<double> p = SiteProbabilities(g, y, options);
  std::map<NodeIndex, double> weights;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const NodeIndex u = y[i];
    const double norm = options.weighted_site_prob ? g.weighted_out(u)
                                                   : static_cast<double>(g.out_degree(u));
    for (const Neighbor& nb : g.out_neighbors(u)) {
      if (in_y[nb.node]) continue;
      const double transition = (options.weighted_site_prob ? nb.weight : 1.0) / norm;
      weights[nb.node] += p[i] * transition;
    }
  }
  std::vector<Neighbor> out;
  out.reserve(weights.size());
  for (const auto& [v, weight] : weights) {
    if (weight > 0.0) out.push_back({v, weight});
  }
  return out;
}

std::string_view NodeKindName(NodeKind kind) {
  switch (kind) {
    case NodeKind::kCore: return "core";
    case NodeKind::kForward: return "forward";
    case NodeKind::kBackward: return "backward";
    case NodeKind::kUntouched: return "untouched";
  }
  return "unknown";
}

double CompressionFactor(std::size_t n, std::size_t reduced) {
  if (n == 0) return 0.0;
  return 1.0 - static_cast<double>(reduced) / static_cast<double>(n);
}

Step1Result CompressStep1(const DiGraph& g, const ErgodicPartition& p,
                          const CollapseOptions& options) {
  const std::size_t n = g.node_count();
  constexpr NodeIndex kUnassigned = ~NodeIndex{0};

  // Collapsed sets in partition order, tagged with their kind.
  struct Collapsed {
    const NodeSet* nodes;
    NodeKind kind;
  };
  std::vector<Collapsed> collapsed;
  std::vector<std::size_t> set_of(n, static_cast<std::size_t>(-1));
  std::vector<NodeKind> original_kind(n, NodeKind::kCore);
  auto claim = [&](const NodeSet& s, NodeKind kind) {
    for (NodeIndex v : s) {
      set_of[v] = collapsed.size();
      original_kind[v] = kind;
    }
    collapsed.push_back({&s, kind});
  };
  for (std::size_t i = 0; i < p.forward_sets.size(); ++i) {
    if (p.forward_both[i]) {
      for (NodeIndex v : p.forward_sets[i]) original_kind[v] = NodeKind::kUntouched;
    } else {
      claim(p.forward_sets[i], NodeKind::kForward);
    }
  }
  for (std::size_t i = 0; i < p.backward_sets.size(); ++i) {
    if (!p.backward_both[i]) claim(p.backward_sets[i], NodeKind::kBackward);
  }

  // Compressed indices follow the original index order; a meta-node takes the
  // position of its smallest member.
  std::vector<NodeIndex> map(n, kUnassigned);
  std::vector<NodeIndex> meta_index(collapsed.size(), kUnassigned);
  CompressedGraph cg;
  std::vector<std::string> labels;
  std::unordered_set<std::string> used;
  for (NodeIndex v = 0; v < n; ++v) {
    if (original_kind[v] == NodeKind::kCore || original_kind[v] == NodeKind::kUntouched) {
      used.insert(g.label(v));
    }
  }
  for (NodeIndex v = 0; v < n; ++v) {
    const NodeIndex next = static_cast<NodeIndex>(labels.size());
    if (original_kind[v] == NodeKind::kCore || original_kind[v] == NodeKind::kUntouched) {
      map[v] = next;
      labels.push_back(g.label(v));
      cg.members.push_back(NodeSet{v});
      cg.kind.push_back(original_kind[v]);
      continue;
    }
    const std::size_t s = set_of[v];
    if (meta_index[s] == kUnassigned) {
      const NodeSet& nodes = *collapsed[s].nodes;
      std::string smallest = g.label(nodes.front());
      for (NodeIndex u : nodes) smallest = std::min(smallest, g.label(u));
      const bool forward = collapsed[s].kind == NodeKind::kForward;
      meta_index[s] = next;
      labels.push_back(UniqueLabel((forward ? "FW:" : "BW:") + smallest, used));
      cg.members.push_back(nodes);
      cg.kind.push_back(collapsed[s].kind);
    }
    map[v] = meta_index[s];
  }

  std::vector<Edge> edges;
  for (NodeIndex u = 0; u < n; ++u) {
    const NodeKind k = original_kind[u];
    if (k != NodeKind::kCore && k != NodeKind::kUntouched) continue;
    for (const Neighbor& nb : g.out_neighbors(u)) {
      // Edges into forward sets come from the forward collapse below.
      if (original_kind[nb.node] == NodeKind::kForward) continue;
      edges.push_back({map[u], map[nb.node], nb.weight});
    }
  }
  for (std::size_t s = 0; s < collapsed.size(); ++s) {
    const NodeSet& nodes = *collapsed[s].nodes;
    if (collapsed[s].kind == NodeKind::kForward) {
      cg.sinks.push_back(meta_index[s]);
      for (const Neighbor& nb : CollapseForward(g, nodes)) {
        if (original_kind[nb.node] == NodeKind::kCore) {
          edges.push_back({map[nb.node], meta_index[s], nb.weight});
        }
      }
    } else {
      cg.sources.push_back(meta_index[s]);
      for (const Neighbor& nb : CollapseBackward(g, nodes, options)) {
        edges.push_back({meta_index[s], map[nb.node], nb.weight});
      }
    }
  }
  cg.graph = DiGraph::FromEdges(std::move(labels), std::move(edges));

  Step1Result result;
  result.report.n = n;
  result.report.n1 = cg.graph.node_count();
  result.report.c1 = CompressionFactor(n, result.report.n1);
  result.compressed = std::move(cg);
  return result;
}

nlohmann::json MetaMapToJson(const CompressedGraph& cg, const DiGraph& original) {
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeIndex v = 0; v < cg.graph.node_count(); ++v) {
    nlohmann::json members = nlohmann::json::array();
    for (NodeIndex u : cg.members[v]) members.push_back(original.label(u));
    nodes.push_back({{"label", cg.graph.label(v)},
                     {"kind", NodeKindName(cg.kind[v])},
                     {"members", std::move(members)}});
  }
  return {{"nodes", std::move(nodes)}};
}

CompressedGraph CompressedFromMetaMap(DiGraph graph, const nlohmann::json& meta_map,
                                      const DiGraph& original) {
  if (!meta_map.contains("nodes") || !meta_map["nodes"].is_array()) {
    throw DomainError("meta map: missing 'nodes' array");
  }
  const auto& nodes = meta_map["nodes"];
  if (nodes.size() != graph.node_count()) {
    throw DomainError(fmt::format("meta map lists {} nodes, compressed graph has {}",
                                  nodes.size(), graph.node_count()));
  }
  CompressedGraph cg;
  std::vector<bool> seen(original.node_count(), false);
  for (NodeIndex v = 0; v < graph.node_count(); ++v) {
    const auto& entry = nodes[v];
    const std::string label = entry.at("label").get<std::string>();
    if (label != graph.label(v)) {
      throw DomainError("meta map entry " + std::to_string(v) + " is '" + label +
                        "', compressed graph has '" + graph.label(v) + "'");
    }
    const std::string kind = entry.at("kind").get<std::string>();
    NodeKind k;
    if (kind == "core") k = NodeKind::kCore;
    else if (kind == "forward") k = NodeKind::kForward;
    else if (kind == "backward") k = NodeKind::kBackward;
    else if (kind == "untouched") k = NodeKind::kUntouched;
    else throw DomainError("meta map: unknown kind '" + kind + "'");
    std::vector<NodeIndex> members;
    for (const auto& m : entry.at("members")) {
      const auto idx = original.find(m.get<std::string>());
      if (!idx) throw DomainError("meta map: unknown original node '" + m.get<std::string>() + "'");
      if (seen[*idx]) throw DomainError("meta map: node '" + m.get<std::string>() + "' listed twice");
      seen[*idx] = true;
      members.push_back(*idx);
    }
    if (members.empty()) throw DomainError("meta map: node '" + label + "' has no members");
    cg.members.emplace_back(std::move(members));
    cg.kind.push_back(k);
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw DomainError("meta map does not cover every original node");
  }
  std::vector<NodeIndex> order(graph.node_count());
  for (NodeIndex v = 0; v < graph.node_count(); ++v) order[v] = v;
  std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
    return cg.members[a].front() < cg.members[b].front();
  });
  for (NodeIndex v : order) {
    if (cg.kind[v] == NodeKind::kBackward) cg.sources.push_back(v);
    if (cg.kind[v] == NodeKind::kForward) cg.sinks.push_back(v);
  }
  cg.graph = std::move(graph);
  return cg;
}

nlohmann::json ReportToJson(const CompressionReport& report) {
  return {{"N", report.n}, {"N1", report.n1}, {"C1", report.c1}};
}

}  // namespace ergoset
