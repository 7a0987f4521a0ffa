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

#include "ergoset/ergodic.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include "ergoset/errors.hpp"

namespace ergoset {

SccDecomposition StronglyConnectedComponents(const DiGraph& g) {
  const std::size_t n = g.node_count();
  constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> index(n, kUnvisited);
  std::vector<std::uint32_t> lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeIndex> stack;
  std::vector<std::vector<NodeIndex>> found;
  std::uint32_t counter = 0;

  // Explicit call stack: (node, position in its out-neighbour list).
  std::vector<std::pair<NodeIndex, std::size_t>> frames;
  for (NodeIndex root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    frames.emplace_back(root, 0);
    index[root] = lowlink[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      const auto out = g.out_neighbors(v);
      if (pos < out.size()) {
        const NodeIndex w = out[pos++].node;
        if (index[w] == kUnvisited) {
          index[w] = lowlink[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
        continue;
      }
      const NodeIndex done = v;
      frames.pop_back();
      if (!frames.empty()) {
        const NodeIndex parent = frames.back().first;
        lowlink[parent] = std::min(lowlink[parent], lowlink[done]);
      }
      if (lowlink[done] == index[done]) {
        std::vector<NodeIndex> members;
        NodeIndex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          members.push_back(w);
        } while (w != done);
        found.push_back(std::move(members));
      }
    }
  }

  SccDecomposition scc;
  scc.components.reserve(found.size());
  for (auto& members : found) scc.components.emplace_back(std::move(members));
  std::sort(scc.components.begin(), scc.components.end(),
            [](const NodeSet& a, const NodeSet& b) { return a.front() < b.front(); });
  scc.component_of.assign(n, 0);
  for (std::uint32_t c = 0; c < scc.components.size(); ++c) {
    for (NodeIndex v : scc.components[c]) scc.component_of[v] = c;
  }
  return scc;
}

namespace {

// Σ_{v∈X} d(v) − Σ_{v∈X} d_{X_I}(v), with membership taken from the
// component labelling.
std::size_t BoundaryEdges(const DiGraph& g, const SccDecomposition& scc,
                          std::uint32_t component, bool outgoing) {
  std::size_t total_degree = 0;
  std::size_t internal_degree = 0;
  for (NodeIndex v : scc.components[component]) {
    const auto nbrs = outgoing ? g.out_neighbors(v) : g.in_neighbors(v);
    total_degree += nbrs.size();
    for (const Neighbor& nb : nbrs) {
      if (scc.component_of[nb.node] == component) ++internal_degree;
    }
  }
  return total_degree - internal_degree;
}

std::uint32_t RequireComponent(const DiGraph& g, const SccDecomposition& scc,
                               const NodeSet& x) {
  if (x.empty()) throw ContractViolation("ergodic-set test on an empty node set");
  if (x.back() >= g.node_count()) {
    throw DomainError("node set refers to an index outside the graph");
  }
  const std::uint32_t c = scc.component_of[x.front()];
  if (!(scc.components[c] == x)) {
    throw ContractViolation("node set is not a strongly connected component");
  }
  return c;
}

}  // namespace

bool IsForwardErgodicSet(const DiGraph& g, const NodeSet& x) {
  const SccDecomposition scc = StronglyConnectedComponents(g);
  return BoundaryEdges(g, scc, RequireComponent(g, scc, x), /*outgoing=*/true) == 0;
}

bool IsBackwardErgodicSet(const DiGraph& g, const NodeSet& x) {
  const SccDecomposition scc = StronglyConnectedComponents(g);
  return BoundaryEdges(g, scc, RequireComponent(g, scc, x), /*outgoing=*/false) == 0;
}

std::vector<std::size_t> ErgodicPartition::both_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < forward_both.size(); ++i) {
    if (forward_both[i]) out.push_back(i);
  }
  return out;
}

std::size_t ErgodicPartition::ergodic_node_count() const {
  std::size_t count = 0;
  for (const NodeSet& s : forward_sets) count += s.size();
  for (std::size_t i = 0; i < backward_sets.size(); ++i) {
    if (!backward_both[i]) count += backward_sets[i].size();
  }
  return count;
}

ErgodicPartition Partition(const DiGraph& g) {
  return Partition(g, StronglyConnectedComponents(g));
}

ErgodicPartition Partition(const DiGraph& g, const SccDecomposition& scc) {
  ErgodicPartition p;
  std::vector<NodeIndex> core;
  for (std::uint32_t c = 0; c < scc.components.size(); ++c) {
    const bool forward = BoundaryEdges(g, scc, c, /*outgoing=*/true) == 0;
    const bool backward = BoundaryEdges(g, scc, c, /*outgoing=*/false) == 0;
    const NodeSet& members = scc.components[c];
    if (forward) {
      p.forward_sets.push_back(members);
      p.forward_both.push_back(backward);
    }
    if (backward) {
      p.backward_sets.push_back(members);
      p.backward_both.push_back(forward);
    }
    if (!forward && !backward) core.insert(core.end(), members.begin(), members.end());
  }
  p.transient_core = NodeSet(std::move(core));
  return p;
}

nlohmann::json PartitionToJson(const ErgodicPartition& p, const DiGraph& g) {
  auto labels = [&g](const NodeSet& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (NodeIndex v : s) arr.push_back(g.label(v));
    return arr;
  };
  nlohmann::json out;
  out["forward_sets"] = nlohmann::json::array();
  for (const NodeSet& s : p.forward_sets) out["forward_sets"].push_back(labels(s));
  out["backward_sets"] = nlohmann::json::array();
  for (const NodeSet& s : p.backward_sets) out["backward_sets"].push_back(labels(s));
  out["transient_core"] = labels(p.transient_core);
  out["both"] = p.both_indices();
  return out;
}

}  // namespace ergoset
