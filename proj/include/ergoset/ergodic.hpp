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

#ifndef ERGOSET_ERGODIC_HPP_
#define ERGOSET_ERGODIC_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "ergoset/graph.hpp"

namespace ergoset {

// Strongly connected components (communicating classes). Components are
// ordered by their smallest member; a node without a self-loop that lies on
// no cycle is its own singleton component.
struct SccDecomposition {
  std::vector<NodeSet> components;
  std::vector<std::uint32_t> component_of;
};

// Iterative Tarjan, O(V + E).
SccDecomposition StronglyConnectedComponents(const DiGraph& g);

// True iff no edge leaves `x`. `x` must be an SCC of g (ContractViolation
// otherwise). Uses unweighted degree counts: the sum over x of
// d_out^g(v) - d_out^{g[x]}(v) is the number of edges leaving x.
bool IsForwardErgodicSet(const DiGraph& g, const NodeSet& x);

// True iff no edge enters `x`. Same precondition as above.
bool IsBackwardErgodicSet(const DiGraph& g, const NodeSet& x);

// Sources, sinks and transient core of a digraph.
//
// A set that is both forward and backward (a weakly connected component that
// is itself strongly connected, e.g. an isolated node) is listed in both
// forward_sets and backward_sets, with the matching entry of forward_both /
// backward_both set. Such sets are left alone by compression.
//
// Sets are ordered by smallest member index, ascending.
struct ErgodicPartition {
  std::vector<NodeSet> forward_sets;
  std::vector<NodeSet> backward_sets;
  NodeSet transient_core;
  std::vector<bool> forward_both;
  std::vector<bool> backward_both;

  // Indices into forward_sets of the sets flagged both.
  std::vector<std::size_t> both_indices() const;

  // Nodes of forward ∪ backward sets, each counted once.
  std::size_t ergodic_node_count() const;
};

ErgodicPartition Partition(const DiGraph& g);

// Same, reusing an SCC decomposition of g.
ErgodicPartition Partition(const DiGraph& g, const SccDecomposition& scc);

// {"forward_sets": [[labels]], "backward_sets": [[labels]],
//  "transient_core": [labels], "both": [indices into forward_sets]}
nlohmann::json PartitionToJson(const ErgodicPartition& p, const DiGraph& g);

}  // namespace ergoset

#endif  // ERGOSET_ERGODIC_HPP_
