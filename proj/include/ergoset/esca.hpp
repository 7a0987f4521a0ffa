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

#ifndef ERGOSET_ESCA_HPP_
#define ERGOSET_ESCA_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergoset/ergodic.hpp"
#include "ergoset/graph.hpp"

namespace ergoset {

// Time-independent site distribution p(y) over a backward ergodic set.
enum class SiteProbability {
  kInDegree,    // p(y) ∝ d_in(y)
  kUniform,     // p(y) = 1/|Y|
  kStationary,  // stationary distribution of the walk on g[Y] (no leakage)
};

struct CollapseOptions {
  SiteProbability site_probability = SiteProbability::kInDegree;
  // Use weighted in/out strengths and edge weights instead of edge counts.
  bool weighted_site_prob = false;
};

// Weights of the edges (w, v_X) that replace every edge entering the forward
// set x: one entry per outside node w with at least one edge into x, equal to
// the sum of the weights of those edges. Sorted by w.
// Throws ContractViolation if an edge leaves x.
std::vector<Neighbor> CollapseForward(const DiGraph& g, const NodeSet& x);

// Site distribution over the members of y (same order as y).
std::vector<double> SiteProbabilities(const DiGraph& g, const NodeSet& y,
                                      const CollapseOptions& options = {});

// Weights of the edges (n_Y, v) out of the collapsed backward set y:
//
//   ω(n_Y, v) = Σ_{u∈Y} p(u) · 1[(u, v) ∈ E] / d_out(u)
//
// with unweighted degrees measured in g, p(u) from SiteProbabilities. For the
// default in-degree model this is (1/Σ d_in) Σ (d_in(u)/d_out(u)) 1[(u,v)∈E].
// A singleton has p = 1. Sorted by v.
// Throws ContractViolation if an edge enters y or a member has no out-edge.
std::vector<Neighbor> CollapseBackward(const DiGraph& g, const NodeSet& y,
                                       const CollapseOptions& options = {});

enum class NodeKind {
  kCore,       // transient core node, copied verbatim
  kForward,    // collapsed forward ergodic set (sink)
  kBackward,   // collapsed backward ergodic set (source)
  kUntouched,  // member of a set that is both forward and backward
};

std::string_view NodeKindName(NodeKind kind);

struct CompressedGraph {
  DiGraph graph;
  // Original nodes behind each compressed node.
  std::vector<NodeSet> members;
  std::vector<NodeKind> kind;
  // Compressed indices of the backward / forward meta-nodes, in the order of
  // the partition's backward_sets / forward_sets (both-flagged sets skipped).
  std::vector<NodeIndex> sources;
  std::vector<NodeIndex> sinks;
};

struct CompressionReport {
  std::size_t n = 0;
  std::size_t n1 = 0;
  double c1 = 0.0;
};

struct Step1Result {
  CompressedGraph compressed;
  CompressionReport report;
};

// C1 = 1 - N1/N.
double CompressionFactor(std::size_t n, std::size_t reduced);

// Collapses every forward and backward ergodic set (except both-flagged ones)
// into a meta-node labelled "FW:<label>" / "BW:<label>", where <label> is the
// lexicographically smallest member label. Core edges are copied verbatim. A
// backward set's outflow is mapped through the forward collapse, so an edge
// from a source into a forward set lands on that set's meta-node.
Step1Result CompressStep1(const DiGraph& g, const ErgodicPartition& p,
                          const CollapseOptions& options = {});

// {"nodes": [{"label", "kind", "members": [labels]}]} in compressed index order.
nlohmann::json MetaMapToJson(const CompressedGraph& cg, const DiGraph& original);

// Rebuilds a CompressedGraph from a serialized graph and its meta map.
// Throws DomainError if they disagree with each other or with `original`.
CompressedGraph CompressedFromMetaMap(DiGraph graph, const nlohmann::json& meta_map,
                                      const DiGraph& original);

nlohmann::json ReportToJson(const CompressionReport& report);

}  // namespace ergoset

#endif  // ERGOSET_ESCA_HPP_
