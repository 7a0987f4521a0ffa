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

#ifndef ERGOSET_GRAPH_HPP_
#define ERGOSET_GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ergoset {

// Dense node index, contiguous in [0, node_count).
using NodeIndex = std::uint32_t;

// Sorted, duplicate-free set of node indices.
class NodeSet {
 public:
  using const_iterator = std::vector<NodeIndex>::const_iterator;

  NodeSet() = default;
  explicit NodeSet(std::vector<NodeIndex> nodes);
  NodeSet(std::initializer_list<NodeIndex> nodes)
      : NodeSet(std::vector<NodeIndex>(nodes)) {}

  // {0, 1, ..., n - 1}
  static NodeSet Range(std::size_t n);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  NodeIndex front() const { return nodes_.front(); }
  NodeIndex back() const { return nodes_.back(); }
  NodeIndex operator[](std::size_t i) const { return nodes_[i]; }
  const_iterator begin() const { return nodes_.begin(); }
  const_iterator end() const { return nodes_.end(); }
  std::span<const NodeIndex> indices() const { return nodes_; }

  bool contains(NodeIndex v) const;

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<NodeIndex> nodes_;
};

struct Edge {
  NodeIndex source;
  NodeIndex target;
  double weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  NodeIndex node;
  double weight;
};

// Immutable weighted digraph with string labels. Edges are unique per
// (source, target), strictly positive, and kept sorted by (source, target).
// Self-loops are allowed and count towards every degree.
class DiGraph {
 public:
  DiGraph() = default;

  // Duplicate (source, target) pairs are merged by summing weights. Throws
  // DomainError on an out-of-range endpoint, a duplicate label, or a weight
  // that is not strictly positive and finite.
  static DiGraph FromEdges(std::vector<std::string> labels,
                           std::vector<Edge> edges);

  // Convenience constructor for tests and generators: nodes labelled "0".."n-1".
  static DiGraph FromEdges(std::size_t node_count, std::vector<Edge> edges);

  std::size_t node_count() const { return labels_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::string& label(NodeIndex v) const { return labels_[v]; }
  std::span<const std::string> labels() const { return labels_; }
  std::optional<NodeIndex> find(std::string_view label) const;

  std::span<const Edge> edges() const { return edges_; }
  std::span<const Neighbor> out_neighbors(NodeIndex v) const;
  std::span<const Neighbor> in_neighbors(NodeIndex v) const;

  // Unweighted degrees: number of distinct neighbours.
  std::size_t out_degree(NodeIndex v) const { return out_neighbors(v).size(); }
  std::size_t in_degree(NodeIndex v) const { return in_neighbors(v).size(); }
  double weighted_out(NodeIndex v) const;
  double weighted_in(NodeIndex v) const;

  std::optional<double> weight(NodeIndex source, NodeIndex target) const;
  bool has_edge(NodeIndex source, NodeIndex target) const {
    return weight(source, target).has_value();
  }
  double total_weight() const;

  friend bool operator==(const DiGraph& a, const DiGraph& b) {
    return a.labels_ == b.labels_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_;
  std::vector<Neighbor> out_;
  std::vector<std::size_t> in_offsets_;
  std::vector<Neighbor> in_;
};

enum class Delimiter { kWhitespace, kComma };

struct EdgeListOptions {
  Delimiter delimiter = Delimiter::kWhitespace;
  double default_weight = 1.0;
};

// Edge-list text format:
//
//   # comment            ('#' starts a comment anywhere on a line)
//   src dst              (weight = default_weight)
//   src dst weight
//   NODES:               (switches to the node-list section: bare labels)
//   EDGES:               (switches back to edges)
//
// Nodes are indexed in order of first appearance. Throws ParseError carrying
// the offending line number, or line 0 for an input without nodes.
DiGraph ReadEdgeList(std::istream& in, const EdgeListOptions& options = {});
DiGraph ParseEdgeList(std::string_view text, const EdgeListOptions& options = {});

// Deterministic serialization: a full NODES: section in index order followed
// by an EDGES: section sorted by (source index, target index), weights with
// 17 significant digits. Re-reading reproduces the graph exactly.
void WriteEdgeList(std::ostream& out, const DiGraph& g);
std::string ToEdgeList(const DiGraph& g);

DiGraph Reverse(const DiGraph& g);

// Nodes of `s` (re-indexed in ascending order of their index in g) and every
// edge of g with both endpoints in s.
DiGraph InducedSubgraph(const DiGraph& g, const NodeSet& s);

// Components ordered by smallest member.
std::vector<NodeSet> WeaklyConnectedComponents(const DiGraph& g);

}  // namespace ergoset

#endif  // ERGOSET_GRAPH_HPP_
