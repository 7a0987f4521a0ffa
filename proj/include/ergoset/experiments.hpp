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

#ifndef ERGOSET_EXPERIMENTS_HPP_
#define ERGOSET_EXPERIMENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ergoset/core_mixing.hpp"
#include "ergoset/ergodic.hpp"
#include "ergoset/esca.hpp"
#include "ergoset/graph.hpp"

namespace ergoset::experiments {

using Rng = std::mt19937_64;

// Independent generator for stream `path` of a master seed. Streams are
// derived by SplitMix64 mixing, so results depend only on (seed, path) and
// never on scheduling.
Rng MakeStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

// Uniform double in [0, 1) from the top 53 bits of one draw.
double UniformUnit(Rng& rng);

// G(N, p) digraph: every ordered pair u != v independently with probability
// p, weight 1, no self-loops.
DiGraph ErDigraph(std::size_t n, double p, Rng& rng);

struct ErSweepConfig {
  std::vector<std::size_t> sizes;
  std::vector<double> probabilities;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

// `count` points spaced evenly over [lo, hi] (inclusive).
std::vector<double> LinearGrid(double lo, double hi, std::size_t count);

struct ErSweepPoint {
  std::size_t n = 0;
  double p = 0.0;
  double mean_frac_any = 0.0;
  double std_frac_any = 0.0;
  double mean_frac_largest = 0.0;
  double std_frac_largest = 0.0;
  std::size_t replicates = 0;
};

// Per replicate: fraction of nodes in any generalised ergodic set and in the
// largest one; then mean and sample std across replicates. Throws
// DomainError on N < 1, p outside [0, 1] or zero replicates.
std::vector<ErSweepPoint> ErSweep(const ErSweepConfig& config);

// Header: N,p,mean_frac_any,std_frac_any,mean_frac_largest,std_frac_largest,replicates
void WriteSweepCsv(std::ostream& out, const std::vector<ErSweepPoint>& points);

using EdgeKeySet = std::unordered_set<std::uint64_t>;
std::uint64_t EdgeKey(NodeIndex source, NodeIndex target);

// (a→b, c→d) → (a→d, c→b), weights staying with their source. Rejected (and
// edges left untouched) when i == j, when it would create a self-loop, or
// when a→d or c→b is already in `present`. Updates `present` on success.
bool TryDirectedSwap(std::vector<Edge>& edges, std::size_t i, std::size_t j,
                     EdgeKeySet& present);

struct RewireResult {
  DiGraph graph;
  std::size_t core_edges = 0;
  std::size_t attempted = 0;
  std::size_t accepted = 0;
  bool changed = false;
  std::string notice;
};

// Degree-preserving rewiring of the edges with both endpoints in the
// transient core: swaps_per_edge × (core edge count) swap attempts. Every
// other edge is kept bit-exactly. A core with fewer than 2 internal edges is
// returned unchanged with a notice.
RewireResult RewireCore(const DiGraph& g, const ErgodicPartition& p,
                        std::size_t swaps_per_edge, Rng& rng);

struct SpectralSummary {
  Eigen::VectorXd eigenvalues;  // ascending
  std::size_t zero_count = 0;
  double zero_tol = 0.0;
  double lambda_2 = 0.0;  // NaN when fewer than 2 eigenvalues
};

// 𝓑 = BᵀB (N_fw × N_fw, symmetric by construction), L = diag(𝓑 1) - 𝓑.
Eigen::MatrixXd SinkSimilarity(const Eigen::MatrixXd& b);
Eigen::MatrixXd SimilarityLaplacian(const Eigen::MatrixXd& b);

// Eigenvalues of L(BᵀB); zero_count counts |λ| < zero_tol, which defaults
// to 1e-10 · max(1, λ_max).
SpectralSummary LaplacianSpectrum(const Eigen::MatrixXd& b,
                                  std::optional<double> zero_tol = std::nullopt);

// Random source/core/sink digraph. Backward and forward sets are directed
// cycles (plus random chords); every core node gets an edge from a random
// source member and an edge to a random sink member, so the partition is
// known by construction and survives core rewiring.
struct BowTieParams {
  std::size_t sources = 3;
  std::size_t sinks = 3;
  std::size_t max_set_size = 3;
  std::size_t core = 12;
  double core_density = 0.2;
  double extra_link_density = 0.1;
};

struct BowTie {
  DiGraph graph;
  std::vector<NodeSet> backward_sets;
  std::vector<NodeSet> forward_sets;
  NodeSet core;
};

BowTie BowTieDigraph(const BowTieParams& params, Rng& rng);

struct GraphSpectrum {
  std::string graph_id;
  bool rewired = false;
  std::size_t sample = 0;
  SpectralSummary spectrum;
  double c2 = 0.0;
};

// partition → Step 1 → B → spectrum of L(BᵀB); c2 from the default rank rule.
GraphSpectrum AnalyzeGraph(const DiGraph& g, const std::string& graph_id,
                           std::optional<double> zero_tol = std::nullopt);

struct RewireExperimentConfig {
  std::size_t samples = 10;  // rewired copies per graph
  std::size_t swaps_per_edge = 10;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::optional<double> zero_tol;
};

struct RewireExperimentResult {
  std::vector<GraphSpectrum> rows;      // original then its rewired samples, per graph
  std::vector<std::string> notices;
  nlohmann::json statistics;            // comparison + correlation, or reasons why not
};

struct NamedGraph {
  std::string id;
  DiGraph graph;
};

// Zero eigenvalue counts before (one per graph) vs after (mean over samples),
// Welch/pooled t-tests, and the Pearson correlation between the decrease in
// zero count and C2.
RewireExperimentResult RewireExperiment(const std::vector<NamedGraph>& graphs,
                                        const RewireExperimentConfig& config);

// Header: graph_id,rewired,n_eigenvalues,zero_count,lambda_2
void WriteSpectraCsv(std::ostream& out, const std::vector<GraphSpectrum>& rows);

}  // namespace ergoset::experiments

#endif  // ERGOSET_EXPERIMENTS_HPP_
