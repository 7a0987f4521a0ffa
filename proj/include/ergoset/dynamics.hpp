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

#ifndef ERGOSET_DYNAMICS_HPP_
#define ERGOSET_DYNAMICS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ergoset/core_mixing.hpp"
#include "ergoset/ergodic.hpp"
#include "ergoset/esca.hpp"
#include "ergoset/graph.hpp"

// Discrete-time random-walk evolution by repeated sparse matrix application.
// Independent of the linear-solve route in core_mixing; the test suite and
// the `verify` command use it as the reference.
namespace ergoset::dynamics {

// Starting distribution λ over the nodes.
class InitialDistribution {
 public:
  // Entries must be >= 0 and sum to 1 within 1e-12 (DomainError otherwise).
  explicit InitialDistribution(std::vector<double> mass);

  static InitialDistribution Delta(std::size_t n, NodeIndex v);
  static InitialDistribution Uniform(std::size_t n, const NodeSet& support);

  const std::vector<double>& mass() const { return mass_; }
  NodeSet support() const;

 private:
  std::vector<double> mass_;
};

// Mass still walking plus mass already absorbed, per node.
struct WalkState {
  std::vector<double> distribution;
  std::vector<double> absorbed;
  std::size_t steps = 0;

  double residual() const;        // Σ distribution
  double total_absorbed() const;  // Σ absorbed
};

// Mass placed on absorbing nodes is absorbed immediately.
WalkState Start(const TransitionMatrix& p, const InitialDistribution& start);

// One step: mass on non-absorbing nodes moves along P; whatever lands on an
// absorbing node goes to the accumulator.
void Advance(WalkState& state, const TransitionMatrix& p);
WalkState Step(WalkState state, const TransitionMatrix& p);

struct AbsorbOptions {
  double eps = 1e-12;
  std::size_t max_steps = 1'000'000;
};

// Iterates until the residual transient mass drops below eps and returns the
// absorbed mass per node. Throws ConvergenceError when max_steps is reached
// first (mass trapped in a closed class that is not absorbing).
std::vector<double> Absorb(const TransitionMatrix& p, const InitialDistribution& start,
                           const AbsorbOptions& options = {});

// Row i = Absorb(δ_{sources[i]}) restricted to cg.sinks. Rows run on up to
// `jobs` threads; the result does not depend on `jobs`.
Eigen::MatrixXd OracleMixingMatrix(const CompressedGraph& cg,
                                   const AbsorbOptions& options = {},
                                   unsigned jobs = 1);

// For every core node w (rows, in index order) and forward set X (columns,
// partition order, both-flagged sets skipped): the mass from δ_w that ever
// enters X in the original graph.
struct ForwardEntry {
  std::vector<NodeIndex> core;
  std::vector<std::size_t> forward_sets;
  Eigen::MatrixXd mass;
};

ForwardEntry OracleForwardEntry(const DiGraph& g, const ErgodicPartition& p,
                                const AbsorbOptions& options = {}, unsigned jobs = 1);

struct VerificationReport {
  double tolerance = 1e-10;
  double max_b_deviation = 0.0;
  double max_row_sum_deviation = 0.0;
  double max_forward_collapse_deviation = 0.0;
  std::vector<std::string> discrepancies;

  bool passed() const { return discrepancies.empty(); }
};

// Cross-checks a compressed graph against the original:
//  - solver B vs oracle B on the compressed graph,
//  - row sums of B,
//  - mass entering each forward set in g vs absorption at its meta-node in cg,
//  - edge weights of cg vs a fresh Step 1 of g (when `expected` is given).
// Each failure is listed with its location. Oracle non-convergence is
// reported as a discrepancy, not thrown.
VerificationReport Verify(const DiGraph& g, const ErgodicPartition& p,
                          const CompressedGraph& cg, const CompressedGraph* expected,
                          const AbsorbOptions& options = {}, unsigned jobs = 1,
                          double tolerance = 1e-10);

nlohmann::json VerificationToJson(const VerificationReport& report);

}  // namespace ergoset::dynamics

#endif  // ERGOSET_DYNAMICS_HPP_
