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

#ifndef ERGOSET_CORE_MIXING_HPP_
#define ERGOSET_CORE_MIXING_HPP_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <json.hpp>

#include "ergoset/ergodic.hpp"
#include "ergoset/esca.hpp"
#include "ergoset/graph.hpp"

namespace ergoset {

// Row-stochastic random-walk matrix, P_uv = ω(u, v) / Σ_w ω(u, w). Rows of
// nodes without out-weight are empty and flagged absorbing.
struct TransitionMatrix {
  Eigen::SparseMatrix<double, Eigen::RowMajor> p;
  std::vector<bool> absorbing;

  std::size_t size() const { return absorbing.size(); }
};

TransitionMatrix MakeTransitionMatrix(const DiGraph& g);
inline TransitionMatrix MakeTransitionMatrix(const CompressedGraph& cg) {
  return MakeTransitionMatrix(cg.graph);
}

// Returns a copy of `p` in which every node of `s` is absorbing.
TransitionMatrix WithAbsorbing(const TransitionMatrix& p, const NodeSet& s);

// U = (I - Q)^{-1} R: probability that a walk started at transient[i] is
// absorbed at sinks[j]. Every transition out of a transient node must land in
// transient ∪ sinks (ContractViolation otherwise); a singular (I - Q) means a
// closed class hides among the transient nodes (NumericalError).
Eigen::MatrixXd AbsorptionProbabilities(const TransitionMatrix& p,
                                        std::span<const NodeIndex> transient,
                                        std::span<const NodeIndex> sinks);

// Core mixing matrix: B_ij = probability that a walk from source i ends in
// sink j. Rows follow cg.sources, columns cg.sinks.
struct MixingMatrix {
  Eigen::MatrixXd b;
  std::vector<NodeIndex> sources;
  std::vector<NodeIndex> sinks;
  std::vector<std::string> source_labels;
  std::vector<std::string> sink_labels;
};

MixingMatrix ComputeMixingMatrix(const CompressedGraph& cg);

// Absorption into cg.sinks from every source and core node of cg, with the
// transient node list (sources then core nodes, each in index order).
struct TransientAbsorption {
  std::vector<NodeIndex> transient;
  Eigen::MatrixXd u;
};

TransientAbsorption CompressedAbsorption(const CompressedGraph& cg);

// How many singular values to keep.
struct RankPolicy {
  enum class Kind {
    kNumerical,  // σ > max(rows, cols) · σ_max · machine epsilon
    kAbsolute,   // σ > threshold
    kRelative,   // σ > threshold · σ_max
    kFixed,      // exactly min(k, min(rows, cols)) values
  };
  Kind kind = Kind::kNumerical;
  double threshold = 0.0;
  std::size_t k = 0;

  static RankPolicy Numerical() { return {}; }
  static RankPolicy Absolute(double tau) { return {Kind::kAbsolute, tau, 0}; }
  static RankPolicy Relative(double ratio) { return {Kind::kRelative, ratio, 0}; }
  static RankPolicy Fixed(std::size_t k) { return {Kind::kFixed, 0.0, k}; }
};

// B ≈ M_bw · diag(C) · M_fw with M_bw (rows × k), M_fw (k × cols). The
// largest-magnitude entry of every column of M_bw is positive.
struct SvdFactors {
  Eigen::MatrixXd m_bw;
  Eigen::VectorXd c;
  Eigen::MatrixXd m_fw;
  std::size_t rank = 0;
  // Frobenius norm of B - M_bw diag(C) M_fw.
  double epsilon = 0.0;
  // Every singular value, descending (kept and discarded).
  Eigen::VectorXd singular_values;

  Eigen::MatrixXd Reconstruct() const;
};

SvdFactors SvdCompress(const Eigen::MatrixXd& b, const RankPolicy& policy = {});

struct FullReport {
  std::size_t n = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::size_t rank = 0;
  std::size_t n_bw = 0;
  std::size_t n_fw = 0;
  std::size_t n_core = 0;
  std::pair<std::size_t, std::size_t> m_bw_shape{0, 0};
  std::pair<std::size_t, std::size_t> c_shape{0, 0};
  std::pair<std::size_t, std::size_t> m_fw_shape{0, 0};
  double epsilon = 0.0;
  std::vector<std::string> warnings;
};

// N2 = N_bw + k + N_fw, C2 = 1 - N2/N. A negative C2 is reported as-is with
// a warning. Throws ContractViolation if the inputs come from different runs.
FullReport MakeFullReport(const DiGraph& g, const ErgodicPartition& p,
                          const CompressedGraph& cg, const SvdFactors& factors);

// {N, N1, C1, r, shapes: {M_bw, C, M_fw}, E, N2, C2, warnings}
nlohmann::json FullReportToJson(const FullReport& report);

// Header row "" + sink labels, then one row per source: label, entries.
void WriteMixingCsv(std::ostream& out, const MixingMatrix& m);
// Plain numeric CSV, 17 significant digits.
void WriteMatrixCsv(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace ergoset

#endif  // ERGOSET_CORE_MIXING_HPP_
