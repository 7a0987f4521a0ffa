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

#include "ergoset/core_mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "ergoset/errors.hpp"

namespace ergoset {

TransitionMatrix MakeTransitionMatrix(const DiGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  TransitionMatrix t;
  t.absorbing.assign(g.node_count(), false);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(g.edge_count());
  for (NodeIndex u = 0; u < g.node_count(); ++u) {
    const double out = g.weighted_out(u);
    if (out <= 0.0) {
      t.absorbing[u] = true;
      continue;
    }
    for (const Neighbor& nb : g.out_neighbors(u)) {
      triplets.emplace_back(u, nb.node, nb.weight / out);
    }
  }
  t.p.resize(n, n);
  t.p.setFromTriplets(triplets.begin(), triplets.end());
  t.p.makeCompressed();
  return t;
}

TransitionMatrix WithAbsorbing(const TransitionMatrix& p, const NodeSet& s) {
  TransitionMatrix out = p;
  for (NodeIndex v : s) {
    if (v >= out.size()) throw DomainError("absorbing node outside the matrix");
    out.absorbing[v] = true;
    out.p.row(v) *= 0.0;
  }
  out.p.prune(0.0);
  out.p.makeCompressed();
  return out;
}

Eigen::MatrixXd AbsorptionProbabilities(const TransitionMatrix& p,
                                        std::span<const NodeIndex> transient,
                                        std::span<const NodeIndex> sinks) {
  constexpr Eigen::Index kNone = -1;
  const auto t = static_cast<Eigen::Index>(transient.size());
  const auto s = static_cast<Eigen::Index>(sinks.size());
  std::vector<Eigen::Index> local(p.size(), kNone);
  std::vector<Eigen::Index> column(p.size(), kNone);
  for (Eigen::Index i = 0; i < t; ++i) {
    if (transient[i] >= p.size()) throw DomainError("transient node outside the matrix");
    local[transient[i]] = i;
  }
  for (Eigen::Index j = 0; j < s; ++j) {
    if (sinks[j] >= p.size()) throw DomainError("sink node outside the matrix");
    if (local[sinks[j]] != kNone) throw ContractViolation("node is both transient and sink");
    column[sinks[j]] = j;
  }
  if (t == 0 || s == 0) return Eigen::MatrixXd::Zero(t, s);

  std::vector<Eigen::Triplet<double>> a_entries;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(t, s);
  for (Eigen::Index i = 0; i < t; ++i) {
    const NodeIndex u = transient[i];
    if (p.absorbing[u]) {
      throw ContractViolation(fmt::format("transient node {} is absorbing", u));
    }
    a_entries.emplace_back(i, i, 1.0);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(p.p, u); it; ++it) {
      const auto v = static_cast<std::size_t>(it.col());
      if (local[v] != kNone) {
        a_entries.emplace_back(i, local[v], -it.value());
      } else if (column[v] != kNone) {
        r(i, column[v]) += it.value();
      } else {
        throw ContractViolation(fmt::format(
            "transition {} -> {} leaves the transient and sink nodes", u, v));
      }
    }
  }
  Eigen::SparseMatrix<double> a(t, t);
  a.setFromTriplets(a_entries.begin(), a_entries.end());
  a.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("I - Q is singular: a closed class was not detected (" +
                         lu.lastErrorMessage() + ")");
  }
  Eigen::MatrixXd u = lu.solve(r);
  if (lu.info() != Eigen::Success || !u.allFinite()) {
    throw NumericalError("absorption solve failed");
  }
  return u;
}

TransientAbsorption CompressedAbsorption(const CompressedGraph& cg) {
  TransientAbsorption out;
  out.transient = cg.sources;
  for (NodeIndex v = 0; v < cg.graph.node_count(); ++v) {
    if (cg.kind[v] == NodeKind::kCore) out.transient.push_back(v);
  }
  out.u = AbsorptionProbabilities(MakeTransitionMatrix(cg), out.transient, cg.sinks);
  return out;
}

MixingMatrix ComputeMixingMatrix(const CompressedGraph& cg) {
  const TransientAbsorption absorption = CompressedAbsorption(cg);
  MixingMatrix m;
  m.sources = cg.sources;
  m.sinks = cg.sinks;
  m.b = absorption.u.topRows(static_cast<Eigen::Index>(cg.sources.size()));
  for (NodeIndex v : m.sources) m.source_labels.push_back(cg.graph.label(v));
  for (NodeIndex v : m.sinks) m.sink_labels.push_back(cg.graph.label(v));
  return m;
}

Eigen::MatrixXd SvdFactors::Reconstruct() const {
  return m_bw * c.asDiagonal() * m_fw;
}

SvdFactors SvdCompress(const Eigen::MatrixXd& b, const RankPolicy& policy) {
  if (!b.allFinite()) throw NumericalError("SVD input has non-finite entries");
  const Eigen::Index rows = b.rows();
  const Eigen::Index cols = b.cols();
  SvdFactors f;
  if (rows == 0 || cols == 0) {
    f.m_bw = Eigen::MatrixXd::Zero(rows, 0);
    f.c = Eigen::VectorXd::Zero(0);
    f.m_fw = Eigen::MatrixXd::Zero(0, cols);
    f.singular_values = Eigen::VectorXd::Zero(0);
    return f;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD did not converge");
  f.singular_values = svd.singularValues();
  const Eigen::Index full = f.singular_values.size();
  const double sigma_max = full > 0 ? f.singular_values(0) : 0.0;

  Eigen::Index k = 0;
  if (policy.kind == RankPolicy::Kind::kFixed) {
    k = std::min<Eigen::Index>(static_cast<Eigen::Index>(policy.k), full);
  } else {
    double tau = 0.0;
    switch (policy.kind) {
      case RankPolicy::Kind::kNumerical:
        tau = static_cast<double>(std::max(rows, cols)) * sigma_max *
              std::numeric_limits<double>::epsilon();
        break;
      case RankPolicy::Kind::kAbsolute:
        tau = policy.threshold;
        break;
      case RankPolicy::Kind::kRelative:
        tau = policy.threshold * sigma_max;
        break;
      case RankPolicy::Kind::kFixed:
        break;
    }
    while (k < full && f.singular_values(k) > tau) ++k;
  }

  Eigen::MatrixXd u = svd.matrixU().leftCols(k);
  Eigen::MatrixXd v = svd.matrixV().leftCols(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index arg = 0;
    u.col(j).cwiseAbs().maxCoeff(&arg);
    if (u(arg, j) < 0.0) {
      u.col(j) *= -1.0;
      v.col(j) *= -1.0;
    }
  }
  f.m_bw = std::move(u);
  f.c = f.singular_values.head(k);
  f.m_fw = v.transpose();
  f.rank = static_cast<std::size_t>(k);
  f.epsilon = (b - f.Reconstruct()).norm();
  return f;
}

FullReport MakeFullReport(const DiGraph& g, const ErgodicPartition& p,
                          const CompressedGraph& cg, const SvdFactors& factors) {
  std::size_t covered = 0;
  for (const NodeSet& m : cg.members) covered += m.size();
  if (covered != g.node_count()) {
    throw ContractViolation("compressed graph does not cover the original graph");
  }
  std::size_t collapsible_bw = 0;
  for (bool both : p.backward_both) collapsible_bw += both ? 0 : 1;
  std::size_t collapsible_fw = 0;
  for (bool both : p.forward_both) collapsible_fw += both ? 0 : 1;
  if (collapsible_bw != cg.sources.size() || collapsible_fw != cg.sinks.size()) {
    throw ContractViolation("partition and compressed graph disagree on sources/sinks");
  }
  if (static_cast<std::size_t>(factors.m_bw.rows()) != cg.sources.size() ||
      static_cast<std::size_t>(factors.m_fw.cols()) != cg.sinks.size()) {
    throw ContractViolation("factor shapes do not match the compressed graph");
  }

  FullReport r;
  r.n = g.node_count();
  r.n1 = cg.graph.node_count();
  r.n_bw = cg.sources.size();
  r.n_fw = cg.sinks.size();
  r.n_core = static_cast<std::size_t>(
      std::count(cg.kind.begin(), cg.kind.end(), NodeKind::kCore));
  r.rank = factors.rank;
  r.n2 = r.n_bw + r.rank + r.n_fw;
  r.c1 = CompressionFactor(r.n, r.n1);
  r.c2 = CompressionFactor(r.n, r.n2);
  r.m_bw_shape = {r.n_bw, r.rank};
  r.c_shape = {r.rank, r.rank};
  r.m_fw_shape = {r.rank, r.n_fw};
  r.epsilon = factors.epsilon;
  if (r.n2 > r.n) {
    r.warnings.push_back(fmt::format(
        "degenerate: N2 = {} exceeds N = {}, C2 is negative", r.n2, r.n));
  }
  return r;
}

nlohmann::json FullReportToJson(const FullReport& report) {
  auto shape = [](const std::pair<std::size_t, std::size_t>& s) {
    return nlohmann::json::array({s.first, s.second});
  };
  return {{"N", report.n},
          {"N1", report.n1},
          {"C1", report.c1},
          {"r", report.rank},
          {"shapes",
           {{"M_bw", shape(report.m_bw_shape)},
            {"C", shape(report.c_shape)},
            {"M_fw", shape(report.m_fw_shape)}}},
          {"E", report.epsilon},
          {"N2", report.n2},
          {"C2", report.c2},
          {"N_bw", report.n_bw},
          {"N_fw", report.n_fw},
          {"N_core", report.n_core},
          {"warnings", report.warnings}};
}

void WriteMixingCsv(std::ostream& out, const MixingMatrix& m) {
  out << "source";
  for (const std::string& label : m.sink_labels) out << ',' << label;
  out << '\n';
  for (Eigen::Index i = 0; i < m.b.rows(); ++i) {
    out << m.source_labels[i];
    for (Eigen::Index j = 0; j < m.b.cols(); ++j) out << fmt::format(",{:.17g}", m.b(i, j));
    out << '\n';
  }
}

void WriteMatrixCsv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << fmt::format("{:.17g}", m(i, j));
    }
    out << '\n';
  }
}

}  // namespace ergoset
