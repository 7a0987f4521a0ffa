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

#include "ergoset/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ergoset/errors.hpp"
#include "ergoset/parallel.hpp"

namespace ergoset::dynamics {

InitialDistribution::InitialDistribution(std::vector<double> mass)
    : mass_(std::move(mass)) {
  double total = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw DomainError("initial distribution has a negative or non-finite entry");
    }
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError(fmt::format("initial distribution sums to {:.17g}, not 1", total));
  }
}

InitialDistribution InitialDistribution::Delta(std::size_t n, NodeIndex v) {
  if (v >= n) throw DomainError("delta distribution outside the node range");
  std::vector<double> mass(n, 0.0);
  mass[v] = 1.0;
  return InitialDistribution(std::move(mass));
}

InitialDistribution InitialDistribution::Uniform(std::size_t n, const NodeSet& support) {
  if (support.empty()) throw DomainError("uniform distribution on an empty set");
  if (support.back() >= n) throw DomainError("uniform distribution outside the node range");
  std::vector<double> mass(n, 0.0);
  for (NodeIndex v : support) mass[v] = 1.0 / static_cast<double>(support.size());
  return InitialDistribution(std::move(mass));
}

NodeSet InitialDistribution::support() const {
  std::vector<NodeIndex> nodes;
  for (NodeIndex v = 0; v < mass_.size(); ++v) {
    if (mass_[v] > 0.0) nodes.push_back(v);
  }
  return NodeSet(std::move(nodes));
}

double WalkState::residual() const {
  return std::accumulate(distribution.begin(), distribution.end(), 0.0);
}

double WalkState::total_absorbed() const {
  return std::accumulate(absorbed.begin(), absorbed.end(), 0.0);
}

WalkState Start(const TransitionMatrix& p, const InitialDistribution& start) {
  if (start.mass().size() != p.size()) {
    throw DomainError("initial distribution size does not match the transition matrix");
  }
  WalkState state;
  state.distribution.assign(p.size(), 0.0);
  state.absorbed.assign(p.size(), 0.0);
  for (std::size_t v = 0; v < p.size(); ++v) {
    (p.absorbing[v] ? state.absorbed : state.distribution)[v] = start.mass()[v];
  }
  return state;
}

void Advance(WalkState& state, const TransitionMatrix& p) {
  std::vector<double> next(p.size(), 0.0);
  for (std::size_t u = 0; u < p.size(); ++u) {
    const double m = state.distribution[u];
    if (m == 0.0) continue;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
             p.p, static_cast<Eigen::Index>(u));
         it; ++it) {
      const auto v = static_cast<std::size_t>(it.col());
      (p.absorbing[v] ? state.absorbed : next)[v] += m * it.value();
    }
  }
  state.distribution = std::move(next);
  ++state.steps;
}

WalkState Step(WalkState state, const TransitionMatrix& p) {
  Advance(state, p);
  return state;
}

std::vector<double> Absorb(const TransitionMatrix& p, const InitialDistribution& start,
                           const AbsorbOptions& options) {
  WalkState state = Start(p, start);
  double residual = state.residual();
  while (residual >= options.eps) {
    if (state.steps >= options.max_steps) {
      throw ConvergenceError(
          fmt::format("walk not absorbed after {} steps (residual {:.3g}); "
                      "mass is trapped in a closed class without a sink",
                      state.steps, residual),
          residual);
    }
    Advance(state, p);
    residual = state.residual();
  }
  return state.absorbed;
}

Eigen::MatrixXd OracleMixingMatrix(const CompressedGraph& cg, const AbsorbOptions& options,
                                   unsigned jobs) {
  const TransitionMatrix p = MakeTransitionMatrix(cg);
  const std::size_t n = cg.graph.node_count();
  Eigen::MatrixXd b(cg.sources.size(), cg.sinks.size());
  ParallelFor(cg.sources.size(), jobs, [&](std::size_t i) {
    const auto absorbed = Absorb(p, InitialDistribution::Delta(n, cg.sources[i]), options);
    for (std::size_t j = 0; j < cg.sinks.size(); ++j) {
      b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = absorbed[cg.sinks[j]];
    }
  });
  return b;
}

ForwardEntry OracleForwardEntry(const DiGraph& g, const ErgodicPartition& p,
                                const AbsorbOptions& options, unsigned jobs) {
  ForwardEntry out;
  out.core.assign(p.transient_core.begin(), p.transient_core.end());
  std::vector<NodeIndex> absorbing;
  for (std::size_t i = 0; i < p.forward_sets.size(); ++i) {
    if (p.forward_both[i]) continue;
    out.forward_sets.push_back(i);
    absorbing.insert(absorbing.end(), p.forward_sets[i].begin(), p.forward_sets[i].end());
  }
  const TransitionMatrix t = WithAbsorbing(MakeTransitionMatrix(g), NodeSet(absorbing));
  out.mass = Eigen::MatrixXd::Zero(out.core.size(), out.forward_sets.size());
  ParallelFor(out.core.size(), jobs, [&](std::size_t i) {
    const auto absorbed =
        Absorb(t, InitialDistribution::Delta(g.node_count(), out.core[i]), options);
    for (std::size_t j = 0; j < out.forward_sets.size(); ++j) {
      double mass = 0.0;
      for (NodeIndex v : p.forward_sets[out.forward_sets[j]]) mass += absorbed[v];
      out.mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mass;
    }
  });
  return out;
}

namespace {

void CompareEdges(const CompressedGraph& expected, const CompressedGraph& actual,
                  double tolerance, VerificationReport& report) {
  const DiGraph& e = expected.graph;
  const DiGraph& a = actual.graph;
  for (const Edge& edge : e.edges()) {
    const std::string& s = e.label(edge.source);
    const std::string& t = e.label(edge.target);
    const auto as = a.find(s);
    const auto at = a.find(t);
    const auto w = (as && at) ? a.weight(*as, *at) : std::nullopt;
    if (!w) {
      report.discrepancies.push_back(fmt::format("edge {} -> {} missing", s, t));
    } else if (std::abs(*w - edge.weight) > tolerance * std::max(1.0, std::abs(edge.weight))) {
      report.discrepancies.push_back(fmt::format(
          "edge {} -> {}: weight {:.17g}, expected {:.17g}", s, t, *w, edge.weight));
    }
  }
  for (const Edge& edge : a.edges()) {
    const auto es = e.find(a.label(edge.source));
    const auto et = e.find(a.label(edge.target));
    if (!es || !et || !e.has_edge(*es, *et)) {
      report.discrepancies.push_back(fmt::format("unexpected edge {} -> {}",
                                                 a.label(edge.source), a.label(edge.target)));
    }
  }
}

}  // namespace

VerificationReport Verify(const DiGraph& g, const ErgodicPartition& p,
                          const CompressedGraph& cg, const CompressedGraph* expected,
                          const AbsorbOptions& options, unsigned jobs, double tolerance) {
  VerificationReport report;
  report.tolerance = tolerance;
  if (expected != nullptr) CompareEdges(*expected, cg, tolerance, report);

  try {
    const MixingMatrix m = ComputeMixingMatrix(cg);
    const Eigen::MatrixXd oracle = OracleMixingMatrix(cg, options, jobs);
    for (Eigen::Index i = 0; i < m.b.rows(); ++i) {
      const double row_dev = std::abs(m.b.row(i).sum() - 1.0);
      report.max_row_sum_deviation = std::max(report.max_row_sum_deviation, row_dev);
      if (row_dev > tolerance) {
        report.discrepancies.push_back(
            fmt::format("row sum of B at source {} is off by {:.3g}", m.source_labels[i], row_dev));
      }
      for (Eigen::Index j = 0; j < m.b.cols(); ++j) {
        const double dev = std::abs(m.b(i, j) - oracle(i, j));
        report.max_b_deviation = std::max(report.max_b_deviation, dev);
        if (dev > tolerance) {
          report.discrepancies.push_back(fmt::format(
              "B[{}, {}] = {:.17g}, oracle {:.17g}", m.source_labels[i], m.sink_labels[j],
              m.b(i, j), oracle(i, j)));
        }
      }
    }
  } catch (const std::exception& e) {
    report.discrepancies.push_back(std::string("mixing matrix: ") + e.what());
  }

  try {
    const ForwardEntry entry = OracleForwardEntry(g, p, options, jobs);
    const TransientAbsorption absorption = CompressedAbsorption(cg);
    std::vector<NodeIndex> compressed_of(g.node_count(), 0);
    for (NodeIndex v = 0; v < cg.graph.node_count(); ++v) {
      for (NodeIndex u : cg.members[v]) compressed_of[u] = v;
    }
    std::vector<Eigen::Index> row_of(cg.graph.node_count(), -1);
    for (std::size_t i = 0; i < absorption.transient.size(); ++i) {
      row_of[absorption.transient[i]] = static_cast<Eigen::Index>(i);
    }
    std::vector<Eigen::Index> col_of(cg.graph.node_count(), -1);
    for (std::size_t j = 0; j < cg.sinks.size(); ++j) {
      col_of[cg.sinks[j]] = static_cast<Eigen::Index>(j);
    }
    for (std::size_t i = 0; i < entry.core.size(); ++i) {
      const NodeIndex w = compressed_of[entry.core[i]];
      for (std::size_t j = 0; j < entry.forward_sets.size(); ++j) {
        const NodeIndex sink = compressed_of[p.forward_sets[entry.forward_sets[j]].front()];
        if (row_of[w] < 0 || col_of[sink] < 0) {
          report.discrepancies.push_back(fmt::format(
              "core node {} or forward set {} not represented in the compressed graph",
              g.label(entry.core[i]), cg.graph.label(sink)));
          continue;
        }
        const double dev = std::abs(absorption.u(row_of[w], col_of[sink]) -
                                    entry.mass(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j)));
        report.max_forward_collapse_deviation =
            std::max(report.max_forward_collapse_deviation, dev);
        if (dev > tolerance) {
          report.discrepancies.push_back(fmt::format(
              "absorption from core node {} into {} deviates by {:.3g}",
              g.label(entry.core[i]), cg.graph.label(sink), dev));
        }
      }
    }
  } catch (const std::exception& e) {
    report.discrepancies.push_back(std::string("forward-collapse check: ") + e.what());
  }
  return report;
}

nlohmann::json VerificationToJson(const VerificationReport& report) {
  return {{"passed", report.passed()},
          {"tolerance", report.tolerance},
          {"max_b_deviation", report.max_b_deviation},
          {"max_row_sum_deviation", report.max_row_sum_deviation},
          {"max_forward_collapse_deviation", report.max_forward_collapse_deviation},
          {"discrepancies", report.discrepancies}};
}

}  // namespace ergoset::dynamics
