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

#include "ergoset/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "ergoset/errors.hpp"
#include "ergoset/parallel.hpp"
#include "ergoset/statistics.hpp"

namespace ergoset::experiments {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.17g}", x);
}

double MeanOf(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double SampleStd(const std::vector<double>& x, double mean) {
  if (x.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

Rng MakeStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = SplitMix64(seed);
  for (std::uint64_t step : path) state = SplitMix64(state ^ SplitMix64(step + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(state), static_cast<std::uint32_t>(state >> 32)};
  return Rng(seq);
}

double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

DiGraph ErDigraph(std::size_t n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("edge probability outside [0, 1]");
  std::vector<Edge> edges;
  if (p > 0.0) {
    edges.reserve(static_cast<std::size_t>(p * static_cast<double>(n) * static_cast<double>(n)));
    for (NodeIndex u = 0; u < n; ++u) {
      for (NodeIndex v = 0; v < n; ++v) {
        if (u != v && UniformUnit(rng) < p) edges.push_back({u, v, 1.0});
      }
    }
  }
  return DiGraph::FromEdges(n, std::move(edges));
}

std::vector<double> LinearGrid(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  grid.back() = hi;
  return grid;
}

std::vector<ErSweepPoint> ErSweep(const ErSweepConfig& config) {
  if (config.replicates == 0) throw DomainError("sweep needs at least one replicate");
  for (std::size_t n : config.sizes) {
    if (n == 0) throw DomainError("sweep sizes must be >= 1");
  }
  for (double p : config.probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("sweep probability outside [0, 1]");
  }
  const std::size_t points = config.sizes.size() * config.probabilities.size();
  const std::size_t r = config.replicates;
  std::vector<double> frac_any(points * r);
  std::vector<double> frac_largest(points * r);
  ParallelFor(points * r, config.jobs, [&](std::size_t task) {
    const std::size_t point = task / r;
    const std::size_t n = config.sizes[point / config.probabilities.size()];
    const double p = config.probabilities[point % config.probabilities.size()];
    Rng rng = MakeStream(config.seed, {n, point % config.probabilities.size(), task % r});
    const DiGraph g = ErDigraph(n, p, rng);
    const ErgodicPartition part = Partition(g);
    std::size_t largest = 0;
    for (const NodeSet& s : part.forward_sets) largest = std::max(largest, s.size());
    for (const NodeSet& s : part.backward_sets) largest = std::max(largest, s.size());
    frac_any[task] = static_cast<double>(part.ergodic_node_count()) / static_cast<double>(n);
    frac_largest[task] = static_cast<double>(largest) / static_cast<double>(n);
  });

  std::vector<ErSweepPoint> out;
  out.reserve(points);
  for (std::size_t point = 0; point < points; ++point) {
    const std::vector<double> any(frac_any.begin() + point * r,
                                  frac_any.begin() + (point + 1) * r);
    const std::vector<double> largest(frac_largest.begin() + point * r,
                                      frac_largest.begin() + (point + 1) * r);
    ErSweepPoint pt;
    pt.n = config.sizes[point / config.probabilities.size()];
    pt.p = config.probabilities[point % config.probabilities.size()];
    pt.mean_frac_any = MeanOf(any);
    pt.std_frac_any = SampleStd(any, pt.mean_frac_any);
    pt.mean_frac_largest = MeanOf(largest);
    pt.std_frac_largest = SampleStd(largest, pt.mean_frac_largest);
    pt.replicates = r;
    out.push_back(pt);
  }
  return out;
}

void WriteSweepCsv(std::ostream& out, const std::vector<ErSweepPoint>& points) {
  out << "N,p,mean_frac_any,std_frac_any,mean_frac_largest,std_frac_largest,replicates\n";
  for (const ErSweepPoint& pt : points) {
    out << pt.n << ',' << FormatDouble(pt.p) << ',' << FormatDouble(pt.mean_frac_any) << ','
        << FormatDouble(pt.std_frac_any) << ',' << FormatDouble(pt.mean_frac_largest) << ','
        << FormatDouble(pt.std_frac_largest) << ',' << pt.replicates << '\n';
  }
}

std::uint64_t EdgeKey(NodeIndex source, NodeIndex target) {
  return (static_cast<std::uint64_t>(source) << 32) | target;
}

bool TryDirectedSwap(std::vector<Edge>& edges, std::size_t i, std::size_t j,
                     EdgeKeySet& present) {
  if (i == j) return false;
  Edge& first = edges[i];
  Edge& second = edges[j];
  const NodeIndex a = first.source, b = first.target;
  const NodeIndex c = second.source, d = second.target;
  if (a == d || c == b) return false;
  if (present.contains(EdgeKey(a, d)) || present.contains(EdgeKey(c, b))) return false;
  present.erase(EdgeKey(a, b));
  present.erase(EdgeKey(c, d));
  present.insert(EdgeKey(a, d));
  present.insert(EdgeKey(c, b));
  first.target = d;
  second.target = b;
  return true;
}

RewireResult RewireCore(const DiGraph& g, const ErgodicPartition& p,
                        std::size_t swaps_per_edge, Rng& rng) {
  std::vector<bool> in_core(g.node_count(), false);
  for (NodeIndex v : p.transient_core) {
    if (v >= g.node_count()) throw DomainError("partition does not match the graph");
    in_core[v] = true;
  }
  std::vector<Edge> core_edges;
  std::vector<Edge> kept;
  for (const Edge& e : g.edges()) {
    (in_core[e.source] && in_core[e.target] ? core_edges : kept).push_back(e);
  }

  RewireResult result;
  result.core_edges = core_edges.size();
  if (core_edges.size() < 2) {
    result.graph = g;
    result.notice = fmt::format("core has {} internal edge(s); unchanged", core_edges.size());
    return result;
  }

  EdgeKeySet present;
  for (const Edge& e : core_edges) present.insert(EdgeKey(e.source, e.target));
  const std::vector<Edge> before = core_edges;
  result.attempted = swaps_per_edge * core_edges.size();
  for (std::size_t attempt = 0; attempt < result.attempted; ++attempt) {
    const std::size_t i = UniformIndex(rng, core_edges.size());
    const std::size_t j = UniformIndex(rng, core_edges.size());
    if (TryDirectedSwap(core_edges, i, j, present)) ++result.accepted;
  }
  result.changed = core_edges != before;
  if (result.accepted == 0) result.notice = "no valid swap found; unchanged";

  kept.insert(kept.end(), core_edges.begin(), core_edges.end());
  result.graph = DiGraph::FromEdges(std::vector<std::string>(g.labels().begin(), g.labels().end()),
                                    std::move(kept));
  return result;
}

Eigen::MatrixXd SinkSimilarity(const Eigen::MatrixXd& b) {
  const Eigen::Index m = b.cols();
  Eigen::MatrixXd s(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      s(i, j) = b.col(i).dot(b.col(j));
      s(j, i) = s(i, j);
    }
  }
  return s;
}

Eigen::MatrixXd SimilarityLaplacian(const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd s = SinkSimilarity(b);
  Eigen::MatrixXd l = -s;
  l.diagonal() += s.rowwise().sum();
  return l;
}

SpectralSummary LaplacianSpectrum(const Eigen::MatrixXd& b, std::optional<double> zero_tol) {
  if (!b.allFinite()) throw NumericalError("mixing matrix has non-finite entries");
  SpectralSummary out;
  const Eigen::MatrixXd l = SimilarityLaplacian(b);
  if (l.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    out.eigenvalues = solver.eigenvalues();
  } else {
    out.eigenvalues = Eigen::VectorXd::Zero(0);
  }
  const double lambda_max = out.eigenvalues.size() > 0 ? out.eigenvalues.maxCoeff() : 0.0;
  out.zero_tol = zero_tol.value_or(1e-10 * std::max(1.0, lambda_max));
  for (double lambda : out.eigenvalues) {
    if (std::abs(lambda) < out.zero_tol) ++out.zero_count;
  }
  out.lambda_2 = out.eigenvalues.size() >= 2 ? out.eigenvalues(1)
                                             : std::numeric_limits<double>::quiet_NaN();
  return out;
}

BowTie BowTieDigraph(const BowTieParams& params, Rng& rng) {
  if (params.sources == 0 || params.sinks == 0 || params.max_set_size == 0) {
    throw DomainError("bow-tie needs at least one source, one sink and set size >= 1");
  }
  BowTie out;
  std::vector<Edge> edges;
  NodeIndex next = 0;
  auto add_set = [&](std::vector<NodeSet>& sets) {
    const std::size_t size = 1 + UniformIndex(rng, params.max_set_size);
    std::vector<NodeIndex> members(size);
    std::iota(members.begin(), members.end(), next);
    next += static_cast<NodeIndex>(size);
    if (size > 1) {
      for (std::size_t k = 0; k < size; ++k) {
        edges.push_back({members[k], members[(k + 1) % size], 1.0});
      }
      for (NodeIndex u : members) {
        for (NodeIndex v : members) {
          if (u != v && UniformUnit(rng) < 0.3) edges.push_back({u, v, 1.0});
        }
      }
    }
    sets.emplace_back(std::move(members));
  };
  for (std::size_t i = 0; i < params.sources; ++i) add_set(out.backward_sets);
  std::vector<NodeIndex> core(params.core);
  std::iota(core.begin(), core.end(), next);
  next += static_cast<NodeIndex>(params.core);
  for (std::size_t i = 0; i < params.sinks; ++i) add_set(out.forward_sets);

  auto random_member = [&](const std::vector<NodeSet>& sets) {
    const NodeSet& s = sets[UniformIndex(rng, sets.size())];
    return s[UniformIndex(rng, s.size())];
  };
  for (NodeIndex u : core) {
    edges.push_back({random_member(out.backward_sets), u, 1.0});
    edges.push_back({u, random_member(out.forward_sets), 1.0});
    for (NodeIndex v : core) {
      if (u != v && UniformUnit(rng) < params.core_density) edges.push_back({u, v, 1.0});
    }
  }
  // Extra source→core, core→sink and direct source→sink links.
  for (const NodeSet& y : out.backward_sets) {
    for (NodeIndex u : y) {
      for (NodeIndex v : core) {
        if (UniformUnit(rng) < params.extra_link_density) edges.push_back({u, v, 1.0});
      }
      for (const NodeSet& x : out.forward_sets) {
        for (NodeIndex v : x) {
          if (UniformUnit(rng) < params.extra_link_density / 4) edges.push_back({u, v, 1.0});
        }
      }
    }
  }
  for (NodeIndex u : core) {
    for (const NodeSet& x : out.forward_sets) {
      for (NodeIndex v : x) {
        if (UniformUnit(rng) < params.extra_link_density) edges.push_back({u, v, 1.0});
      }
    }
  }
  out.core = NodeSet(std::move(core));
  // Duplicates from the random extras merge by summation, which is harmless.
  out.graph = DiGraph::FromEdges(next, std::move(edges));
  return out;
}

GraphSpectrum AnalyzeGraph(const DiGraph& g, const std::string& graph_id,
                           std::optional<double> zero_tol) {
  const ErgodicPartition part = Partition(g);
  const Step1Result step1 = CompressStep1(g, part);
  const MixingMatrix mixing = ComputeMixingMatrix(step1.compressed);
  const SvdFactors factors = SvdCompress(mixing.b);
  GraphSpectrum out;
  out.graph_id = graph_id;
  out.spectrum = LaplacianSpectrum(mixing.b, zero_tol);
  out.c2 = MakeFullReport(g, part, step1.compressed, factors).c2;
  return out;
}

RewireExperimentResult RewireExperiment(const std::vector<NamedGraph>& graphs,
                                        const RewireExperimentConfig& config) {
  const std::size_t per_graph = config.samples + 1;
  std::vector<GraphSpectrum> rows(graphs.size() * per_graph);
  std::vector<std::string> notices(graphs.size() * per_graph);
  std::vector<ErgodicPartition> partitions(graphs.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) partitions[gi] = Partition(graphs[gi].graph);

  ParallelFor(rows.size(), config.jobs, [&](std::size_t task) {
    const std::size_t gi = task / per_graph;
    const std::size_t sample = task % per_graph;
    const NamedGraph& named = graphs[gi];
    if (sample == 0) {
      rows[task] = AnalyzeGraph(named.graph, named.id, config.zero_tol);
      return;
    }
    Rng rng = MakeStream(config.seed, {gi, sample});
    RewireResult rewired = RewireCore(named.graph, partitions[gi], config.swaps_per_edge, rng);
    if (!rewired.notice.empty()) {
      notices[task] = fmt::format("{} sample {}: {}", named.id, sample, rewired.notice);
    }
    rows[task] = AnalyzeGraph(rewired.graph, named.id, config.zero_tol);
    rows[task].rewired = true;
    rows[task].sample = sample;
  });

  RewireExperimentResult result;
  result.rows = std::move(rows);
  for (std::string& n : notices) {
    if (!n.empty()) result.notices.push_back(std::move(n));
  }

  std::vector<double> before;
  std::vector<double> after;
  std::vector<double> decrease;
  std::vector<double> c2;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const GraphSpectrum& original = result.rows[gi * per_graph];
    double mean_after = 0.0;
    for (std::size_t s = 1; s < per_graph; ++s) {
      mean_after += static_cast<double>(result.rows[gi * per_graph + s].spectrum.zero_count);
    }
    before.push_back(static_cast<double>(original.spectrum.zero_count));
    if (config.samples > 0) {
      mean_after /= static_cast<double>(config.samples);
      after.push_back(mean_after);
      decrease.push_back(before.back() - mean_after);
    }
    c2.push_back(original.c2);
  }

  nlohmann::json summary;
  summary["graphs"] = graphs.size();
  summary["samples_per_graph"] = config.samples;
  summary["zero_count_before"] = before;
  summary["zero_count_after"] = after;
  summary["c2"] = c2;
  try {
    summary["comparison"] = stats::ComparisonToJson(stats::CompareSamples(before, after));
  } catch (const StatisticsError& e) {
    summary["comparison"] = nullptr;
    summary["comparison_error"] = e.what();
  }
  try {
    summary["correlation_decrease_vs_c2"] = stats::Correlate(decrease, c2);
  } catch (const StatisticsError& e) {
    summary["correlation_decrease_vs_c2"] = nullptr;
    summary["correlation_error"] = e.what();
  }
  summary["notices"] = result.notices;
  result.statistics = std::move(summary);
  return result;
}

void WriteSpectraCsv(std::ostream& out, const std::vector<GraphSpectrum>& rows) {
  out << "graph_id,rewired,n_eigenvalues,zero_count,lambda_2\n";
  for (const GraphSpectrum& row : rows) {
    out << row.graph_id << ',' << (row.rewired ? 1 : 0) << ','
        << row.spectrum.eigenvalues.size() << ',' << row.spectrum.zero_count << ','
        << FormatDouble(row.spectrum.lambda_2) << '\n';
  }
}

}  // namespace ergoset::experiments
