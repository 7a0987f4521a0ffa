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

#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "ergoset/core_mixing.hpp"
#include "ergoset/dynamics.hpp"
#include "ergoset/ergodic.hpp"
#include "ergoset/errors.hpp"
#include "ergoset/esca.hpp"
#include "ergoset/graph.hpp"
#include "support/oracles.hpp"

namespace ergoset::dynamics {
namespace {

double Sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST_CASE("initial distribution") {
  CHECK_NOTHROW(InitialDistribution({0.25, 0.75}));
  CHECK_THROWS_AS(InitialDistribution({0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(InitialDistribution({-0.5, 1.5}), DomainError);
  CHECK_THROWS_AS(InitialDistribution::Delta(2, 2), DomainError);
  CHECK_THROWS_AS(InitialDistribution::Uniform(3, NodeSet{}), DomainError);
  const auto u = InitialDistribution::Uniform(4, NodeSet{1, 3});
  CHECK(u.mass() == std::vector<double>{0.0, 0.5, 0.0, 0.5});
  CHECK(u.support() == NodeSet{1, 3});
}

TEST_CASE("step examples") {
  SUBCASE("chain") {
    const DiGraph g = ParseEdgeList("a b\nb c");
    const TransitionMatrix p = MakeTransitionMatrix(g);
    WalkState s = Start(p, InitialDistribution::Delta(3, 0));
    s = Step(s, p);
    CHECK(s.steps == 1);
    CHECK(s.distribution == std::vector<double>{0.0, 1.0, 0.0});
    s = Step(s, p);
    CHECK(s.steps == 2);
    CHECK(s.absorbed[2] == 1.0);
    CHECK(s.residual() == 0.0);
  }
  SUBCASE("2-cycle never absorbs") {
    const DiGraph g = ParseEdgeList("a b\nb a");
    const TransitionMatrix p = MakeTransitionMatrix(g);
    WalkState s = Start(p, InitialDistribution::Delta(2, 0));
    for (int t = 1; t <= 10; ++t) {
      Advance(s, p);
      CHECK(s.distribution[t % 2] == 1.0);
      CHECK(s.total_absorbed() == 0.0);
    }
  }
  SUBCASE("uniform start on a path") {
    const DiGraph g = ParseEdgeList("s u\nu t");
    const TransitionMatrix p = MakeTransitionMatrix(g);
    WalkState s = Start(p, InitialDistribution::Uniform(3, NodeSet{0, 1}));
    Advance(s, p);
    Advance(s, p);
    CHECK(s.absorbed[2] == 1.0);
  }
  SUBCASE("mass placed on a sink is absorbed at once") {
    const DiGraph g = ParseEdgeList("a b");
    const TransitionMatrix p = MakeTransitionMatrix(g);
    const WalkState s = Start(p, InitialDistribution::Delta(2, 1));
    CHECK(s.absorbed[1] == 1.0);
    CHECK(s.residual() == 0.0);
  }
}

TEST_CASE("mass is conserved at every step") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const DiGraph g = testing::RandomWeaklyConnected(3 + trial, 0.15, 0.6, rng);
    const TransitionMatrix p = MakeTransitionMatrix(g);
    WalkState s = Start(p, InitialDistribution::Uniform(g.node_count(), NodeSet::Range(g.node_count())));
    for (int t = 0; t < 50; ++t) {
      Advance(s, p);
      CHECK(std::abs(s.residual() + s.total_absorbed() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("absorb") {
  SUBCASE("chain") {
    const DiGraph g = ParseEdgeList("a b\nb c");
    const auto a = Absorb(MakeTransitionMatrix(g), InitialDistribution::Delta(3, 0));
    CHECK(a == std::vector<double>{0.0, 0.0, 1.0});
  }
  SUBCASE("diamond") {
    const DiGraph g = ParseEdgeList("s u\ns w\nu t1\nw t2");
    const auto a = Absorb(MakeTransitionMatrix(g), InitialDistribution::Delta(5, 0));
    CHECK(std::abs(a[*g.find("t1")] - 0.5) < 1e-12);
    CHECK(std::abs(a[*g.find("t2")] - 0.5) < 1e-12);
  }
  SUBCASE("core cycle converges geometrically") {
    const DiGraph g = ParseEdgeList("s u\nu v\nv u\nu t1\nv t2");
    const auto a = Absorb(MakeTransitionMatrix(g), InitialDistribution::Delta(5, 0));
    CHECK(std::abs(a[*g.find("t1")] - 2.0 / 3.0) < 1e-11);
    CHECK(std::abs(Sum(a) - 1.0) < 1e-11);
  }
  SUBCASE("closed class does not converge") {
    const DiGraph g = ParseEdgeList("a b\nb a");
    AbsorbOptions options;
    options.max_steps = 1000;
    CHECK_THROWS_AS(Absorb(MakeTransitionMatrix(g), InitialDistribution::Delta(2, 0), options),
                    ConvergenceError);
  }
}

TEST_CASE("oracle mixing matrix agrees with the linear solve") {
  std::mt19937_64 rng(37);
  int compared = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const DiGraph g = testing::RandomWeaklyConnected(2 + trial % 49, 0.1, 0.7, rng);
    const ErgodicPartition part = Partition(g);
    if (!part.both_indices().empty()) continue;
    const CompressedGraph cg = CompressStep1(g, part).compressed;
    const Eigen::MatrixXd solved = ComputeMixingMatrix(cg).b;
    const Eigen::MatrixXd oracle = OracleMixingMatrix(cg, {}, 1 + trial % 3);
    REQUIRE(solved.rows() == oracle.rows());
    REQUIRE(solved.cols() == oracle.cols());
    CHECK((solved - oracle).cwiseAbs().maxCoeff() < 1e-10);
    ++compared;
  }
  CHECK(compared > 50);
}

TEST_CASE("oracle results do not depend on the thread count") {
  std::mt19937_64 rng(41);
  const DiGraph g = testing::RandomWeaklyConnected(45, 0.06, 0.8, rng);
  const CompressedGraph cg = CompressStep1(g, Partition(g)).compressed;
  const Eigen::MatrixXd one = OracleMixingMatrix(cg, {}, 1);
  const Eigen::MatrixXd four = OracleMixingMatrix(cg, {}, 4);
  CHECK(one == four);
}

TEST_CASE("forward entry matches compressed absorption") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 80; ++trial) {
    const DiGraph g = testing::RandomWeaklyConnected(3 + trial % 40, 0.12, 0.7, rng);
    const ErgodicPartition part = Partition(g);
    if (!part.both_indices().empty()) continue;
    const CompressedGraph cg = CompressStep1(g, part).compressed;
    const ForwardEntry fe = OracleForwardEntry(g, part);
    const TransientAbsorption ta = CompressedAbsorption(cg);
    for (std::size_t i = 0; i < fe.core.size(); ++i) {
      // Locate the core node among the compressed transient rows.
      std::size_t row = ta.transient.size();
      for (std::size_t r = 0; r < ta.transient.size(); ++r) {
        if (cg.members[ta.transient[r]] == NodeSet{fe.core[i]}) row = r;
      }
      REQUIRE(row < ta.transient.size());
      for (Eigen::Index j = 0; j < fe.mass.cols(); ++j) {
        CHECK(std::abs(fe.mass(static_cast<Eigen::Index>(i), j) - ta.u(static_cast<Eigen::Index>(row), j)) < 1e-10);
      }
    }
  }
}

TEST_CASE("verify") {
  const DiGraph g = ParseEdgeList("s u\ns w\nu t1\nw t2\nt1 t1b\nt1b t1\nu w");
  const ErgodicPartition part = Partition(g);
  const CompressedGraph cg = CompressStep1(g, part).compressed;

  const VerificationReport ok = Verify(g, part, cg, &cg);
  CHECK(ok.passed());
  CHECK(ok.max_b_deviation < 1e-10);
  CHECK(ok.max_row_sum_deviation < 1e-10);
  CHECK(ok.max_forward_collapse_deviation < 1e-10);
  CHECK(VerificationToJson(ok)["discrepancies"].empty());

  // Change one edge weight of the compressed graph.
  std::vector<Edge> edges(cg.graph.edges().begin(), cg.graph.edges().end());
  edges.front().weight *= 3.0;
  CompressedGraph tampered = cg;
  tampered.graph = DiGraph::FromEdges({cg.graph.labels().begin(), cg.graph.labels().end()}, edges);
  const VerificationReport bad = Verify(g, part, tampered, &cg);
  CHECK_FALSE(bad.passed());
  CHECK(bad.discrepancies.size() >= 1);
}

}  // namespace
}  // namespace ergoset::dynamics
