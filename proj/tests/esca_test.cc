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
#include <map>
#include <random>
#include <set>

#include <doctest.h>

#include "ergoset/ergodic.hpp"
#include "ergoset/errors.hpp"
#include "ergoset/esca.hpp"
#include "ergoset/graph.hpp"
#include "support/oracles.hpp"

namespace ergoset {
namespace {

NodeSet Labels(const DiGraph& g, std::initializer_list<const char*> labels) {
  std::vector<NodeIndex> out;
  for (const char* l : labels) out.push_back(*g.find(l));
  return NodeSet(out);
}

std::vector<std::string> LabelList(const DiGraph& g) {
  return {g.labels().begin(), g.labels().end()};
}

double WeightTo(const std::vector<Neighbor>& nbs, NodeIndex v) {
  for (const Neighbor& nb : nbs) {
    if (nb.node == v) return nb.weight;
  }
  return 0.0;
}

TEST_CASE("forward collapse sums weights into the set") {
  SUBCASE("unit edges into a 2-cycle") {
    const DiGraph g = ParseEdgeList("x1 x2\nx2 x1\nw x1\nw x2");
    const auto w = CollapseForward(g, Labels(g, {"x1", "x2"}));
    REQUIRE(w.size() == 1);
    CHECK(w[0].node == *g.find("w"));
    CHECK(w[0].weight == 2.0);
  }
  SUBCASE("weighted edges") {
    const DiGraph g = ParseEdgeList("x1 x2\nx2 x1\nw x1 0.3\nw x2 0.7");
    const auto w = CollapseForward(g, Labels(g, {"x1", "x2"}));
    REQUIRE(w.size() == 1);
    CHECK(w[0].weight == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("singleton sink") {
    const DiGraph g = ParseEdgeList("a b\nb c");
    const auto w = CollapseForward(g, Labels(g, {"c"}));
    REQUIRE(w.size() == 1);
    CHECK(w[0].node == *g.find("b"));
    CHECK(w[0].weight == 1.0);
  }
  SUBCASE("leaking set is rejected") {
    const DiGraph g = ParseEdgeList("x1 x2\nx2 x1\nx1 z");
    CHECK_THROWS_AS(CollapseForward(g, Labels(g, {"x1", "x2"})), ContractViolation);
  }
}

TEST_CASE("backward collapse") {
  SUBCASE("exit from the higher out-degree member") {
    const DiGraph g = ParseEdgeList("y1 y2\ny2 y1\ny1 v");
    const auto w = CollapseBackward(g, Labels(g, {"y1", "y2"}));
    REQUIRE(w.size() == 1);
    CHECK(w[0].node == *g.find("v"));
    CHECK(w[0].weight == 0.25);
  }
  SUBCASE("exit from the other member") {
    const DiGraph g = ParseEdgeList("y1 y2\ny2 y1\ny2 v");
    const auto w = CollapseBackward(g, Labels(g, {"y1", "y2"}));
    REQUIRE(w.size() == 1);
    CHECK(w[0].weight == 0.25);
  }
  SUBCASE("singleton source splits evenly") {
    const DiGraph g = ParseEdgeList("a b\na c");
    const auto w = CollapseBackward(g, Labels(g, {"a"}));
    REQUIRE(w.size() == 2);
    CHECK(WeightTo(w, *g.find("b")) == 0.5);
    CHECK(WeightTo(w, *g.find("c")) == 0.5);
  }
  SUBCASE("singleton ignores edge weights by default") {
    const DiGraph g = ParseEdgeList("a b 3\na c 1");
    const auto w = CollapseBackward(g, Labels(g, {"a"}));
    CHECK(WeightTo(w, *g.find("b")) == 0.5);
    CollapseOptions weighted;
    weighted.weighted_site_prob = true;
    const auto ww = CollapseBackward(g, Labels(g, {"a"}), weighted);
    CHECK(WeightTo(ww, *g.find("b")) == 0.75);
    CHECK(WeightTo(ww, *g.find("c")) == 0.25);
  }
  SUBCASE("entered set is rejected") {
    const DiGraph g = ParseEdgeList("y1 y2\ny2 y1\nz y1\ny1 v");
    CHECK_THROWS_AS(CollapseBackward(g, Labels(g, {"y1", "y2"})), ContractViolation);
  }
}

TEST_CASE("site probability models") {
  // y1 -> y2, y1 -> y3, y2 -> y1, y3 -> y1, y2 -> y3: in-degrees 2, 1, 2.
  const DiGraph g = ParseEdgeList("y1 y2\ny1 y3\ny2 y1\ny3 y1\ny2 y3\ny3 out");
  const NodeSet y = Labels(g, {"y1", "y2", "y3"});

  const auto indeg = SiteProbabilities(g, y);
  CHECK(indeg[0] == doctest::Approx(0.4));
  CHECK(indeg[1] == doctest::Approx(0.2));
  CHECK(indeg[2] == doctest::Approx(0.4));

  CollapseOptions uniform;
  uniform.site_probability = SiteProbability::kUniform;
  for (double p : SiteProbabilities(g, y, uniform)) CHECK(p == doctest::Approx(1.0 / 3.0));

  // Stationary distribution of the walk restricted to g[y]:
  // y1 -> {y2, y3} each 1/2, y2 -> {y1, y3} each 1/2, y3 -> y1.
  // π1 = π2/2 + π3, π2 = π1/2, π3 = π1/2 + π2/2 → π ∝ (4, 2, 3).
  CollapseOptions stationary;
  stationary.site_probability = SiteProbability::kStationary;
  const auto pi = SiteProbabilities(g, y, stationary);
  CHECK(pi[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(pi[2] == doctest::Approx(3.0 / 9.0).epsilon(1e-12));

  const NodeSet single = Labels(g, {"out"});
  CHECK(SiteProbabilities(g, single) == std::vector<double>{1.0});
}

TEST_CASE("backward collapse matches a direct evaluation of the weight formula") {
  std::mt19937_64 rng(41);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const DiGraph g = testing::RandomWeaklyConnected(2 + trial % 20, 0.25, 0.65, rng);
    const ErgodicPartition p = Partition(g);
    for (std::size_t i = 0; i < p.backward_sets.size(); ++i) {
      if (p.backward_both[i]) continue;
      const NodeSet& y = p.backward_sets[i];
      std::map<NodeIndex, double> direct;
      double din_total = 0.0;
      for (NodeIndex u : y) din_total += static_cast<double>(g.in_degree(u));
      double total = 0.0;
      for (NodeIndex u : y) {
        const double pu = y.size() == 1 ? 1.0 : g.in_degree(u) / din_total;
        std::size_t exits = 0;
        for (const Edge& e : g.edges()) {
          if (e.source != u || y.contains(e.target)) continue;
          direct[e.target] += pu / static_cast<double>(g.out_degree(u));
          ++exits;
        }
        total += pu * static_cast<double>(exits) / static_cast<double>(g.out_degree(u));
      }
      const auto w = CollapseBackward(g, y);
      CHECK(w.size() == direct.size());
      double sum = 0.0;
      for (const Neighbor& nb : w) {
        CHECK(nb.weight >= 0.0);
        CHECK(nb.weight == doctest::Approx(direct[nb.node]).epsilon(1e-14));
        sum += nb.weight;
      }
      CHECK(sum == doctest::Approx(total).epsilon(1e-13));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("step 1 examples") {
  SUBCASE("chain keeps its topology") {
    const DiGraph g = ParseEdgeList("a b\nb c");
    const auto r = CompressStep1(g, Partition(g));
    CHECK(r.report.n == 3);
    CHECK(r.report.n1 == 3);
    CHECK(r.report.c1 == 0.0);
    const DiGraph& cg = r.compressed.graph;
    CHECK(LabelList(cg) == std::vector<std::string>{"BW:a", "b", "FW:c"});
    CHECK(cg.edge_count() == 2);
    CHECK(cg.weight(0, 1) == 1.0);
    CHECK(cg.weight(1, 2) == 1.0);
    CHECK(r.compressed.sources == std::vector<NodeIndex>{0});
    CHECK(r.compressed.sinks == std::vector<NodeIndex>{2});
  }
  SUBCASE("source into a 2-cycle sink") {
    const DiGraph g = ParseEdgeList("a b\nb c\nc b");
    const auto r = CompressStep1(g, Partition(g));
    CHECK(r.report.n == 3);
    CHECK(r.report.n1 == 2);
    CHECK(r.report.c1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const DiGraph& cg = r.compressed.graph;
    CHECK(LabelList(cg) == std::vector<std::string>{"BW:a", "FW:b"});
    REQUIRE(cg.edge_count() == 1);
    CHECK(cg.weight(0, 1) == 1.0);
    CHECK(r.compressed.members[1] == Labels(g, {"b", "c"}));
    CHECK(r.compressed.kind[1] == NodeKind::kForward);
  }
  SUBCASE("both-flagged component left untouched") {
    const DiGraph g = ParseEdgeList("a b\nb a\nc d");
    const auto r = CompressStep1(g, Partition(g));
    CHECK(r.report.n1 == 4);
    CHECK(LabelList(r.compressed.graph) == std::vector<std::string>{"a", "b", "BW:c", "FW:d"});
    CHECK(r.compressed.kind[0] == NodeKind::kUntouched);
    CHECK(r.compressed.graph.edge_count() == 3);
  }
  SUBCASE("meta labels stay unique") {
    const DiGraph g = ParseEdgeList("a FW:c\nFW:c c");
    const auto r = CompressStep1(g, Partition(g));
    const auto& labels = r.compressed.graph.labels();
    CHECK(std::set<std::string>(labels.begin(), labels.end()).size() == labels.size());
  }
}

TEST_CASE("compression factor") {
  CHECK(CompressionFactor(162, 161) == doctest::Approx(0.00617).epsilon(5e-3));
  CHECK(CompressionFactor(162, 161) == 1.0 - 161.0 / 162.0);
  CHECK(CompressionFactor(5, 5) == 0.0);
}

TEST_CASE("step 1 invariants on random graphs") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    const DiGraph g = testing::RandomWeaklyConnected(1 + trial % 40, 0.12, 0.7, rng);
    const ErgodicPartition p = Partition(g);
    const auto r = CompressStep1(g, p);
    const CompressedGraph& cg = r.compressed;
    const DiGraph& h = cg.graph;

    std::size_t shrink = 0;
    bool all_singletons = true;
    for (std::size_t i = 0; i < p.forward_sets.size(); ++i) {
      if (p.forward_both[i]) continue;
      shrink += p.forward_sets[i].size() - 1;
      all_singletons &= p.forward_sets[i].size() == 1;
    }
    for (std::size_t i = 0; i < p.backward_sets.size(); ++i) {
      if (p.backward_both[i]) continue;
      shrink += p.backward_sets[i].size() - 1;
      all_singletons &= p.backward_sets[i].size() == 1;
    }
    CHECK(r.report.n == g.node_count());
    CHECK(r.report.n1 == g.node_count() - shrink);
    CHECK(r.report.c1 == 1.0 - static_cast<double>(r.report.n1) / g.node_count());
    CHECK(r.report.c1 >= 0.0);
    CHECK((r.report.c1 == 0.0) == all_singletons);

    // Sinks are exactly the forward meta-nodes, sources the backward ones,
    // when the graph is not a single strongly connected component.
    const bool both = !p.both_indices().empty();
    if (!both) {
      for (NodeIndex v = 0; v < h.node_count(); ++v) {
        CHECK((h.out_degree(v) == 0) == (cg.kind[v] == NodeKind::kForward));
        CHECK((h.in_degree(v) == 0) == (cg.kind[v] == NodeKind::kBackward));
      }
    }

    // Core nodes keep their mutual edges and their total weight into each
    // forward set.
    std::vector<NodeIndex> meta(g.node_count());
    for (NodeIndex m = 0; m < h.node_count(); ++m) {
      for (NodeIndex u : cg.members[m]) meta[u] = m;
    }
    for (NodeIndex u : p.transient_core) {
      std::map<NodeIndex, double> into;
      for (const Neighbor& nb : g.out_neighbors(u)) into[meta[nb.node]] += nb.weight;
      const NodeIndex mu = meta[u];
      CHECK(h.out_degree(mu) == into.size());
      for (const auto& [m, w] : into) CHECK(h.weight(mu, m) == doctest::Approx(w).epsilon(1e-14));
    }
  }
}

TEST_CASE("meta map round trip") {
  const DiGraph g = ParseEdgeList("s u\ns w\nu t1\nw t2\nt1 t1b\nt1b t1");
  const auto r = CompressStep1(g, Partition(g));
  const auto j = MetaMapToJson(r.compressed, g);
  CHECK(j["nodes"].size() == r.compressed.graph.node_count());
  const CompressedGraph back = CompressedFromMetaMap(r.compressed.graph, j, g);
  CHECK(back.graph == r.compressed.graph);
  CHECK(back.members == r.compressed.members);
  CHECK(back.kind == r.compressed.kind);
  CHECK(back.sources == r.compressed.sources);
  CHECK(back.sinks == r.compressed.sinks);

  nlohmann::json broken = j;
  broken["nodes"][0]["members"].push_back("t2");
  CHECK_THROWS_AS(CompressedFromMetaMap(r.compressed.graph, broken, g), DomainError);
  nlohmann::json missing = j;
  missing["nodes"].erase(missing["nodes"].size() - 1);
  CHECK_THROWS_AS(CompressedFromMetaMap(r.compressed.graph, missing, g), DomainError);

  const auto report = ReportToJson(r.report);
  CHECK(report["N"] == 6);
  CHECK(report["N1"] == 5);
}

}  // namespace
}  // namespace ergoset
