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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "cli.hpp"

namespace ergoset::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Call(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"ergoset"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = Run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("ergoset-cli-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string File(const std::string& name, const std::string& contents) const {
    const fs::path p = path_ / name;
    std::ofstream(p, std::ios::binary) << contents;
    return p.string();
  }
  std::string Path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST_CASE("usage errors") {
  CHECK(Call({}).code == kUsage);
  CHECK(Call({"frobnicate"}).code == kUsage);
  CHECK(Call({"detect"}).code == kUsage);
  CHECK(Call({"detect", "/nonexistent/graph.edges"}).code == kUsage);
  CHECK(Call({"--help"}).code == kOk);
}

TEST_CASE("detect") {
  TempDir dir;
  SUBCASE("chain") {
    const Result r = Call({"detect", dir.File("chain.edges", "a b\nb c\n")});
    REQUIRE(r.code == kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["backward_sets"] == nlohmann::json::parse(R"([["a"]])"));
    CHECK(j["forward_sets"] == nlohmann::json::parse(R"([["c"]])"));
    CHECK(j["transient_core"] == nlohmann::json::parse(R"(["b"])"));
  }
  SUBCASE("strongly connected") {
    const Result r = Call({"detect", dir.File("cycle.edges", "a b\nb c\nc a\n")});
    REQUIRE(r.code == kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["both"] == nlohmann::json::parse("[0]"));
    CHECK(j["transient_core"].empty());
  }
  SUBCASE("empty file") {
    const Result r = Call({"detect", dir.File("empty.edges", "")});
    CHECK(r.code == kParse);
  }
  SUBCASE("bad line reports its number") {
    const Result r = Call({"detect", dir.File("bad.edges", "a b\nb c x\n")});
    CHECK(r.code == kParse);
    CHECK(r.err.find("2") != std::string::npos);
  }
  SUBCASE("comma delimiter and --out") {
    const Result r = Call({"detect", dir.File("c.csv", "a,b\nb,c\n"), "--delimiter", "comma",
                           "--out", dir.Path("det")});
    REQUIRE(r.code == kOk);
    CHECK(Slurp(dir.Path("det/partition.json")) == r.out);
  }
}

TEST_CASE("compress") {
  TempDir dir;
  SUBCASE("step 1 on a chain") {
    const Result r = Call({"compress", dir.File("chain.edges", "a b\nb c\n"), "--step", "1",
                           "--out", dir.Path("s1")});
    REQUIRE(r.code == kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["C1"] == 0.0);
    CHECK(j["N1"] == 3);
    for (const char* f : {"partition.json", "compressed.edges", "meta_map.json", "report.json"}) {
      CHECK(fs::exists(dir.Path(std::string("s1/") + f)));
    }
    CHECK_FALSE(fs::exists(dir.Path("s1/B.csv")));
  }
  SUBCASE("step 1 with a 2-cycle sink") {
    const Result r = Call({"compress", dir.File("g.edges", "a b\nb c\nc b\n"), "--step", "1",
                           "--out", dir.Path("s1")});
    REQUIRE(r.code == kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["N1"] == 2);
    CHECK(j["C1"].get<double>() == doctest::Approx(1.0 / 3.0));
    CHECK(Slurp(dir.Path("s1/compressed.edges")) == "NODES:\nBW:a\nFW:b\nEDGES:\nBW:a FW:b 1\n");
  }
  SUBCASE("step 2") {
    const std::string in = dir.File("d.edges", "s u\ns w\nu t1\nw t2\nt1 t1b\nt1b t1\nv u\nv w\n");
    const Result r = Call({"compress", in, "--step", "2", "--out", dir.Path("s2")});
    REQUIRE(r.code == kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["N2"].get<int>() == j["N_bw"].get<int>() + j["r"].get<int>() + j["N_fw"].get<int>());
    for (const char* f : {"B.csv", "M_bw.csv", "C.csv", "M_fw.csv", "report.json"}) {
      CHECK(fs::exists(dir.Path(std::string("s2/") + f)));
    }
    CHECK(Slurp(dir.Path("s2/B.csv")).rfind("source,FW:t1,FW:t2\n", 0) == 0);

    // Same input twice: byte-identical outputs.
    REQUIRE(Call({"compress", in, "--step", "2", "--out", dir.Path("again")}).code == kOk);
    for (const char* f : {"partition.json", "compressed.edges", "meta_map.json", "B.csv",
                          "M_bw.csv", "C.csv", "M_fw.csv", "report.json"}) {
      CHECK(Slurp(dir.Path(std::string("s2/") + f)) == Slurp(dir.Path(std::string("again/") + f)));
    }
  }
  SUBCASE("degenerate two-node graph warns") {
    const Result r = Call({"compress", dir.File("ab.edges", "a b\n"), "--out", dir.Path("ab")});
    REQUIRE(r.code == kOk);
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(nlohmann::json::parse(r.out)["C2"] == -0.5);
  }
  SUBCASE("rank flags") {
    const std::string in = dir.File("x.edges", "a x\nb y\n");
    const Result k1 = Call({"compress", in, "--rank-k", "1", "--out", dir.Path("k1")});
    REQUIRE(k1.code == kOk);
    const auto j = nlohmann::json::parse(k1.out);
    CHECK(j["r"] == 1);
    CHECK(j["E"].get<double>() == doctest::Approx(1.0));
    CHECK(Call({"compress", in, "--rank-k", "1", "--rank-tol", "0.1", "--out", dir.Path("kx")}).code ==
          kUsage);
    CHECK(Call({"compress", in, "--step", "3", "--out", dir.Path("k3")}).code == kUsage);
  }
  SUBCASE("site probability choice") {
    const std::string in = dir.File("y.edges", "y1 y2\ny2 y1\ny2 y3\ny3 y1\ny1 v\ny3 w\n");
    REQUIRE(Call({"compress", in, "--step", "1", "--site-prob", "uniform", "--out", dir.Path("u")}).code == kOk);
    REQUIRE(Call({"compress", in, "--step", "1", "--out", dir.Path("i")}).code == kOk);
    CHECK(Slurp(dir.Path("u/compressed.edges")) != Slurp(dir.Path("i/compressed.edges")));
    CHECK(Call({"compress", in, "--site-prob", "bogus", "--out", dir.Path("b")}).code == kUsage);
  }
}

TEST_CASE("verify") {
  TempDir dir;
  SUBCASE("chain passes") {
    const Result r = Call({"verify", dir.File("chain.edges", "a b\nb c\n")});
    CHECK(r.code == kOk);
    CHECK(nlohmann::json::parse(r.out)["max_b_deviation"] == 0.0);
  }
  SUBCASE("diamond passes") {
    CHECK(Call({"verify", dir.File("d.edges", "s u\ns w\nu t1\nw t2\n")}).code == kOk);
  }
  SUBCASE("tampered compressed graph fails") {
    const std::string in = dir.File("d.edges", "s u\ns w\nu t1\nw t2\nu w\n");
    REQUIRE(Call({"compress", in, "--step", "1", "--out", dir.Path("c")}).code == kOk);
    CHECK(Call({"verify", in, "--compressed", dir.Path("c")}).code == kOk);

    std::string edges = Slurp(dir.Path("c/compressed.edges"));
    const auto at = edges.find("u FW:t1 1");
    REQUIRE(at != std::string::npos);
    edges.replace(at, 9, "u FW:t1 5");
    std::ofstream(dir.Path("c/compressed.edges"), std::ios::binary) << edges;
    const Result r = Call({"verify", in, "--compressed", dir.Path("c")});
    CHECK(r.code == kFailure);
    CHECK(r.out.find("FW:t1") != std::string::npos);
  }
  SUBCASE("short walks fit a small step budget") {
    CHECK(Call({"verify", dir.File("x.edges", "a b\nb c\nc b\n"), "--max-steps", "10"}).code == kOk);
  }
}

TEST_CASE("experiment er") {
  TempDir dir;
  SUBCASE("p = 0 gives fraction one") {
    const Result r = Call({"experiment", "er", "--n", "100", "--p", "0", "--reps", "10", "--seed", "1"});
    REQUIRE(r.code == kOk);
    std::istringstream lines(r.out);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(row.rfind("100,0,1,0,", 0) == 0);
  }
  SUBCASE("deterministic across runs and thread counts") {
    const Result a = Call({"experiment", "er", "--n", "30", "--p-grid", "0:0.2:5", "--reps", "20",
                           "--seed", "4", "--jobs", "1"});
    const Result b = Call({"experiment", "er", "--n", "30", "--p-grid", "0:0.2:5", "--reps", "20",
                           "--seed", "4", "--jobs", "3"});
    REQUIRE(a.code == kOk);
    CHECK(a.out == b.out);
    const Result c = Call({"experiment", "er", "--n", "30", "--p-grid", "0:0.2:5", "--reps", "20",
                           "--seed", "5"});
    CHECK(a.out != c.out);
  }
  SUBCASE("seed from the environment") {
    ::setenv("ERGOSET_SEED", "4", 1);
    const Result env = Call({"experiment", "er", "--n", "30", "--p", "0.05", "--reps", "20"});
    ::unsetenv("ERGOSET_SEED");
    const Result flag = Call({"experiment", "er", "--n", "30", "--p", "0.05", "--reps", "20", "--seed", "4"});
    CHECK(env.out == flag.out);
  }
  SUBCASE("invalid grid") {
    CHECK(Call({"experiment", "er", "--n", "10", "--p-grid", "0:2:5"}).code == kUsage);
    CHECK(Call({"experiment", "er", "--n", "10", "--p-grid", "nonsense"}).code == kUsage);
    CHECK(Call({"experiment", "er", "--n", "10"}).code == kUsage);
    CHECK(Call({"experiment", "er", "--n", "10", "--p", "1.5"}).code == kUsage);
  }
}

TEST_CASE("experiment rewire") {
  TempDir dir;
  SUBCASE("single-edge core is reported unchanged") {
    const Result r = Call({"experiment", "rewire", dir.File("g.edges", "s u\nu v\nv t\n"),
                           "--samples", "2", "--out", dir.Path("rw")});
    REQUIRE(r.code == kOk);
    CHECK(r.err.find("unchanged") != std::string::npos);
    CHECK(fs::exists(dir.Path("rw/spectra.csv")));
    CHECK(fs::exists(dir.Path("rw/statistics.json")));
  }
  SUBCASE("synthetic graphs are deterministic") {
    REQUIRE(Call({"experiment", "rewire", "--synthetic", "3", "--samples", "2", "--seed", "7",
                  "--out", dir.Path("a")}).code == kOk);
    REQUIRE(Call({"experiment", "rewire", "--synthetic", "3", "--samples", "2", "--seed", "7",
                  "--jobs", "4", "--out", dir.Path("b")}).code == kOk);
    CHECK(Slurp(dir.Path("a/spectra.csv")) == Slurp(dir.Path("b/spectra.csv")));
    CHECK(Slurp(dir.Path("a/statistics.json")) == Slurp(dir.Path("b/statistics.json")));
  }
  SUBCASE("no graphs at all") {
    CHECK(Call({"experiment", "rewire", "--out", dir.Path("none")}).code == kUsage);
  }
}

}  // namespace
}  // namespace ergoset::cli
