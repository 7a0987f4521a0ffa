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

#include "cli.hpp"

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ergoset/core_mixing.hpp"
#include "ergoset/dynamics.hpp"
#include "ergoset/ergodic.hpp"
#include "ergoset/errors.hpp"
#include "ergoset/esca.hpp"
#include "ergoset/experiments.hpp"
#include "ergoset/graph.hpp"
#include "ergoset/statistics.hpp"

namespace ergoset::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Options shared by the pipeline subcommands.
struct PipelineFlags {
  std::string input;
  std::string delimiter = "whitespace";
  std::string site_prob = "indegree";
  bool weighted_site_prob = false;
  std::optional<double> rank_tol;
  std::optional<double> rank_rtol;
  std::optional<std::size_t> rank_k;
  unsigned jobs = 1;
  double eps = 1e-12;
  std::size_t max_steps = 1'000'000;
};

void AddInputFlags(CLI::App* cmd, PipelineFlags& flags) {
  cmd->add_option("input", flags.input, "Edge-list file")->required();
  cmd->add_option("--delimiter", flags.delimiter, "Field delimiter")
      ->check(CLI::IsMember({"whitespace", "comma"}));
}

void AddCollapseFlags(CLI::App* cmd, PipelineFlags& flags) {
  cmd->add_option("--site-prob", flags.site_prob,
                  "Site distribution on backward sets")
      ->check(CLI::IsMember({"indegree", "uniform", "stationary"}));
  cmd->add_flag("--weighted-site-prob", flags.weighted_site_prob,
                "Use weighted strengths in the backward collapse");
}

void AddOracleFlags(CLI::App* cmd, PipelineFlags& flags) {
  cmd->add_option("--eps", flags.eps, "Residual mass at which the oracle stops")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-steps", flags.max_steps, "Oracle step budget")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

DiGraph LoadGraph(const std::string& path, const std::string& delimiter) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  EdgeListOptions options;
  options.delimiter = delimiter == "comma" ? Delimiter::kComma : Delimiter::kWhitespace;
  try {
    return ReadEdgeList(in, options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

nlohmann::json LoadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

CollapseOptions ToCollapseOptions(const PipelineFlags& flags) {
  CollapseOptions options;
  options.weighted_site_prob = flags.weighted_site_prob;
  if (flags.site_prob == "uniform") options.site_probability = SiteProbability::kUniform;
  if (flags.site_prob == "stationary") options.site_probability = SiteProbability::kStationary;
  return options;
}

RankPolicy ToRankPolicy(const PipelineFlags& flags) {
  const int chosen = flags.rank_tol.has_value() + flags.rank_rtol.has_value() +
                     flags.rank_k.has_value();
  if (chosen > 1) throw UsageError("--rank-tol, --rank-rtol and --rank-k are exclusive");
  if (flags.rank_tol) return RankPolicy::Absolute(*flags.rank_tol);
  if (flags.rank_rtol) return RankPolicy::Relative(*flags.rank_rtol);
  if (flags.rank_k) return RankPolicy::Fixed(*flags.rank_k);
  return RankPolicy::Numerical();
}

void WriteFile(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << contents;
}

std::string Dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

template <typename Fn>
std::string Render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ERGOSET_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t seed = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, seed);
    if (ec != std::errc() || ptr != end) {
      throw UsageError(fmt::format("ERGOSET_SEED='{}' is not an unsigned integer", env));
    }
    return seed;
  }
  return 0;
}

int Detect(const PipelineFlags& flags, const std::string& out_dir, std::ostream& out) {
  const DiGraph g = LoadGraph(flags.input, flags.delimiter);
  const std::string json = Dump(PartitionToJson(Partition(g), g));
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    WriteFile(fs::path(out_dir) / "partition.json", json);
  }
  out << json;
  return kOk;
}

int Compress(const PipelineFlags& flags, int step, const std::string& out_dir,
             std::ostream& out, std::ostream& err) {
  const RankPolicy policy = ToRankPolicy(flags);
  const DiGraph g = LoadGraph(flags.input, flags.delimiter);
  const ErgodicPartition part = Partition(g);
  const Step1Result step1 = CompressStep1(g, part, ToCollapseOptions(flags));
  const CompressedGraph& cg = step1.compressed;

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  WriteFile(dir / "partition.json", Dump(PartitionToJson(part, g)));
  WriteFile(dir / "compressed.edges", ToEdgeList(cg.graph));
  WriteFile(dir / "meta_map.json", Dump(MetaMapToJson(cg, g)));

  if (step == 1) {
    const std::string report = Dump(ReportToJson(step1.report));
    WriteFile(dir / "report.json", report);
    out << report;
    return kOk;
  }

  const MixingMatrix mixing = ComputeMixingMatrix(cg);
  const SvdFactors factors = SvdCompress(mixing.b, policy);
  const FullReport report = MakeFullReport(g, part, cg, factors);
  if (report.n2 != report.n_bw + report.rank + report.n_fw ||
      report.n_bw != static_cast<std::size_t>(mixing.b.rows()) ||
      report.n_fw != static_cast<std::size_t>(mixing.b.cols())) {
    throw ContractViolation("report violates N2 = N_bw + r + N_fw");
  }
  for (const std::string& w : report.warnings) err << "warning: " << w << '\n';

  WriteFile(dir / "B.csv", Render([&](std::ostream& s) { WriteMixingCsv(s, mixing); }));
  WriteFile(dir / "M_bw.csv", Render([&](std::ostream& s) { WriteMatrixCsv(s, factors.m_bw); }));
  WriteFile(dir / "C.csv", Render([&](std::ostream& s) {
              WriteMatrixCsv(s, Eigen::MatrixXd(factors.c.asDiagonal()));
            }));
  WriteFile(dir / "M_fw.csv", Render([&](std::ostream& s) { WriteMatrixCsv(s, factors.m_fw); }));
  const std::string json = Dump(FullReportToJson(report));
  WriteFile(dir / "report.json", json);
  out << json;
  return kOk;
}

int VerifyCommand(const PipelineFlags& flags, const std::string& compressed_dir,
                  double tolerance, std::ostream& out) {
  const DiGraph g = LoadGraph(flags.input, flags.delimiter);
  const ErgodicPartition part = Partition(g);
  const Step1Result step1 = CompressStep1(g, part, ToCollapseOptions(flags));
  const dynamics::AbsorbOptions options{flags.eps, flags.max_steps};

  dynamics::VerificationReport report;
  if (compressed_dir.empty()) {
    report = dynamics::Verify(g, part, step1.compressed, nullptr, options, flags.jobs, tolerance);
  } else {
    const fs::path dir(compressed_dir);
    DiGraph loaded = LoadGraph((dir / "compressed.edges").string(), "whitespace");
    const CompressedGraph cg =
        CompressedFromMetaMap(std::move(loaded), LoadJson(dir / "meta_map.json"), g);
    report = dynamics::Verify(g, part, cg, &step1.compressed, options, flags.jobs, tolerance);
  }
  out << Dump(dynamics::VerificationToJson(report));
  return report.passed() ? kOk : kFailure;
}

std::vector<double> ParseGrid(const std::string& text) {
  // lo:hi:count
  std::vector<std::string> parts;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw UsageError("--p-grid expects lo:hi:count");
  try {
    std::size_t used = 0;
    const double lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("lo");
    const double hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("hi");
    const long count = std::stol(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("count");
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi) || count < 1) {
      throw UsageError("--p-grid needs 0 <= lo <= hi <= 1 and count >= 1");
    }
    return experiments::LinearGrid(lo, hi, static_cast<std::size_t>(count));
  } catch (const std::logic_error&) {
    throw UsageError("--p-grid '" + text + "' is not lo:hi:count");
  }
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ergodic-set detection and compression of directed networks", "ergoset"};
  app.require_subcommand(1);

  PipelineFlags flags;
  std::string out_dir;
  int step = 2;
  std::string compressed_dir;
  double tolerance = 1e-10;

  CLI::App* detect = app.add_subcommand("detect", "Partition a graph into sources, sinks and core");
  AddInputFlags(detect, flags);
  detect->add_option("--out", out_dir, "Also write partition.json here");

  CLI::App* compress = app.add_subcommand("compress", "Run ESCA step 1 or steps 1 and 2");
  AddInputFlags(compress, flags);
  AddCollapseFlags(compress, flags);
  compress->add_option("--step", step, "1 or 2")->check(CLI::IsMember({1, 2}));
  compress->add_option("--out", out_dir, "Output directory")->required();
  compress->add_option("--rank-tol", flags.rank_tol, "Keep singular values above this")
      ->check(CLI::PositiveNumber);
  compress->add_option("--rank-rtol", flags.rank_rtol,
                       "Keep singular values above this fraction of the largest")
      ->check(CLI::PositiveNumber);
  compress->add_option("--rank-k", flags.rank_k, "Keep exactly k singular values");

  CLI::App* verify = app.add_subcommand("verify", "Cross-check compression against random walks");
  AddInputFlags(verify, flags);
  AddCollapseFlags(verify, flags);
  AddOracleFlags(verify, flags);
  verify->add_option("--compressed", compressed_dir,
                     "Directory with compressed.edges and meta_map.json to check");
  verify->add_option("--tolerance", tolerance, "Pass/fail threshold")
      ->check(CLI::PositiveNumber);

  CLI::App* experiment = app.add_subcommand("experiment", "Random-graph experiments");
  experiment->require_subcommand(1);
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;

  CLI::App* er = experiment->add_subcommand("er", "Erdős–Rényi ergodic-set sweep");
  std::vector<std::size_t> sizes;
  std::vector<double> probabilities;
  std::string p_grid;
  std::size_t replicates = 1000;
  std::string out_file;
  er->add_option("--n", sizes, "Graph sizes")->required()->check(CLI::PositiveNumber);
  auto* p_opt = er->add_option("--p", probabilities, "Edge probabilities");
  auto* grid_opt = er->add_option("--p-grid", p_grid, "Evenly spaced probabilities lo:hi:count");
  p_opt->excludes(grid_opt);
  er->add_option("--reps", replicates, "Replicates per (N, p)")->check(CLI::PositiveNumber);
  er->add_option("--seed", seed, "Master seed (default: $ERGOSET_SEED or 0)");
  er->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  er->add_option("--out", out_file, "CSV output file (default: stdout)");

  CLI::App* rewire = experiment->add_subcommand("rewire", "Core rewiring spectral analysis");
  std::vector<std::string> inputs;
  std::size_t synthetic = 0;
  experiments::RewireExperimentConfig rewire_config;
  std::string delimiter = "whitespace";
  rewire->add_option("inputs", inputs, "Edge-list files");
  rewire->add_option("--synthetic", synthetic, "Add this many random bow-tie graphs");
  rewire->add_option("--samples", rewire_config.samples, "Rewired copies per graph");
  rewire->add_option("--swaps-per-edge", rewire_config.swaps_per_edge, "Swap attempts per core edge");
  rewire->add_option("--zero-tol", rewire_config.zero_tol, "Zero-eigenvalue threshold")
      ->check(CLI::PositiveNumber);
  rewire->add_option("--seed", seed, "Master seed (default: $ERGOSET_SEED or 0)");
  rewire->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  rewire->add_option("--delimiter", delimiter, "Field delimiter")
      ->check(CLI::IsMember({"whitespace", "comma"}));
  rewire->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (detect->parsed()) return Detect(flags, out_dir, out);
    if (compress->parsed()) return Compress(flags, step, out_dir, out, err);
    if (verify->parsed()) return VerifyCommand(flags, compressed_dir, tolerance, out);
    if (er->parsed()) {
      experiments::ErSweepConfig config;
      config.sizes = sizes;
      config.probabilities = p_grid.empty() ? probabilities : ParseGrid(p_grid);
      if (config.probabilities.empty()) throw UsageError("give --p or --p-grid");
      for (double p : config.probabilities) {
        if (!(p >= 0.0 && p <= 1.0)) throw UsageError(fmt::format("--p {} outside [0, 1]", p));
      }
      config.replicates = replicates;
      config.seed = ResolveSeed(seed);
      config.jobs = jobs;
      const std::string csv = Render([&](std::ostream& s) {
        experiments::WriteSweepCsv(s, experiments::ErSweep(config));
      });
      if (out_file.empty()) {
        out << csv;
      } else {
        WriteFile(out_file, csv);
      }
      return kOk;
    }
    if (rewire->parsed()) {
      rewire_config.seed = ResolveSeed(seed);
      rewire_config.jobs = jobs;
      std::vector<experiments::NamedGraph> graphs;
      for (const std::string& path : inputs) {
        graphs.push_back({fs::path(path).stem().string(), LoadGraph(path, delimiter)});
      }
      for (std::size_t i = 0; i < synthetic; ++i) {
        experiments::Rng rng = experiments::MakeStream(rewire_config.seed, {0xb0, i});
        graphs.push_back({fmt::format("bowtie{}", i),
                          experiments::BowTieDigraph({}, rng).graph});
      }
      if (graphs.empty()) throw UsageError("no graphs: give input files or --synthetic");
      const auto result = experiments::RewireExperiment(graphs, rewire_config);
      fs::create_directories(out_dir);
      WriteFile(fs::path(out_dir) / "spectra.csv", Render([&](std::ostream& s) {
                  experiments::WriteSpectraCsv(s, result.rows);
                }));
      WriteFile(fs::path(out_dir) / "statistics.json", Dump(result.statistics));
      for (const std::string& notice : result.notices) err << "note: " << notice << '\n';
      out << Dump(result.statistics);
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace ergoset::cli
