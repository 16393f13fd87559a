// Copyright 2026 The stratprice Authors
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

// Command-line front end. Exit status: 0 ok, 1 runtime error, 2 invalid
// input or config, 3 a required-optimal row missed its gap target.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stratprice/core.h"
#include "stratprice/distributions.h"
#include "stratprice/experiments.h"
#include "stratprice/geometry.h"
#include "stratprice/grid.h"
#include "stratprice/solver.h"

namespace sp = stratprice;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct Globals {
  std::string config;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string format = "json";
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sp::ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ReadJson(const std::string& path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw sp::ConfigError(path + ": " + e.what());
  }
}

void WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw sp::ConfigError("not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw sp::ConfigError("empty list");
  return out;
}

sp::PriceGrid MakeGrid(const std::string& prices) {
  try {
    return sp::PriceGrid(ParseList(prices));
  } catch (const std::invalid_argument& e) {
    throw sp::ConfigError(e.what());
  }
}

sp::Sample LoadSample(const std::string& path) {
  try {
    return sp::SampleFromJson(ReadJson(path));
  } catch (const sp::ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw sp::ConfigError(e.what());
  }
}

sp::DistributionSpec MakeSpec(const std::string& dist, const std::string& eps,
                              const std::vector<double>& center, double radius) {
  sp::DistributionSpec spec;
  spec.id = dist == "rect" ? "rect_uniform" : dist;
  if (spec.id == "example1") {
    spec.epsilon.clear();
  } else if (spec.id == "circle") {
    spec.epsilon = {eps.empty() ? 0.0 : ParseList(eps).at(0)};
  } else {
    std::vector<double> e = eps.empty() ? std::vector<double>{0.0} : ParseList(eps);
    if (e.size() == 1) e.push_back(e[0]);
    spec.epsilon = e;
  }
  spec.center = center;
  spec.radius = radius;
  try {
    sp::ValidateSpec(spec);
  } catch (const std::invalid_argument& e) {
    throw sp::ConfigError(e.what());
  }
  return spec;
}

// Pulls the few columns plot-data needs out of a convergence CSV.
std::vector<sp::ConvergenceRecord> ParseRecordsCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw sp::ConfigError("empty records file");
  std::map<std::string, size_t> column;
  {
    std::stringstream hs(line);
    std::string name;
    for (size_t i = 0; std::getline(hs, name, ','); ++i) column[name] = i;
  }
  for (const char* need : {"N", "replication", "in_sample", "out_sample_mean"}) {
    if (!column.count(need)) throw sp::ConfigError(std::string("missing column ") + need);
  }
  std::vector<sp::ConvergenceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string item;
    while (std::getline(ls, item, ',')) f.push_back(item);
    sp::ConvergenceRecord r;
    try {
      r.n = std::stoi(f.at(column["N"]));
      r.replication = std::stoi(f.at(column["replication"]));
      r.in_sample = std::stod(f.at(column["in_sample"]));
      r.out_sample_mean = std::stod(f.at(column["out_sample_mean"]));
    } catch (const std::exception&) {
      throw sp::ConfigError("malformed records row: " + line);
    }
    out.push_back(r);
  }
  return out;
}

std::vector<sp::ConvergenceRecord> LoadRecords(const std::string& path) {
  const std::string text = ReadFile(path);
  const size_t start = text.find_first_not_of(" \t\r\n");
  if (start == std::string::npos || text[start] != '[') return ParseRecordsCsv(text);
  std::vector<sp::ConvergenceRecord> out;
  try {
    for (const json& row : json::parse(text)) {
      sp::ConvergenceRecord r;
      r.n = row.at("N").get<int>();
      r.replication = row.at("replication").get<int>();
      r.in_sample = row.at("in_sample").get<double>();
      r.out_sample_mean = row.at("out_sample_mean").get<double>();
      out.push_back(r);
    }
  } catch (const json::exception& e) {
    throw sp::ConfigError(path + ": " + e.what());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalized pricing with strategic buyers: SAA solver and experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--seed", g.seed, "Master seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--out", g.out, "Output path (stdout when omitted)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Draw a buyer sample");
  sample_cmd->fallthrough();
  std::string dist = "rect", eps;
  int n = 0;
  std::vector<double> center = {0.5, 0.5};
  double radius = 0.25;
  sample_cmd->add_option("--dist", dist)->check(CLI::IsMember({"rect", "rect_uniform", "example1", "circle"}));
  sample_cmd->add_option("--n", n)->required()->check(CLI::NonNegativeNumber);
  sample_cmd->add_option("--eps", eps, "Scalar or comma list");
  sample_cmd->add_option("--center", center)->expected(2);
  sample_cmd->add_option("--radius", radius);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve the SAA problem on a sample");
  solve_cmd->fallthrough();
  std::string input, prices, export_lp;
  sp::SolveOptions opts;
  int grid_s = 0;
  bool brute = false, no_presolve = false;
  solve_cmd->add_option("--input", input)->required();
  solve_cmd->add_option("--prices", prices)->required();
  solve_cmd->add_option("--time-limit-ms", opts.time_limit_ms);
  solve_cmd->add_option("--node-limit", opts.node_limit);
  solve_cmd->add_option("--gap", opts.target_gap);
  solve_cmd->add_option("--grid-s", grid_s, "Restrict to grid policies at resolution S");
  solve_cmd->add_option("--export-lp", export_lp);
  solve_cmd->add_flag("--brute-force", brute, "Enumerate every region pricing");
  solve_cmd->add_flag("--no-presolve", no_presolve);

  // arrangement
  auto* arr_cmd = app.add_subcommand("arrangement", "Describe the region arrangement of a sample");
  arr_cmd->fallthrough();
  arr_cmd->add_option("--input", input)->required();

  // export-milp
  auto* milp_cmd = app.add_subcommand("export-milp", "Write the MILP model in LP format");
  milp_cmd->fallthrough();
  milp_cmd->add_option("--input", input)->required();
  milp_cmd->add_option("--prices", prices)->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Monte Carlo revenue of the SAA policy or a constant price");
  eval_cmd->fallthrough();
  int64_t draws = 100000;
  double constant = -1.0;
  eval_cmd->add_option("--input", input);
  eval_cmd->add_option("--prices", prices)->required();
  eval_cmd->add_option("--dist", dist)->check(CLI::IsMember({"rect", "rect_uniform", "example1", "circle"}));
  eval_cmd->add_option("--eps", eps);
  eval_cmd->add_option("--center", center)->expected(2);
  eval_cmd->add_option("--radius", radius);
  eval_cmd->add_option("--draws", draws)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--constant", constant, "Evaluate this constant price instead");
  eval_cmd->add_option("--time-limit-ms", opts.time_limit_ms);

  // convergence
  auto* conv_cmd = app.add_subcommand("convergence", "Run the in/out-of-sample convergence experiment");
  conv_cmd->fallthrough();
  std::string plot_out;
  conv_cmd->add_option("--plot-out", plot_out, "Also write per-N plot data here");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Run the combinatorial bound checks");
  verify_cmd->fallthrough();
  sp::VerifyConfig vc;
  verify_cmd->add_option("--max-s", vc.exhaustive_max_s);
  verify_cmd->add_option("--random-max-s", vc.random_max_s);
  verify_cmd->add_option("--policies", vc.random_policies);
  verify_cmd->add_option("--max-m", vc.max_m);
  verify_cmd->add_option("--trend-draws", vc.trend_draws);

  // plot-data
  auto* plot_cmd = app.add_subcommand("plot-data", "Aggregate convergence records per N");
  plot_cmd->fallthrough();
  plot_cmd->add_option("--input", input)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sample_cmd) {
      const sp::DistributionSpec spec = MakeSpec(dist, eps, center, radius);
      const sp::Sample s = sp::DrawSample(spec, n, g.seed);
      WriteOutput(g.out, sp::SampleToJsonText(s));
      return 0;
    }
    if (*solve_cmd) {
      const sp::Sample s = LoadSample(input);
      const sp::PriceGrid grid = MakeGrid(prices);
      opts.presolve = !no_presolve;
      sp::SolveResult r;
      if (grid_s > 0) {
        r = sp::SolveGridRestricted(s, grid, grid_s, opts);
      } else if (brute) {
        r = sp::BruteForceSaa(s, grid);
      } else {
        r = sp::SolveSaa(s, grid, opts);
      }
      json j = sp::ToJson(r);
      j["per_buyer_upper_bound"] = sp::PerBuyerUpperBound(s, grid);
      if (!export_lp.empty()) {
        WriteOutput(export_lp, sp::ExportMilp(s, grid, sp::Arrangement::Build(s)));
      }
      WriteOutput(g.out, j.dump(2) + "\n");
      return 0;
    }
    if (*arr_cmd) {
      const sp::Sample s = LoadSample(input);
      const sp::Arrangement a = sp::Arrangement::Build(s);
      std::map<int, int> hist;
      for (const sp::Region& r : a.regions()) ++hist[static_cast<int>(r.signature.size())];
      json h = json::object();
      for (const auto& [size, count] : hist) h[std::to_string(size)] = count;
      json cov = json::array();
      for (int i = 0; i < a.num_buyers(); ++i) cov.push_back(a.coverage(i).size());
      const json j = {{"buyers", a.num_buyers()},
                      {"dimension", a.dimension()},
                      {"regions", a.num_regions()},
                      {"elementary_cells", a.elementary_cell_count()},
                      {"signature_size_histogram", h},
                      {"coverage_counts", cov}};
      WriteOutput(g.out, j.dump(2) + "\n");
      return 0;
    }
    if (*milp_cmd) {
      const sp::Sample s = LoadSample(input);
      const sp::PriceGrid grid = MakeGrid(prices);
      const sp::Arrangement a = sp::Arrangement::Build(s);
      WriteOutput(g.out, sp::ExportMilp(s, grid, a));
      const sp::MilpSize size = sp::MilpModelSize(s, grid, a);
      std::cerr << "variables " << size.variables << ", constraints "
                << size.constraints << "\n";
      return 0;
    }
    if (*eval_cmd) {
      const sp::PriceGrid grid = MakeGrid(prices);
      const sp::DistributionSpec spec = MakeSpec(dist, eps, center, radius);
      json j;
      std::unique_ptr<sp::PricingPolicy> owned;
      const sp::PricingPolicy* policy = nullptr;
      sp::SolveResult r;
      if (constant >= 0.0) {
        const auto k = grid.LargestIndexAtMost(constant);
        if (!k || grid.price(*k) != constant) {
          throw sp::ConfigError("--constant must be one of the prices");
        }
        owned = std::make_unique<sp::GridPolicy>(
            sp::GridPolicy::Constant(spec.dimension(), *k, grid));
        policy = owned.get();
      } else {
        if (input.empty()) throw sp::ConfigError("eval needs --input or --constant");
        const sp::Sample s = LoadSample(input);
        r = sp::SolveSaa(s, grid, opts);
        policy = r.pricing_policy();
        j["in_sample"] = r.value;
        j["solver_status"] = sp::StatusName(r.status);
      }
      const sp::EvalResult e = sp::EstimateTrueObjective(*policy, spec, draws, g.seed);
      j["mean"] = e.mean;
      j["ci_half_width"] = e.ci_half_width;
      j["draws"] = e.draws;
      WriteOutput(g.out, j.dump(2) + "\n");
      return 0;
    }
    if (*conv_cmd) {
      if (g.config.empty()) throw sp::ConfigError("convergence needs --config");
      sp::ExperimentConfig c = sp::ParseExperimentConfig(ReadJson(g.config));
      if (g.seed_set) c.seed = g.seed;
      const std::vector<sp::ConvergenceRecord> records = sp::RunConvergence(c);
      std::string out_path = g.out;
      if (out_path.empty()) {
        out_path = c.out_dir + (g.format == "csv" ? "/convergence.csv" : "/convergence.json");
      }
      WriteOutput(out_path, g.format == "csv" ? sp::RecordsToCsv(records)
                                              : sp::RecordsToJson(records).dump(2) + "\n");
      if (!plot_out.empty()) WriteOutput(plot_out, sp::EmitPlotData(records));
      int bad = 0;
      for (const sp::ConvergenceRecord& r : records) {
        if (!r.error.empty()) std::cerr << "N=" << r.n << " rep=" << r.replication << ": " << r.error << "\n";
        if (!r.meets_gap(c.solver.target_gap)) ++bad;
      }
      if (c.required_optimal && bad > 0) {
        std::cerr << bad << " rows missed the gap target\n";
        return kExitBudget;
      }
      return 0;
    }
    if (*verify_cmd) {
      if (g.seed_set) vc.seed = g.seed;
      const sp::VerificationReport report = sp::RunVerificationSuite(vc);
      WriteOutput(g.out, sp::ToJson(report).dump(2) + "\n");
      return report.all_pass() ? 0 : kExitRuntime;
    }
    if (*plot_cmd) {
      WriteOutput(g.out, sp::EmitPlotData(LoadRecords(input)));
      return 0;
    }
  } catch (const sp::ConfigError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
