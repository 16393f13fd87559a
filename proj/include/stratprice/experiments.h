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

// Convergence harness, verification suite runner, and file formats.

#ifndef STRATPRICE_EXPERIMENTS_H_
#define STRATPRICE_EXPERIMENTS_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "stratprice/core.h"
#include "stratprice/distributions.h"
#include "stratprice/grid.h"
#include "stratprice/solver.h"

namespace stratprice {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  DistributionSpec distribution;
  std::vector<double> prices;
  // Strictly increasing sample sizes.
  std::vector<int> schedule;
  int replications = 1;
  uint64_t seed = 0;
  int64_t eval_draws = 100000;
  SolveOptions solver;
  std::string out_dir = ".";
  int workers = 1;
  // Rows that miss the gap target make the CLI exit with status 3.
  bool required_optimal = false;
};

// Schema: {distribution:{id, eps, params:{center, radius}}, prices, schedule,
// replications, seed, eval_draws, solver:{time_limit_ms, node_limit, gap},
// out_dir, workers, required_optimal}. Throws ConfigError.
ExperimentConfig ParseExperimentConfig(const nlohmann::json& j);
void ValidateExperimentConfig(const ExperimentConfig& config);

struct ConvergenceRecord {
  int n = 0;
  int replication = 0;
  uint64_t seed = 0;
  uint64_t eval_seed = 0;
  double in_sample = 0.0;
  double out_sample_mean = 0.0;
  double out_sample_ci = 0.0;
  double upper_bound = 0.0;
  SolveStatus status = SolveStatus::kInfeasibleInput;
  double gap = 0.0;
  int64_t nodes = 0;
  double wall_ms = 0.0;
  // Set when the row failed; the run continues.
  std::string error;

  // Optimal, or stopped early within the gap target.
  bool meets_gap(double target_gap) const;
};

// One row per (N, replication), sorted by (N, replication).
std::vector<ConvergenceRecord> RunConvergence(const ExperimentConfig& config);

// Per N: mean and sample standard deviation of in- and out-of-sample values.
// Throws on empty input.
std::string EmitPlotData(const std::vector<ConvergenceRecord>& records);

// Wall time is left out so equal configs give identical files.
std::string RecordsToCsv(const std::vector<ConvergenceRecord>& records);
nlohmann::json RecordsToJson(const std::vector<ConvergenceRecord>& records);

struct VerifyConfig {
  int exhaustive_max_s = 8;
  // Policies at resolution fine_factor * S.
  int fine_factor = 2;
  int random_min_s = 2;
  int random_max_s = 5;
  int random_policies = 100;
  int random_k = 3;
  int max_m = 3;
  // Exhaustive enumeration only up to this many policies.
  int64_t exhaustive_cap = int64_t{1} << 20;
  uint64_t seed = 20260101;
  // Violating-mass trend.
  std::vector<int> trend_s = {2, 4, 8};
  int64_t trend_draws = 100000;
  int trend_policies = 20;
  DistributionSpec trend_distribution{"rect_uniform", {0.09, 0.09}};
};

struct TrendRow {
  int resolution = 0;
  // Largest estimated probability mass of violating buckets over the
  // sampled policies, and the mean over them.
  double max_mass = 0.0;
  double mean_mass = 0.0;
  double beta = 0.0;
};

struct VerificationReport {
  std::vector<BoundReport> reports;
  std::vector<TrendRow> trend;
  bool all_pass() const;
};

VerificationReport RunVerificationSuite(const VerifyConfig& config);

// Every K-level policy at the given resolution, by odometer (cell 1 fastest).
std::vector<GridPolicy> EnumeratePolicies(int resolution, int dimension,
                                          const PriceGrid& grid);
std::vector<GridPolicy> RandomPolicies(int resolution, int dimension,
                                       const PriceGrid& grid, int count,
                                       uint64_t seed);

nlohmann::json ToJson(const BoundReport& report);
nlohmann::json ToJson(const VerificationReport& report);
nlohmann::json ToJson(const SolveResult& result);

// Sample files: {"meta":{...},"buyers":[[lower, upper, v], ...]} with reals
// printed to 17 significant digits.
std::string SampleToJsonText(const Sample& sample);
Sample SampleFromJson(const nlohmann::json& j);

// "%.17g".
std::string FormatReal(double x);

}  // namespace stratprice

#endif  // STRATPRICE_EXPERIMENTS_H_
