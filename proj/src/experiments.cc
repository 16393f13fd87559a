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

#include "stratprice/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <thread>
#include <utility>

namespace stratprice {
namespace {

using nlohmann::json;

template <typename T>
T Get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

double SampleSd(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  long double ss = 0.0L;
  for (double x : xs) ss += (static_cast<long double>(x) - mean) * (x - mean);
  return static_cast<double>(std::sqrt(ss / (xs.size() - 1)));
}

double Mean(const std::vector<double>& xs) {
  long double s = 0.0L;
  for (double x : xs) s += x;
  return static_cast<double>(s / xs.size());
}

std::string JoinReals(const std::vector<double>& xs) {
  std::string out = "[";
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += FormatReal(xs[i]);
  }
  return out + "]";
}

}  // namespace

std::string FormatReal(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void ValidateExperimentConfig(const ExperimentConfig& config) {
  try {
    ValidateSpec(config.distribution);
    PriceGrid grid(config.prices);
    (void)grid;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (config.schedule.empty()) throw ConfigError("schedule is empty");
  for (size_t i = 0; i < config.schedule.size(); ++i) {
    if (config.schedule[i] < 1) throw ConfigError("schedule entries must be >= 1");
    if (i > 0 && config.schedule[i] <= config.schedule[i - 1]) {
      throw ConfigError("schedule must be strictly increasing");
    }
  }
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  if (config.eval_draws < 1000) throw ConfigError("eval_draws must be >= 1000");
  if (config.solver.time_limit_ms < 0 || config.solver.node_limit < 0 ||
      config.solver.target_gap < 0) {
    throw ConfigError("solver limits must be nonnegative");
  }
  if (config.workers < 1) throw ConfigError("workers must be >= 1");
}

ExperimentConfig ParseExperimentConfig(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  if (!j.contains("distribution")) throw ConfigError("missing 'distribution'");
  const json& d = j.at("distribution");
  c.distribution.id = Get<std::string>(d, "id", "rect_uniform");
  if (c.distribution.id == "rect") c.distribution.id = "rect_uniform";
  if (d.contains("eps") && d.at("eps").is_number()) {
    const double e = d.at("eps").get<double>();
    c.distribution.epsilon =
        c.distribution.id == "rect_uniform" ? std::vector<double>{e, e}
                                            : std::vector<double>{e};
  } else {
    c.distribution.epsilon = Get<std::vector<double>>(d, "eps", {});
  }
  if (c.distribution.id == "rect_uniform" && c.distribution.epsilon.empty()) {
    c.distribution.epsilon = {0.0, 0.0};
  }
  if (c.distribution.id == "circle" && c.distribution.epsilon.empty()) {
    c.distribution.epsilon = {0.0};
  }
  if (d.contains("params")) {
    const json& p = d.at("params");
    c.distribution.center = Get<std::vector<double>>(p, "center", {0.5, 0.5});
    c.distribution.radius = Get<double>(p, "radius", 0.25);
  }
  c.prices = Get<std::vector<double>>(j, "prices", {});
  c.schedule = Get<std::vector<int>>(j, "schedule", {});
  c.replications = Get<int>(j, "replications", 1);
  c.seed = Get<uint64_t>(j, "seed", 0);
  c.eval_draws = Get<int64_t>(j, "eval_draws", 100000);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    c.solver.time_limit_ms = Get<int64_t>(s, "time_limit_ms", 60000);
    c.solver.node_limit = Get<int64_t>(s, "node_limit", 0);
    c.solver.target_gap = Get<double>(s, "gap", 0.005);
  }
  c.out_dir = Get<std::string>(j, "out_dir", ".");
  c.workers = Get<int>(j, "workers", 1);
  c.required_optimal = Get<bool>(j, "required_optimal", false);
  ValidateExperimentConfig(c);
  return c;
}

bool ConvergenceRecord::meets_gap(double target_gap) const {
  if (!error.empty()) return false;
  return status == SolveStatus::kOptimal ||
         (status == SolveStatus::kFeasibleWithGap && gap <= target_gap);
}

std::vector<ConvergenceRecord> RunConvergence(const ExperimentConfig& config) {
  ValidateExperimentConfig(config);
  const PriceGrid grid(config.prices);
  std::vector<ConvergenceRecord> records;
  for (int n : config.schedule) {
    for (int r = 0; r < config.replications; ++r) {
      ConvergenceRecord rec;
      rec.n = n;
      rec.replication = r;
      rec.seed = DeriveSeed(config.seed, "train", n, r);
      rec.eval_seed = DeriveSeed(config.seed, "eval", n, r);
      records.push_back(rec);
    }
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t t = next++; t < records.size(); t = next++) {
      ConvergenceRecord& rec = records[t];
      try {
        const Sample sample = DrawSample(config.distribution, rec.n, rec.seed);
        const SolveResult res = SolveSaa(sample, grid, config.solver);
        rec.in_sample = res.value;
        rec.status = res.status;
        rec.gap = res.gap;
        rec.nodes = res.nodes;
        rec.wall_ms = res.wall_ms;
        rec.upper_bound = PerBuyerUpperBound(sample, grid);
        const EvalResult eval = EstimateTrueObjective(
            *res.pricing_policy(), config.distribution, config.eval_draws,
            rec.eval_seed);
        rec.out_sample_mean = eval.mean;
        rec.out_sample_ci = eval.ci_half_width;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  };
  const int threads = std::min<int>(config.workers, static_cast<int>(records.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return records;
}

std::string EmitPlotData(const std::vector<ConvergenceRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records");
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_n;
  for (const ConvergenceRecord& r : records) {
    by_n[r.n].first.push_back(r.in_sample);
    by_n[r.n].second.push_back(r.out_sample_mean);
  }
  std::string out = "N,in_mean,in_sd,out_mean,out_sd,reps\n";
  for (const auto& [n, values] : by_n) {
    const double in_mean = Mean(values.first);
    const double out_mean = Mean(values.second);
    out += std::to_string(n) + "," + FormatReal(in_mean) + "," +
           FormatReal(SampleSd(values.first, in_mean)) + "," +
           FormatReal(out_mean) + "," +
           FormatReal(SampleSd(values.second, out_mean)) + "," +
           std::to_string(values.first.size()) + "\n";
  }
  return out;
}

std::string RecordsToCsv(const std::vector<ConvergenceRecord>& records) {
  std::string out =
      "N,replication,seed,in_sample,out_sample_mean,out_sample_ci,upper_bound,"
      "solver_status,gap,nodes,error\n";
  for (const ConvergenceRecord& r : records) {
    out += std::to_string(r.n) + "," + std::to_string(r.replication) + "," +
           std::to_string(r.seed) + "," + FormatReal(r.in_sample) + "," +
           FormatReal(r.out_sample_mean) + "," + FormatReal(r.out_sample_ci) +
           "," + FormatReal(r.upper_bound) + "," + StatusName(r.status) + "," +
           FormatReal(r.gap) + "," + std::to_string(r.nodes) + "," +
           (r.error.empty() ? "" : "\"" + r.error + "\"") + "\n";
  }
  return out;
}

json RecordsToJson(const std::vector<ConvergenceRecord>& records) {
  json out = json::array();
  for (const ConvergenceRecord& r : records) {
    out.push_back({{"N", r.n},
                   {"replication", r.replication},
                   {"seed", r.seed},
                   {"eval_seed", r.eval_seed},
                   {"in_sample", r.in_sample},
                   {"out_sample_mean", r.out_sample_mean},
                   {"out_sample_ci", r.out_sample_ci},
                   {"upper_bound", r.upper_bound},
                   {"solver_status", StatusName(r.status)},
                   {"gap", r.gap},
                   {"nodes", r.nodes},
                   {"wall_ms", r.wall_ms},
                   {"error", r.error}});
  }
  return out;
}

std::vector<GridPolicy> EnumeratePolicies(int resolution, int dimension,
                                          const PriceGrid& grid) {
  int64_t cells = 1;
  for (int d = 0; d < dimension; ++d) cells *= resolution;
  long double count = std::pow(static_cast<long double>(grid.size()), cells);
  if (count > (int64_t{1} << 24)) throw std::length_error("too many policies");
  std::vector<GridPolicy> out;
  std::vector<int> table(cells, 0);
  while (true) {
    out.emplace_back(resolution, dimension, table, grid);
    int64_t c = 0;
    while (c < cells && table[c] == grid.size() - 1) table[c++] = 0;
    if (c == cells) break;
    ++table[c];
  }
  return out;
}

std::vector<GridPolicy> RandomPolicies(int resolution, int dimension,
                                       const PriceGrid& grid, int count,
                                       uint64_t seed) {
  int64_t cells = 1;
  for (int d = 0; d < dimension; ++d) cells *= resolution;
  const CounterRng rng(seed, 7);
  std::vector<GridPolicy> out;
  uint64_t counter = 0;
  for (int p = 0; p < count; ++p) {
    std::vector<int> table(cells);
    for (int& t : table) t = static_cast<int>(rng.Bits(counter++) % grid.size());
    out.emplace_back(resolution, dimension, std::move(table), grid);
  }
  return out;
}

bool VerificationReport::all_pass() const {
  return std::all_of(reports.begin(), reports.end(),
                     [](const BoundReport& r) { return r.all_pass(); });
}

VerificationReport RunVerificationSuite(const VerifyConfig& config) {
  VerificationReport out;
  const PriceGrid two({0.25, 0.75});
  for (int s = 2; s <= config.exhaustive_max_s; ++s) {
    const int fine = config.fine_factor * s;
    if (std::pow(2.0, fine) > static_cast<double>(config.exhaustive_cap)) break;
    const std::vector<GridPolicy> policies = EnumeratePolicies(fine, 1, two);
    for (int m = 1; m <= std::min(config.max_m, s - 1); ++m) {
      out.reports.push_back(VerifyCombinatorics(s, m, policies, two.size()));
    }
  }
  std::vector<double> levels;
  for (int k = 1; k <= config.random_k; ++k) {
    levels.push_back(static_cast<double>(k) / (config.random_k + 1));
  }
  const PriceGrid random_grid(levels);
  for (int s = config.random_min_s; s <= config.random_max_s; ++s) {
    const std::vector<GridPolicy> policies =
        RandomPolicies(config.fine_factor * s, 2, random_grid,
                       config.random_policies, DeriveSeed(config.seed, "verify", s, 0));
    for (int m = 1; m <= std::min(config.max_m, s - 1); ++m) {
      out.reports.push_back(VerifyCombinatorics(s, m, policies, random_grid.size()));
    }
  }
  const BuyerSampler sampler = MakeSampler(config.trend_distribution);
  const int dims = config.trend_distribution.dimension();
  for (int s : config.trend_s) {
    const std::map<Bucket, double> mass = BucketProbabilities(
        sampler, s, config.trend_draws, DeriveSeed(config.seed, "trend", s, 0));
    const std::vector<GridPolicy> policies =
        RandomPolicies(config.fine_factor * s, dims, two, config.trend_policies,
                       DeriveSeed(config.seed, "trend-policy", s, 0));
    TrendRow row;
    row.resolution = s;
    row.beta = BetaBound(s, dims, two.size());
    double total = 0.0;
    for (const GridPolicy& p : policies) {
      double sum = 0.0;
      for (const auto& [bucket, prob] : mass) {
        if (IsViolatingBucket(p, s, bucket)) sum += prob;
      }
      row.max_mass = std::max(row.max_mass, sum);
      total += sum;
    }
    row.mean_mass = policies.empty() ? 0.0 : total / policies.size();
    out.trend.push_back(row);
  }
  return out;
}

json ToJson(const BoundReport& report) {
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    checks.push_back({{"check", c.check},
                      {"instances", c.instances},
                      {"max_measured", c.max_measured},
                      {"bound", c.bound},
                      {"pass", c.pass}});
  }
  return {{"S", report.resolution},
          {"M", report.m},
          {"D", report.dimension},
          {"K", report.k},
          {"policies", report.policies},
          {"bucket_count", report.bucket_count},
          {"normalization", report.normalization},
          {"checks", checks}};
}

json ToJson(const VerificationReport& report) {
  json reports = json::array();
  for (const BoundReport& r : report.reports) reports.push_back(ToJson(r));
  json trend = json::array();
  for (const TrendRow& t : report.trend) {
    trend.push_back({{"S", t.resolution},
                     {"max_violating_mass", t.max_mass},
                     {"mean_violating_mass", t.mean_mass},
                     {"beta", t.beta}});
  }
  return {{"all_pass", report.all_pass()}, {"reports", reports}, {"trend", trend}};
}

json ToJson(const SolveResult& result) {
  json out = {{"value", result.value},
              {"status", StatusName(result.status)},
              {"gap", result.gap},
              {"bound", result.bound},
              {"root_bound", result.root_bound},
              {"nodes", result.nodes},
              {"wall_ms", result.wall_ms}};
  if (const auto* r = std::get_if<RegionPolicy>(&result.policy)) {
    out["policy"] = {{"type", "region"},
                     {"prices", r->grid().prices()},
                     {"region_prices", r->region_prices()},
                     {"default_price", r->default_price()},
                     {"default_price_value", r->grid().price(r->default_price())},
                     {"num_regions", r->arrangement().num_regions()}};
  } else if (const auto* g = std::get_if<GridPolicy>(&result.policy)) {
    out["policy"] = {{"type", "grid"},
                     {"prices", g->grid().prices()},
                     {"resolution", g->resolution()},
                     {"cells", g->cells()}};
  }
  return out;
}

std::string SampleToJsonText(const Sample& sample) {
  const SampleMeta& m = sample.meta();
  std::string out = "{\n  \"meta\": {\"distribution\": \"" + m.distribution +
                    "\", \"epsilon\": " + JoinReals(m.epsilon) +
                    ", \"seed\": " + std::to_string(m.seed) +
                    ", \"n\": " + std::to_string(sample.size()) +
                    ", \"dimension\": " + std::to_string(sample.dimension()) +
                    "},\n  \"buyers\": [\n";
  for (int i = 0; i < sample.size(); ++i) {
    const Buyer& b = sample.buyer(i);
    out += "    [" + JoinReals(b.lower) + ", " + JoinReals(b.upper) + ", " +
           FormatReal(b.valuation) + "]" + (i + 1 < sample.size() ? ",\n" : "\n");
  }
  return out + "  ]\n}\n";
}

Sample SampleFromJson(const json& j) {
  try {
    SampleMeta meta;
    if (j.contains("meta")) {
      const json& m = j.at("meta");
      meta.distribution = m.value("distribution", std::string("custom"));
      meta.epsilon = m.value("epsilon", std::vector<double>{});
      meta.seed = m.value("seed", uint64_t{0});
    }
    std::vector<Buyer> buyers;
    for (const json& row : j.at("buyers")) {
      Buyer b;
      b.lower = row.at(0).get<std::vector<double>>();
      b.upper = row.at(1).get<std::vector<double>>();
      b.valuation = row.at(2).get<double>();
      buyers.push_back(std::move(b));
    }
    return Sample(std::move(buyers), std::move(meta));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed sample file: ") + e.what());
  }
}

}  // namespace stratprice
