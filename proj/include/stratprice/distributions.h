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

// Buyer distributions, a counter-based random stream, and Monte Carlo
// evaluation of a policy's expected revenue.

#ifndef STRATPRICE_DISTRIBUTIONS_H_
#define STRATPRICE_DISTRIBUTIONS_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stratprice/core.h"
#include "stratprice/grid.h"

namespace stratprice {

// Stateless generator: value(counter) = splitmix64 finalizer applied to
// key + counter * golden_gamma, where key mixes (seed, stream). Any counter
// can be evaluated independently, so draws shard without shared state.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream);

  uint64_t Bits(uint64_t counter) const;
  // Uniform on [0,1) with 53 random bits.
  double Uniform(uint64_t counter) const;

 private:
  uint64_t key_;
};

uint64_t Mix64(uint64_t x);

// Stable seed for (master, label, N, replication): splitmix64 chaining over
// master, the FNV-1a hash of label, N and replication.
uint64_t DeriveSeed(uint64_t master, std::string_view label, int64_t n,
                    int64_t replication);

struct DistributionSpec {
  // "rect_uniform", "example1" or "circle".
  std::string id = "rect_uniform";
  // Two components for rect_uniform, one for circle, none for example1.
  std::vector<double> epsilon = {0.0, 0.0};
  Point center = {0.5, 0.5};
  double radius = 0.25;

  int dimension() const { return id == "example1" ? 1 : 2; }
};

// Throws std::invalid_argument for an unknown id or an inadmissible epsilon.
void ValidateSpec(const DistributionSpec& spec);

// Buyer number `draw` of the stream keyed by `seed`.
Buyer DrawBuyer(const DistributionSpec& spec, uint64_t seed, int64_t draw);

Sample DrawSample(const DistributionSpec& spec, int n, uint64_t seed);
Sample SampleRectExperiment(int n, const std::vector<double>& epsilon,
                            uint64_t seed);
Sample SampleExample1(int n, uint64_t seed);
Sample SampleCircle(int n, double epsilon, uint64_t seed);

BuyerSampler MakeSampler(const DistributionSpec& spec);

struct EvalResult {
  double mean = 0.0;
  // 1.96 sample standard deviations of the mean.
  double ci_half_width = 0.0;
  int64_t draws = 0;
};

// Monte Carlo estimate of the expected revenue over fresh buyers.
EvalResult EstimateTrueObjective(const PricingPolicy& policy,
                                 const DistributionSpec& spec, int64_t draws,
                                 uint64_t seed);

// Exact box-minimum queries through per-level prefix counts; falls back to
// the policy's own query for other policy classes.
class BoxMinOracle {
 public:
  explicit BoxMinOracle(const PricingPolicy& policy);
  ~BoxMinOracle();
  BoxMinOracle(const BoxMinOracle&) = delete;
  BoxMinOracle& operator=(const BoxMinOracle&) = delete;

  int MinPriceIndex(const Point& lower, const Point& upper) const;
  double Revenue(const Buyer& buyer) const;

 private:
  struct Field;
  const PricingPolicy& policy_;
  std::unique_ptr<Field> field_;
};

// Fast EmpiricalObjective for large policies; same exact accumulation.
double FastEmpiricalObjective(const PricingPolicy& policy, const Sample& sample);

// [0,1]^2 split into square_count^2 squares. In squares with (i+j+phase)
// even the four corner sub-squares of side corner_fraction/square_count get
// low_index; everything else gets high_index. The grid resolution is
// square_count * q for the smallest q making corner_fraction * q integral.
GridPolicy CheckerboardPolicy(int square_count, double corner_fraction,
                              int low_index, int high_index, int phase,
                              const PriceGrid& grid);

}  // namespace stratprice

#endif  // STRATPRICE_DISTRIBUTIONS_H_
