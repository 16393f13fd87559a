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

// Exact maximization of the empirical revenue.
//
// Both solvers work on a "cover instance": a set of regions, each buyer
// covering a list of them. A buyer pays the lowest price among its regions
// when that price does not exceed its valuation. For the unrestricted problem
// the regions are the arrangement regions; for the grid-restricted problem
// they are the hypercubes met by some buyer box.

#ifndef STRATPRICE_SOLVER_H_
#define STRATPRICE_SOLVER_H_

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "stratprice/core.h"
#include "stratprice/geometry.h"

namespace stratprice {

struct SolveOptions {
  // 0 disables the limit.
  int64_t time_limit_ms = 60000;
  int64_t node_limit = 0;
  // Not used for pruning (the search is exact); callers compare it with the
  // reported gap when a limit was hit.
  double target_gap = 0.005;
  // "size_then_id" is the only rule.
  std::string branch_rule = "size_then_id";
  bool presolve = true;
};

enum class SolveStatus { kOptimal, kFeasibleWithGap, kInfeasibleInput };

std::string StatusName(SolveStatus status);

struct SolveResult {
  double value = 0.0;
  std::variant<std::monostate, RegionPolicy, GridPolicy> policy;
  SolveStatus status = SolveStatus::kInfeasibleInput;
  double gap = 0.0;
  // Best proven upper bound on the optimum.
  double bound = 0.0;
  // Sum of per-buyer optimistic revenues before any branching.
  double root_bound = 0.0;
  int64_t nodes = 0;
  double wall_ms = 0.0;

  const PricingPolicy* pricing_policy() const;
};

// (1/N) sum_i max{p in grid : p <= V^i}, 0 for buyers below every price.
double PerBuyerUpperBound(const Sample& sample, const PriceGrid& grid);

SolveResult SolveSaa(const Sample& sample, const PriceGrid& grid,
                     const SolveOptions& options = {});
SolveResult SolveSaa(std::shared_ptr<const Arrangement> arrangement,
                     const Sample& sample, const PriceGrid& grid,
                     const SolveOptions& options = {});

// Exhaustive enumeration of every region price assignment. Throws
// std::length_error when K^R exceeds 10^7.
SolveResult BruteForceSaa(const Sample& sample, const PriceGrid& grid);

// Optimum over policies constant on each width-1/S hypercube.
SolveResult SolveGridRestricted(const Sample& sample, const PriceGrid& grid,
                                int resolution,
                                const SolveOptions& options = {});

// Safe reductions applied before branching:
//  * buyers with valuation below p_1 never pay and are dropped;
//  * regions left with no buyer are fixed to p_K;
//  * regions with identical remaining buyer sets are merged;
//  * a region only ever needs a price equal to the best affordable price of
//    one of its buyers, so its domain shrinks to those values and a single
//    value fixes it;
//  * buyers linked only through fixed regions split into independent
//    components.
struct ReducedInstance {
  int num_regions = 0;
  // Per original region: its merged class, or -1 when fixed.
  std::vector<int> region_class;
  // Per original region: the fixed price index, or -1 when free.
  std::vector<int> fixed_price;
  // Per class: allowed price indices, ascending, and the buyers it touches.
  std::vector<std::vector<int>> class_domain;
  std::vector<std::vector<int>> class_buyers;
  std::vector<int> dropped_buyers;
  // Kept buyers grouped by component.
  std::vector<std::vector<int>> components;
};

ReducedInstance Presolve(const Arrangement& arrangement, const Sample& sample,
                         const PriceGrid& grid);

struct MilpSize {
  int64_t variables = 0;
  int64_t constraints = 0;
};

// The linearized model in LP text format.
std::string ExportMilp(const Sample& sample, const PriceGrid& grid,
                       const Arrangement& arrangement);
// Counts implied by the model, for checking an export.
MilpSize MilpModelSize(const Sample& sample, const PriceGrid& grid,
                       const Arrangement& arrangement);

}  // namespace stratprice

#endif  // STRATPRICE_SOLVER_H_
