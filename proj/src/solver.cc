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

#include "stratprice/solver.h"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "multi_index.h"
#include "stratprice/grid.h"

namespace stratprice {
namespace {

using Clock = std::chrono::steady_clock;
using Scaled = __int128;

constexpr int64_t kBruteForceCap = 10'000'000;
constexpr int64_t kMaxGridCubes = int64_t{1} << 24;

// Regions and, per buyer, the regions it covers (ascending, no repeats).
struct CoverInstance {
  int num_regions = 0;
  std::vector<std::vector<int>> coverage;
  // Largest price index not above the valuation, -1 if none.
  std::vector<int> best;
};

std::vector<int> BestIndices(const Sample& sample, const PriceGrid& grid) {
  std::vector<int> best(sample.size());
  for (int i = 0; i < sample.size(); ++i) {
    best[i] = grid.LargestIndexAtMost(sample.buyer(i).valuation).value_or(-1);
  }
  return best;
}

std::vector<Scaled> ScaledPrices(const PriceGrid& grid) {
  std::vector<Scaled> out;
  for (double p : grid.prices()) out.push_back(ExactRevenueSum::Scale(p));
  return out;
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int Find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void Union(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

ReducedInstance Reduce(const CoverInstance& cover, int k, bool presolve) {
  const int n = static_cast<int>(cover.coverage.size());
  ReducedInstance red;
  red.num_regions = cover.num_regions;
  red.region_class.assign(cover.num_regions, -1);
  red.fixed_price.assign(cover.num_regions, -1);

  std::vector<bool> kept(n, true);
  if (presolve) {
    for (int i = 0; i < n; ++i) {
      if (cover.best[i] < 0) {
        kept[i] = false;
        red.dropped_buyers.push_back(i);
      }
    }
  }
  std::vector<std::vector<int>> sig(cover.num_regions);
  for (int i = 0; i < n; ++i) {
    if (!kept[i]) continue;
    for (int r : cover.coverage[i]) sig[r].push_back(i);
  }

  std::vector<int> all_prices(k);
  std::iota(all_prices.begin(), all_prices.end(), 0);
  if (!presolve) {
    for (int r = 0; r < cover.num_regions; ++r) {
      red.region_class[r] = r;
      red.class_domain.push_back(all_prices);
      red.class_buyers.push_back(sig[r]);
    }
    std::vector<int> everyone(n);
    std::iota(everyone.begin(), everyone.end(), 0);
    red.components.push_back(std::move(everyone));
    return red;
  }

  std::map<std::vector<int>, int> classes;
  for (int r = 0; r < cover.num_regions; ++r) {
    if (sig[r].empty()) {
      red.fixed_price[r] = k - 1;
      continue;
    }
    std::vector<int> domain;
    for (int i : sig[r]) domain.push_back(cover.best[i]);
    std::sort(domain.begin(), domain.end());
    domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
    if (domain.size() == 1) {
      red.fixed_price[r] = domain.front();
      continue;
    }
    auto [it, inserted] =
        classes.try_emplace(sig[r], static_cast<int>(red.class_domain.size()));
    if (inserted) {
      red.class_domain.push_back(std::move(domain));
      red.class_buyers.push_back(sig[r]);
    }
    red.region_class[r] = it->second;
  }

  UnionFind uf(n);
  for (const std::vector<int>& buyers : red.class_buyers) {
    for (size_t j = 1; j < buyers.size(); ++j) uf.Union(buyers[0], buyers[j]);
  }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) {
    if (kept[i]) groups[uf.Find(i)].push_back(i);
  }
  for (auto& [root, members] : groups) red.components.push_back(std::move(members));
  return red;
}

// Depth-first branch and bound over the classes of one component.
class ComponentSearch {
 public:
  ComponentSearch(const CoverInstance& cover, const ReducedInstance& red,
                  const std::vector<int>& buyers, const std::vector<Scaled>& price,
                  const SolveOptions& options, Clock::time_point start,
                  int64_t* nodes)
      : cover_(cover),
        red_(red),
        buyers_(buyers),
        price_(price),
        options_(options),
        start_(start),
        nodes_(nodes) {
    std::map<int, int> local;
    for (size_t j = 0; j < buyers_.size(); ++j) local[buyers_[j]] = static_cast<int>(j);
    fixed_min_.assign(buyers_.size(), INT_MAX);
    unassigned_.assign(buyers_.size(), 0);
    std::map<int, int> class_pos;
    std::vector<int> first_region;
    for (size_t j = 0; j < buyers_.size(); ++j) {
      for (int r : cover_.coverage[buyers_[j]]) {
        const int c = red_.region_class[r];
        if (c < 0) {
          fixed_min_[j] = std::min(fixed_min_[j], red_.fixed_price[r]);
          continue;
        }
        auto [it, inserted] =
            class_pos.try_emplace(c, static_cast<int>(classes_.size()));
        if (inserted) {
          classes_.push_back(c);
          first_region.push_back(r);
        } else {
          first_region[it->second] = std::min(first_region[it->second], r);
        }
      }
    }
    // A buyer may cover several regions of one class; count the class once.
    class_buyers_.resize(classes_.size());
    for (size_t t = 0; t < classes_.size(); ++t) {
      for (int i : red_.class_buyers[classes_[t]]) {
        const int j = local.at(i);
        class_buyers_[t].push_back(j);
        ++unassigned_[j];
      }
    }
    order_.resize(classes_.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](int a, int b) {
      if (class_buyers_[a].size() != class_buyers_[b].size()) {
        return class_buyers_[a].size() > class_buyers_[b].size();
      }
      return first_region[a] < first_region[b];
    });
    cur_min_ = fixed_min_;
    assign_.assign(classes_.size(), -1);
    for (size_t j = 0; j < buyers_.size(); ++j) bound_ += Contribution(j);
    root_bound_ = bound_;
  }

  void Run() {
    Dfs(0);
    if (incumbent_ < 0) {
      // Stopped before reaching a leaf: fall back to the highest prices.
      for (size_t t = 0; t < classes_.size(); ++t) {
        Apply(t, red_.class_domain[classes_[t]].back());
      }
      incumbent_ = bound_;
      best_assign_ = assign_;
    }
  }

  bool aborted() const { return aborted_; }
  Scaled incumbent() const { return incumbent_; }
  Scaled root_bound() const { return root_bound_; }
  Scaled proven_bound() const {
    return aborted_ ? std::max(incumbent_, open_bound_) : incumbent_;
  }
  // Chosen price per global class id handled here.
  void Export(std::vector<int>* class_price) const {
    for (size_t t = 0; t < classes_.size(); ++t) {
      (*class_price)[classes_[t]] = best_assign_[t];
    }
  }

 private:
  Scaled Contribution(size_t j) const {
    const int best = cover_.best[buyers_[j]];
    if (unassigned_[j] == 0) {
      return cur_min_[j] <= best ? price_[cur_min_[j]] : 0;
    }
    return best < 0 ? 0 : price_[std::min(cur_min_[j], best)];
  }

  void Apply(size_t t, int value) {
    assign_[t] = value;
    for (int j : class_buyers_[t]) {
      bound_ -= Contribution(j);
      trail_.push_back(cur_min_[j]);
      cur_min_[j] = std::min(cur_min_[j], value);
      --unassigned_[j];
      bound_ += Contribution(j);
    }
  }

  void Undo(size_t t) {
    for (auto it = class_buyers_[t].rbegin(); it != class_buyers_[t].rend(); ++it) {
      const int j = *it;
      bound_ -= Contribution(j);
      ++unassigned_[j];
      cur_min_[j] = trail_.back();
      trail_.pop_back();
      bound_ += Contribution(j);
    }
    assign_[t] = -1;
  }

  bool LimitHit() {
    if (options_.node_limit > 0 && *nodes_ >= options_.node_limit) return true;
    if (options_.time_limit_ms > 0 && (*nodes_ & 1023) == 0) {
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          Clock::now() - start_);
      if (elapsed.count() >= options_.time_limit_ms) return true;
    }
    return false;
  }

  void Dfs(size_t depth) {
    if (depth == order_.size()) {
      if (bound_ > incumbent_) {
        incumbent_ = bound_;
        best_assign_ = assign_;
      }
      return;
    }
    const size_t t = order_[depth];
    const std::vector<int>& domain = red_.class_domain[classes_[t]];
    const Scaled entry_bound = bound_;
    for (size_t v = 0; v < domain.size(); ++v) {
      if (aborted_ || LimitHit()) {
        aborted_ = true;
        open_bound_ = std::max(open_bound_, entry_bound);
        return;
      }
      ++*nodes_;
      Apply(t, domain[v]);
      if (bound_ > incumbent_) Dfs(depth + 1);
      Undo(t);
    }
  }

  const CoverInstance& cover_;
  const ReducedInstance& red_;
  const std::vector<int>& buyers_;
  const std::vector<Scaled>& price_;
  const SolveOptions& options_;
  Clock::time_point start_;
  int64_t* nodes_;

  std::vector<int> classes_;
  std::vector<std::vector<int>> class_buyers_;
  std::vector<int> order_;
  std::vector<int> fixed_min_;
  std::vector<int> cur_min_;
  std::vector<int> unassigned_;
  std::vector<int> trail_;
  std::vector<int> assign_;
  std::vector<int> best_assign_;
  Scaled bound_ = 0;
  Scaled root_bound_ = 0;
  Scaled incumbent_ = -1;
  Scaled open_bound_ = 0;
  bool aborted_ = false;
};

struct CoverSolution {
  std::vector<int> region_price;
  Scaled value = 0;
  Scaled bound = 0;
  Scaled root_bound = 0;
  bool aborted = false;
  int64_t nodes = 0;
};

CoverSolution SolveCover(const CoverInstance& cover, const PriceGrid& grid,
                         const SolveOptions& options, Clock::time_point start) {
  if (options.time_limit_ms < 0 || options.node_limit < 0 ||
      options.target_gap < 0) {
    throw std::invalid_argument("solver limits must be nonnegative");
  }
  if (options.branch_rule != "size_then_id") {
    throw std::invalid_argument("unknown branch rule " + options.branch_rule);
  }
  const std::vector<Scaled> price = ScaledPrices(grid);
  const ReducedInstance red = Reduce(cover, grid.size(), options.presolve);
  std::vector<int> class_price(red.class_domain.size(), -1);
  CoverSolution sol;
  for (const std::vector<int>& component : red.components) {
    ComponentSearch search(cover, red, component, price, options, start,
                           &sol.nodes);
    search.Run();
    search.Export(&class_price);
    sol.value += search.incumbent();
    sol.bound += search.proven_bound();
    sol.root_bound += search.root_bound();
    sol.aborted = sol.aborted || search.aborted();
  }
  sol.region_price.resize(cover.num_regions);
  for (int r = 0; r < cover.num_regions; ++r) {
    const int c = red.region_class[r];
    sol.region_price[r] = c < 0 ? red.fixed_price[r] : class_price[c];
  }
  return sol;
}

double Millis(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void FillStatus(const CoverSolution& sol, int n, SolveResult* out) {
  out->value = ExactRevenueSum::ToMean(sol.value, n);
  out->bound = ExactRevenueSum::ToMean(sol.bound, n);
  out->root_bound = ExactRevenueSum::ToMean(sol.root_bound, n);
  out->nodes = sol.nodes;
  if (sol.aborted && sol.bound > sol.value) {
    out->status = SolveStatus::kFeasibleWithGap;
    out->gap = (out->bound - out->value) / std::max(out->value, 1e-9);
  } else {
    out->status = SolveStatus::kOptimal;
    out->gap = 0.0;
  }
}

CoverInstance ArrangementCover(const Arrangement& arrangement,
                               const Sample& sample, const PriceGrid& grid) {
  CoverInstance cover;
  cover.num_regions = arrangement.num_regions();
  cover.coverage.resize(sample.size());
  for (int i = 0; i < sample.size(); ++i) cover.coverage[i] = arrangement.coverage(i);
  cover.best = BestIndices(sample, grid);
  return cover;
}

std::string Coef(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string StatusName(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kFeasibleWithGap:
      return "feasible_with_gap";
    case SolveStatus::kInfeasibleInput:
      return "infeasible_input";
  }
  return "unknown";
}

const PricingPolicy* SolveResult::pricing_policy() const {
  if (const auto* r = std::get_if<RegionPolicy>(&policy)) return r;
  if (const auto* g = std::get_if<GridPolicy>(&policy)) return g;
  return nullptr;
}

double PerBuyerUpperBound(const Sample& sample, const PriceGrid& grid) {
  if (sample.empty()) return 0.0;
  ExactRevenueSum sum;
  for (const Buyer& b : sample.buyers()) {
    if (std::optional<int> k = grid.LargestIndexAtMost(b.valuation)) {
      sum.Add(grid.price(*k));
    }
  }
  return sum.Mean(sample.size());
}

SolveResult SolveSaa(const Sample& sample, const PriceGrid& grid,
                     const SolveOptions& options) {
  if (sample.empty()) return SolveResult{};
  return SolveSaa(std::make_shared<const Arrangement>(Arrangement::Build(sample)),
                  sample, grid, options);
}

SolveResult SolveSaa(std::shared_ptr<const Arrangement> arrangement,
                     const Sample& sample, const PriceGrid& grid,
                     const SolveOptions& options) {
  const auto start = Clock::now();
  SolveResult out;
  if (sample.empty()) return out;
  const CoverInstance cover = ArrangementCover(*arrangement, sample, grid);
  const CoverSolution sol = SolveCover(cover, grid, options, start);
  out.policy = RegionPolicy(std::move(arrangement), sol.region_price,
                            grid.highest_index(), grid);
  FillStatus(sol, sample.size(), &out);
  out.wall_ms = Millis(start);
  return out;
}

SolveResult BruteForceSaa(const Sample& sample, const PriceGrid& grid) {
  const auto start = Clock::now();
  SolveResult out;
  if (sample.empty()) return out;
  auto arrangement = std::make_shared<const Arrangement>(Arrangement::Build(sample));
  const int regions = arrangement->num_regions();
  const int k = grid.size();
  int64_t total = 1;
  for (int r = 0; r < regions; ++r) {
    total *= k;
    if (total > kBruteForceCap) {
      throw std::length_error("brute force needs K^R <= 10^7");
    }
  }
  const CoverInstance cover = ArrangementCover(*arrangement, sample, grid);
  const std::vector<Scaled> price = ScaledPrices(grid);
  std::vector<int> assign(regions, 0);
  std::vector<int> best_assign = assign;
  Scaled best_value = -1;
  for (int64_t step = 0; step < total; ++step) {
    Scaled value = 0;
    for (int i = 0; i < sample.size(); ++i) {
      int m = INT_MAX;
      for (int r : cover.coverage[i]) m = std::min(m, assign[r]);
      if (m <= cover.best[i]) value += price[m];
    }
    if (value > best_value) {
      best_value = value;
      best_assign = assign;
    }
    for (int r = 0; r < regions; ++r) {
      if (++assign[r] < k) break;
      assign[r] = 0;
    }
  }
  out.policy = RegionPolicy(std::move(arrangement), best_assign,
                            grid.highest_index(), grid);
  out.value = ExactRevenueSum::ToMean(best_value, sample.size());
  out.bound = out.value;
  out.root_bound = PerBuyerUpperBound(sample, grid);
  out.status = SolveStatus::kOptimal;
  out.nodes = total;
  out.wall_ms = Millis(start);
  return out;
}

SolveResult SolveGridRestricted(const Sample& sample, const PriceGrid& grid,
                                int resolution, const SolveOptions& options) {
  const auto start = Clock::now();
  if (resolution < 1) throw std::invalid_argument("S must be positive");
  SolveResult out;
  if (sample.empty()) return out;
  const int dims = sample.dimension();
  int64_t cells = 1;
  for (int d = 0; d < dims; ++d) {
    cells *= resolution;
    if (cells > kMaxGridCubes) throw std::length_error("S^D too large");
  }
  std::vector<int> extent(dims, resolution);
  std::map<int64_t, int> region_of_cell;
  std::vector<std::vector<int64_t>> cell_lists(sample.size());
  std::vector<int> lo(dims), hi(dims);
  for (int i = 0; i < sample.size(); ++i) {
    const Bucket b = BucketOf(sample.buyer(i), resolution);
    for (int d = 0; d < dims; ++d) {
      lo[d] = b.lambda[d] - 1;
      hi[d] = b.mu[d] - 1;
    }
    internal::ForEachInBox(lo, hi, [&](const std::vector<int>& c) {
      const int64_t flat = internal::Flatten(c, extent);
      cell_lists[i].push_back(flat);
      region_of_cell.emplace(flat, 0);
      return true;
    });
  }
  int next = 0;
  std::vector<int64_t> cell_of_region;
  for (auto& [flat, id] : region_of_cell) {
    id = next++;
    cell_of_region.push_back(flat);
  }
  CoverInstance cover;
  cover.num_regions = next;
  cover.coverage.resize(sample.size());
  for (int i = 0; i < sample.size(); ++i) {
    for (int64_t flat : cell_lists[i]) cover.coverage[i].push_back(region_of_cell[flat]);
    std::sort(cover.coverage[i].begin(), cover.coverage[i].end());
  }
  cover.best = BestIndices(sample, grid);
  const CoverSolution sol = SolveCover(cover, grid, options, start);
  std::vector<int> prices(cells, grid.highest_index());
  for (int r = 0; r < next; ++r) prices[cell_of_region[r]] = sol.region_price[r];
  out.policy = GridPolicy(resolution, dims, std::move(prices), grid);
  FillStatus(sol, sample.size(), &out);
  out.wall_ms = Millis(start);
  return out;
}

ReducedInstance Presolve(const Arrangement& arrangement, const Sample& sample,
                         const PriceGrid& grid) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  return Reduce(ArrangementCover(arrangement, sample, grid), grid.size(), true);
}

MilpSize MilpModelSize(const Sample& sample, const PriceGrid& grid,
                       const Arrangement& arrangement) {
  const int64_t n = sample.size();
  const int64_t k = grid.size();
  const int64_t r = arrangement.num_regions();
  int64_t links = 0;
  for (int i = 0; i < n; ++i) links += static_cast<int64_t>(arrangement.coverage(i).size());
  return {n * k + r * k, n * k + k * links + n * k + r + n};
}

std::string ExportMilp(const Sample& sample, const PriceGrid& grid,
                       const Arrangement& arrangement) {
  const int n = sample.size();
  const int k = grid.size();
  const int regions = arrangement.num_regions();
  auto b = [](int i, int kk) {
    return "b_" + std::to_string(i + 1) + "_" + std::to_string(kk + 1);
  };
  auto l = [](int r, int kk) {
    return "l_" + std::to_string(r + 1) + "_" + std::to_string(kk + 1);
  };
  std::string out = "\\ empirical revenue maximization over arrangement regions\n";
  out += "Maximize\n obj:";
  for (int i = 0; i < n; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      out += (i == 0 && kk == 0 ? " " : " + ") + Coef(grid.price(kk) / n) + " " +
             b(i, kk);
    }
  }
  out += "\nSubject To\n";
  for (int i = 0; i < n; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const bool affordable = grid.price(kk) <= sample.buyer(i).valuation;
      out += " cap_" + std::to_string(i + 1) + "_" + std::to_string(kk + 1) +
             ": " + b(i, kk) + " <= " + (affordable ? "1" : "0") + "\n";
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      for (int r : arrangement.coverage(i)) {
        out += " minlink_" + std::to_string(i + 1) + "_" +
               std::to_string(kk + 1) + "_" + std::to_string(r + 1) + ": " +
               b(i, kk);
        for (int kappa = kk; kappa < k; ++kappa) out += " - " + l(r, kappa);
        out += " <= 0\n";
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      out += " cover_" + std::to_string(i + 1) + "_" + std::to_string(kk + 1) +
             ": " + b(i, kk);
      for (int r : arrangement.coverage(i)) out += " - " + l(r, kk);
      out += " <= 0\n";
    }
  }
  for (int r = 0; r < regions; ++r) {
    out += " assign_" + std::to_string(r + 1) + ":";
    for (int kk = 0; kk < k; ++kk) out += (kk == 0 ? " " : " + ") + l(r, kk);
    out += " = 1\n";
  }
  for (int i = 0; i < n; ++i) {
    out += " single_" + std::to_string(i + 1) + ":";
    for (int kk = 0; kk < k; ++kk) out += (kk == 0 ? " " : " + ") + b(i, kk);
    out += " <= 1\n";
  }
  out += "Binary\n";
  for (int i = 0; i < n; ++i) {
    for (int kk = 0; kk < k; ++kk) out += " " + b(i, kk) + "\n";
  }
  for (int r = 0; r < regions; ++r) {
    for (int kk = 0; kk < k; ++kk) out += " " + l(r, kk) + "\n";
  }
  out += "End\n";
  return out;
}

}  // namespace stratprice
