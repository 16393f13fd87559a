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

#include "stratprice/core.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "stratprice/grid.h"

namespace stratprice {
namespace {

bool InUnit(double x) { return x >= 0.0 && x <= 1.0; }

void CheckBox(const Point& lower, const Point& upper, int dimension) {
  if (static_cast<int>(lower.size()) != dimension ||
      static_cast<int>(upper.size()) != dimension) {
    throw std::invalid_argument("box dimension " +
                                std::to_string(lower.size()) +
                                " does not match policy dimension " +
                                std::to_string(dimension));
  }
  for (int d = 0; d < dimension; ++d) {
    if (!InUnit(lower[d]) || !InUnit(upper[d])) {
      throw std::invalid_argument("box coordinate outside [0,1]");
    }
    if (lower[d] > upper[d]) {
      throw std::invalid_argument("box lower exceeds upper");
    }
  }
}

}  // namespace

void ValidateBuyer(const Buyer& buyer) {
  if (buyer.lower.size() != buyer.upper.size() || buyer.lower.empty()) {
    throw std::invalid_argument("buyer bounds must share a positive dimension");
  }
  for (size_t d = 0; d < buyer.lower.size(); ++d) {
    if (!InUnit(buyer.lower[d]) || !InUnit(buyer.upper[d])) {
      throw std::invalid_argument("buyer coordinate outside [0,1]");
    }
    if (buyer.lower[d] > buyer.upper[d]) {
      throw std::invalid_argument("buyer lower exceeds upper in dimension " +
                                  std::to_string(d + 1));
    }
  }
  if (!InUnit(buyer.valuation)) {
    throw std::invalid_argument("buyer valuation outside [0,1]");
  }
}

Sample::Sample(std::vector<Buyer> buyers, SampleMeta meta)
    : buyers_(std::move(buyers)), meta_(std::move(meta)) {
  if (buyers_.empty()) throw std::invalid_argument("sample has no buyers");
  dimension_ = buyers_.front().dimension();
  for (const Buyer& b : buyers_) {
    ValidateBuyer(b);
    if (b.dimension() != dimension_) {
      throw std::invalid_argument("sample buyers disagree on dimension");
    }
  }
}

PriceGrid::PriceGrid(std::vector<double> prices) : prices_(std::move(prices)) {
  if (prices_.empty()) throw std::invalid_argument("price grid is empty");
  for (size_t k = 0; k < prices_.size(); ++k) {
    if (!(prices_[k] >= 0.0 && prices_[k] <= 1.0)) {
      throw std::invalid_argument("price outside [0,1]");
    }
    if (k > 0 && !(prices_[k - 1] < prices_[k])) {
      throw std::invalid_argument("prices must be strictly increasing");
    }
  }
}

std::optional<int> PriceGrid::LargestIndexAtMost(double value) const {
  auto it = std::upper_bound(prices_.begin(), prices_.end(), value);
  if (it == prices_.begin()) return std::nullopt;
  return static_cast<int>(it - prices_.begin()) - 1;
}

GridPolicy::GridPolicy(int resolution, int dimension, std::vector<int> cells,
                       PriceGrid grid)
    : resolution_(resolution),
      dimension_(dimension),
      cells_(std::move(cells)),
      grid_(std::move(grid)) {
  if (resolution_ < 1 || dimension_ < 1) {
    throw std::invalid_argument("grid policy needs S >= 1 and D >= 1");
  }
  int64_t expected = 1;
  for (int d = 0; d < dimension_; ++d) expected *= resolution_;
  if (static_cast<int64_t>(cells_.size()) != expected) {
    throw std::invalid_argument("grid policy must hold S^D cells");
  }
  for (int c : cells_) {
    if (c < 0 || c >= grid_.size()) {
      throw std::invalid_argument("grid policy cell price index out of range");
    }
  }
}

GridPolicy GridPolicy::Constant(int dimension, int price_index,
                                PriceGrid grid) {
  return GridPolicy(1, dimension, {price_index}, std::move(grid));
}

int64_t GridPolicy::FlatIndex(std::span<const int> cube) const {
  int64_t flat = 0;
  for (int d = dimension_ - 1; d >= 0; --d) {
    flat = flat * resolution_ + (cube[d] - 1);
  }
  return flat;
}

int GridPolicy::CellPrice(std::span<const int> cube) const {
  return cells_[FlatIndex(cube)];
}

int GridPolicy::PriceIndexAt(const Point& x) const {
  return CellPrice(CubeIndexOf(x, resolution_));
}

int GridPolicy::MinPriceIndexOverBox(const Point& lower,
                                     const Point& upper) const {
  const CubeIndex lo = CubeIndexOf(lower, resolution_);
  const CubeIndex hi = CubeIndexOf(upper, resolution_);
  CubeIndex cube = lo;
  int best = grid_.highest_index();
  // Odometer over Rect(lo, hi).
  while (true) {
    best = std::min(best, CellPrice(cube));
    if (best == 0) return 0;
    int d = 0;
    while (d < dimension_ && cube[d] == hi[d]) {
      cube[d] = lo[d];
      ++d;
    }
    if (d == dimension_) break;
    ++cube[d];
  }
  return best;
}

bool GridPolicy::operator==(const GridPolicy& other) const {
  return resolution_ == other.resolution_ &&
         dimension_ == other.dimension_ && cells_ == other.cells_ &&
         grid_.prices() == other.grid_.prices();
}

double MinPriceOverRect(const PricingPolicy& policy, const Point& lower,
                        const Point& upper) {
  CheckBox(lower, upper, policy.dimension());
  return policy.grid().price(policy.MinPriceIndexOverBox(lower, upper));
}

double Revenue(const PricingPolicy& policy, const Buyer& buyer) {
  const double m = MinPriceOverRect(policy, buyer.lower, buyer.upper);
  return m <= buyer.valuation ? m : 0.0;
}

double EmpiricalObjective(const PricingPolicy& policy, const Sample& sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  ExactRevenueSum sum;
  for (const Buyer& b : sample.buyers()) sum.Add(Revenue(policy, b));
  return sum.Mean(sample.size());
}

namespace {

// lo + (hi - lo)(j - 1)/K for j = 1..K, each raised by a few ulps where
// needed so that consecutive gaps and hi - t_K stay <= 1/K after rounding.
std::vector<double> Thresholds(double lo, double hi, int k) {
  std::vector<double> t(k);
  for (int j = 0; j < k; ++j) t[j] = lo + (hi - lo) * static_cast<double>(j) / k;
  const double step = 1.0 / k;
  for (int j = k - 1; j >= 1; --j) {
    const double upper = j == k - 1 ? hi : t[j + 1];
    while (upper - t[j] > step && t[j] < upper) t[j] = std::nextafter(t[j], upper);
  }
  return t;
}

}  // namespace

PriceGrid DiscretizePrices(double lo, double hi, int k) {
  if (k <= 0) throw std::invalid_argument("K must be positive");
  if (!(lo <= hi) || lo < 0.0 || hi > 1.0) {
    throw std::invalid_argument("price interval must satisfy 0 <= lo <= hi <= 1");
  }
  std::vector<double> prices;
  for (double p : Thresholds(lo, hi, k)) {
    if (prices.empty() || prices.back() < p) prices.push_back(p);
  }
  return PriceGrid(std::move(prices));
}

PriceGrid DiscretizePrices(std::span<const double> price_set, int k) {
  if (k <= 0) throw std::invalid_argument("K must be positive");
  if (price_set.empty()) throw std::invalid_argument("empty price set");
  std::vector<double> sorted(price_set.begin(), price_set.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.front() < 0.0 || sorted.back() > 1.0) {
    throw std::invalid_argument("price set must lie in [0,1]");
  }
  std::vector<double> prices;
  for (double threshold : Thresholds(sorted.front(), sorted.back(), k)) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), threshold);
    if (it == sorted.end()) it = std::prev(sorted.end());
    if (prices.empty() || prices.back() < *it) prices.push_back(*it);
  }
  return PriceGrid(std::move(prices));
}

GridPolicy RoundPricesDown(const GridPolicy& policy, const PriceGrid& grid) {
  std::vector<int> cells(policy.cells().size());
  for (size_t c = 0; c < cells.size(); ++c) {
    const double p = policy.grid().price(policy.cells()[c]);
    const std::optional<int> k = grid.LargestIndexAtMost(p);
    if (!k) {
      throw std::invalid_argument("policy price below the grid's lowest price");
    }
    cells[c] = *k;
  }
  return GridPolicy(policy.resolution(), policy.dimension(), std::move(cells),
                    grid);
}

__int128 ExactRevenueSum::Scale(double price) {
  // ldexp is exact; the conversion truncates only below 2^-100.
  return static_cast<__int128>(std::ldexp(price, 100));
}

double ExactRevenueSum::Mean(int64_t count) const {
  return ToMean(total_, count);
}

double ExactRevenueSum::ToMean(__int128 total, int64_t count) {
  const long double sum = std::ldexp(static_cast<long double>(total), -100);
  return static_cast<double>(sum / static_cast<long double>(count));
}

}  // namespace stratprice
