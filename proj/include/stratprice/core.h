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

// Domain types and the strategic revenue semantics.
//
// A buyer reveals any feature vector inside its closed box [lower, upper] and
// therefore pays the minimum price the policy offers over that box; it buys
// iff that minimum does not exceed its valuation.

#ifndef STRATPRICE_CORE_H_
#define STRATPRICE_CORE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stratprice {

using Point = std::vector<double>;

struct Buyer {
  Point lower;
  Point upper;
  double valuation = 0.0;

  int dimension() const { return static_cast<int>(lower.size()); }
  bool degenerate() const { return lower == upper; }
};

// Throws std::invalid_argument unless lower <= upper componentwise and every
// coordinate and the valuation lie in [0,1].
void ValidateBuyer(const Buyer& buyer);

struct SampleMeta {
  std::string distribution = "custom";
  std::vector<double> epsilon;
  uint64_t seed = 0;
};

// An ordered, nonempty list of buyers sharing one dimension. A
// default-constructed Sample is empty and is only meaningful as "no input".
class Sample {
 public:
  Sample() = default;
  explicit Sample(std::vector<Buyer> buyers, SampleMeta meta = {});

  const std::vector<Buyer>& buyers() const { return buyers_; }
  const Buyer& buyer(int i) const { return buyers_.at(i); }
  int size() const { return static_cast<int>(buyers_.size()); }
  bool empty() const { return buyers_.empty(); }
  int dimension() const { return dimension_; }
  const SampleMeta& meta() const { return meta_; }

 private:
  std::vector<Buyer> buyers_;
  SampleMeta meta_;
  int dimension_ = 0;
};

// Finite strictly increasing price list inside [0,1]. A zero lowest price is
// accepted so that grids built by DiscretizePrices over sets containing 0 are
// representable.
class PriceGrid {
 public:
  explicit PriceGrid(std::vector<double> prices);

  int size() const { return static_cast<int>(prices_.size()); }
  double price(int k) const { return prices_.at(k); }
  const std::vector<double>& prices() const { return prices_; }
  int highest_index() const { return size() - 1; }

  // Largest k with price(k) <= value; ties resolve to the largest index.
  std::optional<int> LargestIndexAtMost(double value) const;

 private:
  std::vector<double> prices_;
};

// Interface shared by every piecewise-constant policy class. Prices are
// referenced by index into grid().
class PricingPolicy {
 public:
  virtual ~PricingPolicy() = default;

  virtual int dimension() const = 0;
  virtual const PriceGrid& grid() const = 0;
  virtual int PriceIndexAt(const Point& x) const = 0;
  // Exact minimum price index over the closed box [lower, upper].
  virtual int MinPriceIndexOverBox(const Point& lower,
                                   const Point& upper) const = 0;
};

// A policy constant on each cube H_S(sigma) of the width-1/S grid. Cells are
// stored densely with dimension 1 varying fastest.
class GridPolicy final : public PricingPolicy {
 public:
  GridPolicy(int resolution, int dimension, std::vector<int> cells,
             PriceGrid grid);

  static GridPolicy Constant(int dimension, int price_index, PriceGrid grid);

  int resolution() const { return resolution_; }
  int dimension() const override { return dimension_; }
  const PriceGrid& grid() const override { return grid_; }
  const std::vector<int>& cells() const { return cells_; }
  int64_t cell_count() const { return static_cast<int64_t>(cells_.size()); }

  // `cube` holds 1-based cube coordinates.
  int64_t FlatIndex(std::span<const int> cube) const;
  int CellPrice(std::span<const int> cube) const;

  int PriceIndexAt(const Point& x) const override;
  int MinPriceIndexOverBox(const Point& lower,
                           const Point& upper) const override;

  bool operator==(const GridPolicy& other) const;

 private:
  int resolution_;
  int dimension_;
  std::vector<int> cells_;
  PriceGrid grid_;
};

// The policy's minimum price over [lower, upper]. Throws on dimension
// mismatch or coordinates outside [0,1].
double MinPriceOverRect(const PricingPolicy& policy, const Point& lower,
                        const Point& upper);

double Revenue(const PricingPolicy& policy, const Buyer& buyer);

// (1/N) sum of revenues, accumulated exactly so that equal objective values
// compare equal bit for bit. Throws on an empty sample.
double EmpiricalObjective(const PricingPolicy& policy, const Sample& sample);

// Lower-anchored discretization of a closed price set: p_k is the smallest
// member at or above lo + (hi - lo)(k-1)/K. Duplicates collapse, so fewer than
// K prices may come back.
PriceGrid DiscretizePrices(double lo, double hi, int k);
PriceGrid DiscretizePrices(std::span<const double> price_set, int k);

// Replaces every cell price with the largest grid price not above it. Throws
// if some policy price lies below the grid's lowest price.
GridPolicy RoundPricesDown(const GridPolicy& policy, const PriceGrid& grid);

// Exact accumulation of prices in [0,1]: prices are held as integers scaled by
// 2^100, which is lossless for every double >= 2^-48.
class ExactRevenueSum {
 public:
  static __int128 Scale(double price);

  void Add(double price) { total_ += Scale(price); }
  void AddScaled(__int128 scaled) { total_ += scaled; }
  __int128 total() const { return total_; }
  double Mean(int64_t count) const;

  static double ToMean(__int128 total, int64_t count);

 private:
  __int128 total_ = 0;
};

}  // namespace stratprice

#endif  // STRATPRICE_CORE_H_
