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

// Arrangement of the buyer boxes of a sample.
//
// Each dimension is coordinate-compressed on the distinct box endpoints plus
// 0 and 1. With breakpoints c_0 < ... < c_m, the line decomposes into
// "pieces" numbered 0..2m: piece 2j is the point {c_j} and piece 2j+1 the
// open interval (c_j, c_{j+1}). Every closed box built from breakpoints is a
// contiguous piece range in every dimension.
//
// Regions are built from elementary cells: products of open-interval pieces,
// plus the point piece at c_j whenever some buyer is degenerate at c_j in that
// dimension. Cells with the same nonempty set of containing boxes form one
// region. Lower-dimensional boundary sets are not separate regions: any price
// they could carry can be pushed onto an adjacent cell whose containing set is
// a subset, so the empirical optimum is unchanged.

#ifndef STRATPRICE_GEOMETRY_H_
#define STRATPRICE_GEOMETRY_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "stratprice/core.h"

namespace stratprice {

struct Region {
  int id = 0;
  // Sorted 0-based buyer indices whose boxes contain the region's cells.
  std::vector<int> signature;
  // Buyers whose box contains the whole region. Equal to `signature` for
  // regions built from cell interiors; kept separately because the MILP
  // export is written in terms of it.
  std::vector<int> member_set;
  Point representative;
  int cell_count = 0;
  // Lebesgue measure of the region's full-dimensional cells.
  double volume = 0.0;
};

class Arrangement {
 public:
  static Arrangement Build(const Sample& sample);

  int dimension() const { return dimension_; }
  int num_buyers() const { return static_cast<int>(boxes_.size()); }
  int num_regions() const { return static_cast<int>(regions_.size()); }
  int64_t elementary_cell_count() const { return elementary_cells_; }

  const std::vector<double>& breakpoints(int d) const {
    return breakpoints_.at(d);
  }
  const std::vector<Region>& regions() const { return regions_; }
  const Buyer& box(int buyer) const { return boxes_.at(buyer); }
  const Region& region(int id) const { return regions_.at(id); }
  // Region ids whose cells lie inside buyer `buyer`'s box, ascending.
  const std::vector<int>& coverage(int buyer) const {
    return coverage_.at(buyer);
  }

  // Piece index of coordinate x in dimension d (see file comment).
  int PieceIndex(int d, double x) const;
  int piece_count(int d) const {
    return 2 * static_cast<int>(breakpoints_[d].size()) - 1;
  }
  // A coordinate inside the piece: the point itself or the interval midpoint.
  double PieceRepresentative(int d, int piece) const;

  // Sorted indices of boxes containing x.
  std::vector<int> ContainmentAt(const Point& x) const;
  // The region whose signature equals ContainmentAt(x), if any.
  std::optional<int> RegionAt(const Point& x) const;
  std::optional<int> RegionWithSignature(const std::vector<int>& sig) const;

 private:
  int dimension_ = 0;
  std::vector<Buyer> boxes_;
  std::vector<std::vector<double>> breakpoints_;
  std::vector<Region> regions_;
  std::vector<std::vector<int>> coverage_;
  std::map<std::vector<int>, int> by_signature_;
  int64_t elementary_cells_ = 0;
};

// Throws std::out_of_range for a bad buyer id.
std::vector<int> RegionsCovering(const Arrangement& arrangement, int buyer);

// Throws std::out_of_range for a bad region id.
Point RepresentativePoint(const Arrangement& arrangement, int region);

// A policy constant on each arrangement region. A point whose containing set
// is not a region signature (including points outside every box) gets
// `default_price`.
class RegionPolicy final : public PricingPolicy {
 public:
  RegionPolicy(std::shared_ptr<const Arrangement> arrangement,
               std::vector<int> region_prices, int default_price,
               PriceGrid grid);

  const Arrangement& arrangement() const { return *arrangement_; }
  std::shared_ptr<const Arrangement> shared_arrangement() const {
    return arrangement_;
  }
  const std::vector<int>& region_prices() const { return region_prices_; }
  int default_price() const { return default_price_; }

  int dimension() const override { return arrangement_->dimension(); }
  const PriceGrid& grid() const override { return grid_; }
  int PriceIndexAt(const Point& x) const override;
  int MinPriceIndexOverBox(const Point& lower,
                           const Point& upper) const override;

  // Price index of every piece product, dimension 1 fastest. Used by the
  // evaluator to answer box queries without re-deriving containment.
  std::vector<int> PieceLevels() const;

 private:
  std::shared_ptr<const Arrangement> arrangement_;
  std::vector<int> region_prices_;
  int default_price_;
  PriceGrid grid_;
  std::vector<int> piece_extent_;
  // Empty when the piece product is too large to tabulate.
  std::vector<int> piece_levels_;
};

RegionPolicy RoundPricesDown(const RegionPolicy& policy, const PriceGrid& grid);

}  // namespace stratprice

#endif  // STRATPRICE_GEOMETRY_H_
