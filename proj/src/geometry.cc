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

#include "stratprice/geometry.h"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

#include "multi_index.h"

namespace stratprice {
namespace {

constexpr int64_t kMaxCells = int64_t{1} << 26;
constexpr int64_t kMaxPieceTable = int64_t{1} << 22;

// Inclusive range [first, last] of positions in `pieces` (sorted piece ids)
// whose piece lies within [lo_piece, hi_piece].
std::pair<int, int> PieceSpan(const std::vector<int>& pieces, int lo_piece,
                              int hi_piece) {
  auto first = std::lower_bound(pieces.begin(), pieces.end(), lo_piece);
  auto last = std::upper_bound(pieces.begin(), pieces.end(), hi_piece);
  return {static_cast<int>(first - pieces.begin()),
          static_cast<int>(last - pieces.begin()) - 1};
}

bool Contains(const Buyer& box, const Point& x) {
  for (size_t d = 0; d < x.size(); ++d) {
    if (x[d] < box.lower[d] || x[d] > box.upper[d]) return false;
  }
  return true;
}

}  // namespace

Arrangement Arrangement::Build(const Sample& sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  Arrangement a;
  a.dimension_ = sample.dimension();
  a.boxes_ = sample.buyers();
  const int dims = a.dimension_;
  const int n = sample.size();

  // Per dimension: breakpoints and the pieces used as elementary cell sides.
  a.breakpoints_.resize(dims);
  std::vector<std::vector<int>> elements(dims);
  for (int d = 0; d < dims; ++d) {
    std::vector<double>& bp = a.breakpoints_[d];
    bp = {0.0, 1.0};
    for (const Buyer& b : a.boxes_) {
      bp.push_back(b.lower[d]);
      bp.push_back(b.upper[d]);
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    std::vector<bool> degenerate_at(bp.size(), false);
    for (const Buyer& b : a.boxes_) {
      if (b.lower[d] == b.upper[d]) {
        degenerate_at[a.PieceIndex(d, b.lower[d]) / 2] = true;
      }
    }
    for (size_t j = 0; j < bp.size(); ++j) {
      if (degenerate_at[j]) elements[d].push_back(2 * static_cast<int>(j));
      if (j + 1 < bp.size()) elements[d].push_back(2 * static_cast<int>(j) + 1);
    }
  }

  std::vector<int> extent(dims);
  int64_t total = 1;
  for (int d = 0; d < dims; ++d) {
    extent[d] = static_cast<int>(elements[d].size());
    total *= extent[d];
    if (total > kMaxCells) {
      throw std::length_error("arrangement has too many elementary cells");
    }
  }

  // Boxes are visited in index order, so every cell list comes out sorted.
  std::vector<std::vector<int>> cell_boxes(total);
  std::vector<int> lo(dims), hi(dims);
  for (int i = 0; i < n; ++i) {
    const Buyer& b = a.boxes_[i];
    for (int d = 0; d < dims; ++d) {
      auto [first, last] = PieceSpan(elements[d], a.PieceIndex(d, b.lower[d]),
                                     a.PieceIndex(d, b.upper[d]));
      lo[d] = first;
      hi[d] = last;
    }
    internal::ForEachInBox(lo, hi, [&](const std::vector<int>& idx) {
      cell_boxes[internal::Flatten(idx, extent)].push_back(i);
      return true;
    });
  }

  // Lexicographic sweep (dimension 1 most significant) assigns region ids.
  std::vector<int> idx(dims, 0);
  for (int64_t visited = 0; visited < total; ++visited) {
    std::vector<int>& sig = cell_boxes[internal::Flatten(idx, extent)];
    if (!sig.empty()) {
      ++a.elementary_cells_;
      auto [it, inserted] =
          a.by_signature_.try_emplace(sig, static_cast<int>(a.regions_.size()));
      if (inserted) {
        Region r;
        r.id = it->second;
        r.signature = sig;
        r.member_set = sig;
        r.representative.resize(dims);
        for (int d = 0; d < dims; ++d) {
          r.representative[d] = a.PieceRepresentative(d, elements[d][idx[d]]);
        }
        a.regions_.push_back(std::move(r));
      }
      Region& r = a.regions_[it->second];
      ++r.cell_count;
      double volume = 1.0;
      for (int d = 0; d < dims; ++d) {
        const int piece = elements[d][idx[d]];
        if (piece % 2 == 0) {
          volume = 0.0;
          break;
        }
        volume *= a.breakpoints_[d][piece / 2 + 1] - a.breakpoints_[d][piece / 2];
      }
      r.volume += volume;
    }
    for (int d = dims - 1; d >= 0; --d) {
      if (++idx[d] < extent[d]) break;
      idx[d] = 0;
    }
  }

  a.coverage_.assign(n, {});
  for (const Region& r : a.regions_) {
    for (int i : r.signature) a.coverage_[i].push_back(r.id);
  }
  return a;
}

int Arrangement::PieceIndex(int d, double x) const {
  const std::vector<double>& bp = breakpoints_.at(d);
  auto it = std::lower_bound(bp.begin(), bp.end(), x);
  if (it == bp.end() || (it == bp.begin() && *it != x)) {
    throw std::invalid_argument("coordinate outside [0,1]");
  }
  const int j = static_cast<int>(it - bp.begin());
  return *it == x ? 2 * j : 2 * (j - 1) + 1;
}

double Arrangement::PieceRepresentative(int d, int piece) const {
  const std::vector<double>& bp = breakpoints_.at(d);
  if (piece % 2 == 0) return bp.at(piece / 2);
  return 0.5 * (bp.at(piece / 2) + bp.at(piece / 2 + 1));
}

std::vector<int> Arrangement::ContainmentAt(const Point& x) const {
  std::vector<int> sig;
  for (int i = 0; i < num_buyers(); ++i) {
    if (Contains(boxes_[i], x)) sig.push_back(i);
  }
  return sig;
}

std::optional<int> Arrangement::RegionWithSignature(
    const std::vector<int>& sig) const {
  auto it = by_signature_.find(sig);
  if (it == by_signature_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Arrangement::RegionAt(const Point& x) const {
  return RegionWithSignature(ContainmentAt(x));
}

std::vector<int> RegionsCovering(const Arrangement& arrangement, int buyer) {
  if (buyer < 0 || buyer >= arrangement.num_buyers()) {
    throw std::out_of_range("buyer id " + std::to_string(buyer) +
                            " out of range");
  }
  return arrangement.coverage(buyer);
}

Point RepresentativePoint(const Arrangement& arrangement, int region) {
  if (region < 0 || region >= arrangement.num_regions()) {
    throw std::out_of_range("region id " + std::to_string(region) +
                            " out of range");
  }
  return arrangement.region(region).representative;
}

RegionPolicy::RegionPolicy(std::shared_ptr<const Arrangement> arrangement,
                           std::vector<int> region_prices, int default_price,
                           PriceGrid grid)
    : arrangement_(std::move(arrangement)),
      region_prices_(std::move(region_prices)),
      default_price_(default_price),
      grid_(std::move(grid)) {
  if (!arrangement_) throw std::invalid_argument("null arrangement");
  if (static_cast<int>(region_prices_.size()) != arrangement_->num_regions()) {
    throw std::invalid_argument("need exactly one price per region");
  }
  for (int p : region_prices_) {
    if (p < 0 || p >= grid_.size()) {
      throw std::invalid_argument("region price index out of range");
    }
  }
  if (default_price_ < 0 || default_price_ >= grid_.size()) {
    throw std::invalid_argument("default price index out of range");
  }
  int64_t total = 1;
  for (int d = 0; d < arrangement_->dimension(); ++d) {
    piece_extent_.push_back(arrangement_->piece_count(d));
    total *= piece_extent_.back();
  }
  if (total <= kMaxPieceTable) piece_levels_ = PieceLevels();
}

int RegionPolicy::PriceIndexAt(const Point& x) const {
  if (!piece_levels_.empty()) {
    std::vector<int> piece(x.size());
    for (size_t d = 0; d < x.size(); ++d) {
      piece[d] = arrangement_->PieceIndex(static_cast<int>(d), x[d]);
    }
    return piece_levels_[internal::Flatten(piece, piece_extent_)];
  }
  const std::optional<int> r = arrangement_->RegionAt(x);
  return r ? region_prices_[*r] : default_price_;
}

int RegionPolicy::MinPriceIndexOverBox(const Point& lower,
                                       const Point& upper) const {
  const Arrangement& a = *arrangement_;
  const int dims = a.dimension();
  std::vector<int> lo(dims), hi(dims);
  for (int d = 0; d < dims; ++d) {
    lo[d] = a.PieceIndex(d, lower[d]);
    hi[d] = a.PieceIndex(d, upper[d]);
  }
  int best = grid_.highest_index();
  if (!piece_levels_.empty()) {
    internal::ForEachInBox(lo, hi, [&](const std::vector<int>& piece) {
      best = std::min(best,
                      piece_levels_[internal::Flatten(piece, piece_extent_)]);
      return best > 0;
    });
    return best;
  }
  Point x(dims);
  internal::ForEachInBox(lo, hi, [&](const std::vector<int>& piece) {
    for (int d = 0; d < dims; ++d) x[d] = a.PieceRepresentative(d, piece[d]);
    best = std::min(best, PriceIndexAt(x));
    return best > 0;
  });
  return best;
}

std::vector<int> RegionPolicy::PieceLevels() const {
  const Arrangement& a = *arrangement_;
  const int dims = a.dimension();
  std::vector<int> extent(dims);
  int64_t total = 1;
  for (int d = 0; d < dims; ++d) {
    extent[d] = a.piece_count(d);
    total *= extent[d];
    if (total > kMaxCells) throw std::length_error("piece table too large");
  }
  // Boxes visited in index order keep every piece list sorted.
  std::vector<std::vector<int>> piece_boxes(total);
  std::vector<int> lo(dims), hi(dims);
  for (int i = 0; i < a.num_buyers(); ++i) {
    const Buyer& b = a.box(i);
    for (int d = 0; d < dims; ++d) {
      lo[d] = a.PieceIndex(d, b.lower[d]);
      hi[d] = a.PieceIndex(d, b.upper[d]);
    }
    internal::ForEachInBox(lo, hi, [&](const std::vector<int>& idx) {
      piece_boxes[internal::Flatten(idx, extent)].push_back(i);
      return true;
    });
  }
  std::vector<int> levels(total, default_price_);
  for (int64_t f = 0; f < total; ++f) {
    if (piece_boxes[f].empty()) continue;
    if (std::optional<int> r = a.RegionWithSignature(piece_boxes[f])) {
      levels[f] = region_prices_[*r];
    }
  }
  return levels;
}

RegionPolicy RoundPricesDown(const RegionPolicy& policy,
                             const PriceGrid& grid) {
  auto round = [&](int index) {
    const std::optional<int> k =
        grid.LargestIndexAtMost(policy.grid().price(index));
    if (!k) {
      throw std::invalid_argument("policy price below the grid's lowest price");
    }
    return *k;
  };
  std::vector<int> prices;
  prices.reserve(policy.region_prices().size());
  for (int p : policy.region_prices()) prices.push_back(round(p));
  return RegionPolicy(policy.shared_arrangement(), std::move(prices),
                      round(policy.default_price()), grid);
}

}  // namespace stratprice
