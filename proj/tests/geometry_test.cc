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

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <set>

#include "oracles.h"
#include "stratprice/geometry.h"

namespace stratprice {
namespace {

using Sig = std::vector<int>;

Buyer Box1(double lo, double hi, double v) { return Buyer{{lo}, {hi}, v}; }

std::set<Sig> Signatures(const Arrangement& a) {
  std::set<Sig> out;
  for (const Region& r : a.regions()) out.insert(r.signature);
  return out;
}

Sample Overlap() { return Sample({Box1(0.1, 0.4, 0.83), Box1(0.3, 0.6, 0.65)}); }
Sample Disjoint() { return Sample({Box1(0.1, 0.2, 0.5), Box1(0.5, 0.6, 0.5)}); }

// Volume of the union of boxes by inclusion-exclusion over buyer subsets.
double UnionVolume(const Sample& s) {
  const int n = s.size();
  double total = 0.0;
  for (int mask = 1; mask < (1 << n); ++mask) {
    double vol = 1.0;
    for (int d = 0; d < s.dimension(); ++d) {
      double lo = 0.0, hi = 1.0;
      for (int i = 0; i < n; ++i) {
        if (mask >> i & 1) {
          lo = std::max(lo, s.buyer(i).lower[d]);
          hi = std::min(hi, s.buyer(i).upper[d]);
        }
      }
      vol *= std::max(0.0, hi - lo);
    }
    total += (__builtin_popcount(mask) % 2 ? 1.0 : -1.0) * vol;
  }
  return total;
}

TEST(ArrangementTest, DisjointBoxes) {
  const Arrangement a = Arrangement::Build(Disjoint());
  EXPECT_EQ(Signatures(a), (std::set<Sig>{{0}, {1}}));
  EXPECT_EQ(a.breakpoints(0), (std::vector<double>{0.0, 0.1, 0.2, 0.5, 0.6, 1.0}));
}

TEST(ArrangementTest, OverlappingBoxes) {
  const Arrangement a = Arrangement::Build(Overlap());
  EXPECT_EQ(Signatures(a), (std::set<Sig>{{0}, {0, 1}, {1}}));
}

TEST(ArrangementTest, DistinctPointsGiveSingletons) {
  std::vector<Buyer> buyers;
  for (int i = 0; i < 7; ++i) {
    const double x = 0.1 * i + 0.05;
    buyers.push_back(Buyer{{x, 1.0 - x}, {x, 1.0 - x}, 0.5});
  }
  const Arrangement a = Arrangement::Build(Sample(buyers));
  EXPECT_EQ(a.num_regions(), 7);
  for (const Region& r : a.regions()) EXPECT_EQ(r.signature.size(), 1u);
}

TEST(ArrangementTest, CoverageExamples) {
  const Arrangement a = Arrangement::Build(Overlap());
  std::set<Sig> cov0;
  for (int r : RegionsCovering(a, 0)) cov0.insert(a.region(r).signature);
  EXPECT_EQ(cov0, (std::set<Sig>{{0}, {0, 1}}));

  const Arrangement b = Arrangement::Build(Disjoint());
  ASSERT_EQ(RegionsCovering(b, 1).size(), 1u);
  EXPECT_EQ(b.region(RegionsCovering(b, 1)[0]).signature, Sig{1});
  EXPECT_THROW(RegionsCovering(b, 2), std::out_of_range);
  EXPECT_THROW(RepresentativePoint(b, 5), std::out_of_range);
}

TEST(ArrangementTest, RepresentativeExamples) {
  const Arrangement a = Arrangement::Build(Overlap());
  const auto id = a.RegionWithSignature({0, 1});
  ASSERT_TRUE(id.has_value());
  const Point x = RepresentativePoint(a, *id);
  EXPECT_GT(x[0], 0.3);
  EXPECT_LT(x[0], 0.4);

  const Arrangement p = Arrangement::Build(Sample({Buyer{{0.2, 0.7}, {0.2, 0.7}, 0.5}}));
  EXPECT_EQ(RepresentativePoint(p, 0), (Point{0.2, 0.7}));
}

TEST(ArrangementTest, IdenticalBoxesShareRegions) {
  const Arrangement a =
      Arrangement::Build(Sample({Box1(0.2, 0.5, 0.3), Box1(0.2, 0.5, 0.9)}));
  EXPECT_EQ(Signatures(a), (std::set<Sig>{{0, 1}}));
  EXPECT_EQ(a.num_buyers(), 2);
}

class RandomArrangementTest : public ::testing::TestWithParam<int> {};

TEST_P(RandomArrangementTest, StructuralInvariants) {
  const int dims = GetParam();
  std::mt19937_64 rng(100 + dims);
  const PriceGrid grid({0.2, 0.5, 0.8});
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 1 + trial % 6;
    const Sample s = testing::RandomLatticeSample(rng, n, dims, 5 + trial % 4,
                                                  {0.3, 0.6, 0.9});
    const Arrangement a = Arrangement::Build(s);

    // Signatures distinct and nonempty; ids dense.
    std::set<Sig> seen;
    for (int r = 0; r < a.num_regions(); ++r) {
      const Region& reg = a.region(r);
      EXPECT_EQ(reg.id, r);
      EXPECT_FALSE(reg.signature.empty());
      EXPECT_TRUE(seen.insert(reg.signature).second);
      EXPECT_EQ(reg.member_set, reg.signature);
      // Representative lies in exactly the member boxes.
      EXPECT_EQ(testing::Containing(s, reg.representative), reg.member_set);
    }

    // Coverage is the set of regions whose signature holds the buyer.
    for (int i = 0; i < n; ++i) {
      std::vector<int> expect;
      for (const Region& reg : a.regions()) {
        if (std::binary_search(reg.signature.begin(), reg.signature.end(), i)) {
          expect.push_back(reg.id);
        }
      }
      EXPECT_EQ(RegionsCovering(a, i), expect);
    }

    // Every containment atom whose set is a signature maps back to it, and
    // every signature is a containment atom.
    const auto atoms = testing::ContainmentAtoms(s);
    for (const Sig& sig : seen) {
      EXPECT_NE(std::find(atoms.begin(), atoms.end(), sig), atoms.end());
    }

    // Volumes add up to the union volume.
    double vol = 0.0;
    for (const Region& reg : a.regions()) vol += reg.volume;
    EXPECT_NEAR(vol, UnionVolume(s), 1e-12);

    double cap = 1.0;
    for (int d = 0; d < dims; ++d) cap *= 2 * n + 1;
    EXPECT_LE(a.num_regions(), a.elementary_cell_count());
    EXPECT_LE(static_cast<double>(a.elementary_cell_count()), cap);

    // Box minimum of a random region policy: coverage minimum, and point
    // probing, agree.
    std::uniform_int_distribution<int> level(0, grid.size() - 1);
    std::vector<int> prices(a.num_regions());
    for (int& p : prices) p = level(rng);
    auto shared = std::make_shared<const Arrangement>(a);
    const RegionPolicy policy(shared, prices, grid.highest_index(), grid);
    const auto cuts = testing::SampleCuts(s);
    for (int i = 0; i < n; ++i) {
      int cov_min = grid.highest_index();
      for (int r : a.coverage(i)) cov_min = std::min(cov_min, prices[r]);
      const Buyer& b = s.buyer(i);
      EXPECT_EQ(policy.MinPriceIndexOverBox(b.lower, b.upper), cov_min);
      EXPECT_EQ(testing::ProbedMinIndex(policy, b.lower, b.upper, cuts), cov_min);
    }
    // Arbitrary boxes, not only buyer boxes.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int q = 0; q < 5; ++q) {
      Point lo(dims), hi(dims);
      for (int d = 0; d < dims; ++d) {
        const double x = u(rng), y = u(rng);
        lo[d] = std::min(x, y);
        hi[d] = std::max(x, y);
      }
      EXPECT_EQ(policy.MinPriceIndexOverBox(lo, hi),
                testing::ProbedMinIndex(policy, lo, hi, cuts));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, RandomArrangementTest, ::testing::Values(1, 2, 3));

TEST(RegionPolicyTest, DefaultPriceOutsideAllBoxes) {
  auto a = std::make_shared<const Arrangement>(Arrangement::Build(Overlap()));
  const PriceGrid grid({0.65, 0.83});
  const RegionPolicy p(a, std::vector<int>(a->num_regions(), 0), 1, grid);
  EXPECT_EQ(p.PriceIndexAt({0.9}), 1);
  EXPECT_EQ(p.PriceIndexAt({0.35}), 0);
  EXPECT_EQ(p.MinPriceIndexOverBox({0.7}, {1.0}), 1);
  EXPECT_EQ(p.MinPriceIndexOverBox({0.5}, {1.0}), 0);
  EXPECT_THROW(RegionPolicy(a, {0}, 1, grid), std::invalid_argument);
  EXPECT_THROW(RegionPolicy(a, std::vector<int>(a->num_regions(), 0), 2, grid),
               std::invalid_argument);
}

TEST(RegionPolicyTest, RoundPricesDown) {
  auto a = std::make_shared<const Arrangement>(Arrangement::Build(Overlap()));
  const PriceGrid fine({0.3, 0.55, 0.9});
  const PriceGrid coarse({0.25, 0.5, 0.75});
  const RegionPolicy p(a, {0, 1, 2}, 2, fine);
  const RegionPolicy q = RoundPricesDown(p, coarse);
  EXPECT_EQ(q.region_prices(), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(q.default_price(), 2);
  EXPECT_THROW(RoundPricesDown(p, PriceGrid({0.4})), std::invalid_argument);
}

TEST(RegionPolicyTest, PieceLevelsMatchPointQueries) {
  std::mt19937_64 rng(7);
  const PriceGrid grid({0.2, 0.5, 0.8});
  for (int trial = 0; trial < 40; ++trial) {
    const Sample s = testing::RandomLatticeSample(rng, 4, 2, 6, {0.5});
    auto a = std::make_shared<const Arrangement>(Arrangement::Build(s));
    std::vector<int> prices(a->num_regions());
    for (int& p : prices) p = static_cast<int>(rng() % 3);
    const RegionPolicy policy(a, prices, 2, grid);
    const std::vector<int> levels = policy.PieceLevels();
    const int p0 = a->piece_count(0), p1 = a->piece_count(1);
    ASSERT_EQ(static_cast<int>(levels.size()), p0 * p1);
    for (int j = 0; j < p1; ++j) {
      for (int i = 0; i < p0; ++i) {
        const Point x = {a->PieceRepresentative(0, i), a->PieceRepresentative(1, j)};
        EXPECT_EQ(a->PieceIndex(0, x[0]), i);
        EXPECT_EQ(levels[i + p0 * j], policy.PriceIndexAt(x));
      }
    }
  }
}

}  // namespace
}  // namespace stratprice
