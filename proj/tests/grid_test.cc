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
#include <random>
#include <set>

#include "oracles.h"
#include "stratprice/distributions.h"
#include "stratprice/grid.h"

namespace stratprice {
namespace {

const PriceGrid kTwo({0.25, 0.75});

Bucket B1(int l, int m) { return Bucket{{l}, {m}}; }

std::set<CubeIndex> AsSet(const std::vector<CubeIndex>& v) { return {v.begin(), v.end()}; }

TEST(CubeIndexTest, Examples) {
  EXPECT_EQ(CubeCoordinate(0.0, 4), 1);
  EXPECT_EQ(CubeCoordinate(0.5, 4), 3);
  EXPECT_EQ(CubeCoordinate(1.0, 4), 4);
  EXPECT_EQ(CubeCoordinate(0.2499999, 4), 1);
  EXPECT_EQ(CubeCoordinate(0.25, 4), 2);
  EXPECT_THROW(CubeCoordinate(1.5, 4), std::invalid_argument);
  EXPECT_THROW(CubeCoordinate(-0.1, 4), std::invalid_argument);
}

TEST(CubeIndexTest, PartitionRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 1; s <= 17; ++s) {
    for (int t = 0; t < 200; ++t) {
      const double x = t < 2 ? t : u(rng);
      const int c = CubeCoordinate(x, s);
      ASSERT_GE(c, 1);
      ASSERT_LE(c, s);
      // x lies in [(c-1)/S, c/S), or in the closed last cell.
      EXPECT_LE((c - 1) / static_cast<double>(s), x);
      if (c < s) EXPECT_LT(x * s, c);
    }
  }
}

TEST(BucketTest, Examples) {
  EXPECT_EQ(BucketOf(Buyer{{0.1}, {0.6}, 0.5}, 4), B1(1, 3));
  EXPECT_EQ(BucketOf(Buyer{{1.0}, {1.0}, 0.5}, 4), B1(4, 4));
  const Bucket b = BucketOf(Buyer{{0.11, 0.4}, {0.29, 0.58}, 0.5}, 10);
  EXPECT_EQ(b.lambda, (CubeIndex{2, 5}));
  EXPECT_EQ(b.mu, (CubeIndex{3, 6}));
  EXPECT_EQ(b.min_gap(), 1);
}

TEST(BucketTest, Counts) {
  for (int s = 1; s <= 6; ++s) {
    for (int d = 1; d <= 2; ++d) {
      const int64_t expect = static_cast<int64_t>(std::pow(s * (s + 1) / 2, d));
      EXPECT_EQ(BucketCount(s, d), expect);
      const auto all = AllBuckets(s, d);
      EXPECT_EQ(static_cast<int64_t>(all.size()), expect);
      EXPECT_EQ(std::set<Bucket>(all.begin(), all.end()).size(), all.size());
    }
  }
}

TEST(RectCubesTest, Examples) {
  EXPECT_EQ(RectCubes({2, 3}, {6, 6}).size(), 20u);
  EXPECT_EQ(RectCubes({4, 1}, {4, 1}), (std::vector<CubeIndex>{{4, 1}}));
  EXPECT_THROW(RectCubes({3}, {2}), std::invalid_argument);
}

TEST(FaceCubesTest, Examples) {
  const Bucket fig{{2, 3}, {6, 6}};
  std::set<CubeIndex> expect;
  for (int a : {3, 4, 5}) {
    for (int b : {4, 5}) expect.insert({a, b});
  }
  EXPECT_EQ(AsSet(FaceCubes(fig, {0, 0})), expect);
  const Bucket small{{1, 1}, {2, 2}};
  EXPECT_EQ(FaceCubes(small, {1, 1}), (std::vector<CubeIndex>{{2, 2}}));
  EXPECT_TRUE(FaceCubes(small, {0, 0}).empty());
  EXPECT_THROW(FaceCubes(small, {2, 0}), std::invalid_argument);
}

TEST(FaceCubesTest, UnionIsRect) {
  for (int d = 1; d <= 2; ++d) {
    for (const Bucket& b : AllBuckets(4, d)) {
      std::set<CubeIndex> all;
      for (const FaceDirection& delta : AllDirections(d)) {
        for (const CubeIndex& c : FaceCubes(b, delta)) all.insert(c);
      }
      EXPECT_EQ(all, AsSet(RectCubes(b.lambda, b.mu)));
    }
  }
  EXPECT_EQ(AllDirections(2).size(), 9u);
}

TEST(RoundPolicyTest, Examples) {
  const GridPolicy already(4, 1, {0, 0, 1, 1}, kTwo);
  EXPECT_EQ(RoundPolicy(already, 2), GridPolicy(2, 1, {0, 1}, kTwo));
  EXPECT_EQ(RoundPolicy(GridPolicy(2, 1, {1, 0}, kTwo), 1), GridPolicy::Constant(1, 0, kTwo));
  EXPECT_EQ(RoundPolicy(GridPolicy(4, 1, {1, 0, 1, 1}, kTwo), 2), GridPolicy(2, 1, {0, 1}, kTwo));
  EXPECT_THROW(RoundPolicy(already, 3), std::invalid_argument);
}

TEST(RoundPolicyTest, Contract) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PriceGrid grid({0.1, 0.4, 0.7});
  for (int trial = 0; trial < 100; ++trial) {
    const int s = 1 + trial % 4, f = 1 + trial % 3, d = 1 + trial % 2;
    const GridPolicy p = testing::RandomGridPolicy(rng, s * f, d, grid);
    const GridPolicy t = RoundPolicy(p, s);
    EXPECT_EQ(t.resolution(), s);
    EXPECT_EQ(RoundPolicy(t, s), t);
    for (int q = 0; q < 30; ++q) {
      Point x(d);
      for (double& c : x) c = u(rng);
      EXPECT_LE(t.PriceIndexAt(x), p.PriceIndexAt(x));
    }
  }
}

// Independent violation test: probe lower/upper corners at every fine
// boundary and fine-cell midpoint inside the bucket's coarse cubes.
bool ViolatingByProbing(const GridPolicy& fine, int s, const Bucket& b) {
  const int dims = b.dimension();
  const int r = fine.resolution();
  const GridPolicy coarse = RoundPolicy(fine, s);
  std::vector<std::vector<double>> lo_axes(dims), hi_axes(dims);
  auto coords_in = [&](int cube) {
    std::vector<double> out;
    const int per = r / s;
    for (int j = 0; j < per; ++j) {
      const double a = static_cast<double>((cube - 1) * per + j) / r;
      out.push_back(a);
      out.push_back(a + 0.5 / r);
    }
    if (cube == s) out.push_back(1.0);
    return out;
  };
  for (int d = 0; d < dims; ++d) {
    lo_axes[d] = coords_in(b.lambda[d]);
    hi_axes[d] = coords_in(b.mu[d]);
  }
  const auto cuts = testing::GridCuts(r, dims);
  bool found = false;
  testing::ForEachProduct(lo_axes, [&](const Point& lo) {
    if (found) return;
    testing::ForEachProduct(hi_axes, [&](const Point& hi) {
      if (found) return;
      for (int d = 0; d < dims; ++d) {
        if (lo[d] > hi[d]) return;
      }
      const int m_fine = testing::ProbedMinIndex(fine, lo, hi, cuts);
      const int m_coarse = testing::ProbedMinIndex(coarse, lo, hi, cuts);
      if (m_fine > m_coarse) found = true;
    });
  });
  return found;
}

TEST(ViolatingBucketTest, Examples) {
  const GridPolicy p(4, 1, {0, 1, 1, 1}, kTwo);
  EXPECT_TRUE(IsViolatingBucket(p, 2, B1(1, 2)));
  EXPECT_FALSE(IsViolatingBucket(p, 2, B1(2, 2)));
  for (const Bucket& b : AllBuckets(2, 1)) {
    EXPECT_FALSE(IsViolatingBucket(GridPolicy(4, 1, {1, 1, 1, 1}, kTwo), 2, b));
  }
  EXPECT_THROW(IsViolatingBucket(p, 3, B1(1, 2)), std::invalid_argument);
}

TEST(ViolatingBucketTest, MatchesProbingOracle) {
  std::mt19937_64 rng(3);
  const PriceGrid grid({0.1, 0.4, 0.7});
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 2;
    const int s = 2 + trial % 2;
    const int f = d == 1 ? 2 + trial % 3 : 2;
    const GridPolicy p = testing::RandomGridPolicy(rng, s * f, d, grid);
    for (const Bucket& b : AllBuckets(s, d)) {
      EXPECT_EQ(IsViolatingBucket(p, s, b), ViolatingByProbing(p, s, b))
          << "trial " << trial;
    }
  }
}

bool InGe(const Bucket& b, int s, int m) {
  for (int d = 0; d < b.dimension(); ++d) {
    if (b.lambda[d] < 1 || b.mu[d] > s || b.mu[d] - b.lambda[d] < m) return false;
  }
  return true;
}

TEST(AnchorsTest, Examples) {
  EXPECT_EQ(Anchors(3, 1, {1}), (std::vector<Bucket>{B1(1, 2), B1(1, 3)}));
  EXPECT_EQ(Anchors(3, 1, {-1}), (std::vector<Bucket>{B1(1, 3), B1(2, 3)}));
  EXPECT_THROW(Anchors(3, 1, {0}), std::invalid_argument);
  EXPECT_THROW(Anchors(3, 3, {1}), std::invalid_argument);
}

TEST(AnchorsTest, DefinitionAndCount) {
  for (int d = 1; d <= 2; ++d) {
    for (int s = 2; s <= 5; ++s) {
      for (int m = 1; m < s; ++m) {
        for (const FaceDirection& delta : AllDirections(d)) {
          if (std::all_of(delta.begin(), delta.end(), [](int x) { return x == 0; })) continue;
          std::set<Bucket> expect;
          for (const Bucket& b : AllBuckets(s, d)) {
            if (!InGe(b, s, m)) continue;
            bool anchor = false;
            for (int k = 0; k < d; ++k) {
              anchor = anchor || (delta[k] == 1 && b.lambda[k] == 1) ||
                       (delta[k] == -1 && b.mu[k] == s);
            }
            if (anchor) expect.insert(b);
          }
          const auto got = Anchors(s, m, delta);
          EXPECT_EQ(std::set<Bucket>(got.begin(), got.end()), expect);
          EXPECT_LE(static_cast<double>(got.size()), d * std::pow(s, 2 * d - 1));
        }
      }
    }
  }
}

TEST(LineFromTest, Examples) {
  EXPECT_EQ(LineFrom(B1(1, 2), {1}, 3, 1), (std::vector<Bucket>{B1(1, 2), B1(2, 3)}));
  EXPECT_EQ(LineFrom(B1(1, 3), {-1}, 3, 1), (std::vector<Bucket>{B1(1, 3)}));
  EXPECT_THROW(LineFrom(B1(2, 3), {1}, 3, 1), std::invalid_argument);
}

TEST(LineFromTest, StepsAndCover) {
  for (int d = 1; d <= 2; ++d) {
    for (int s = 2; s <= 5; ++s) {
      for (int m = 1; m < s; ++m) {
        std::set<Bucket> ge;
        for (const Bucket& b : AllBuckets(s, d)) {
          if (InGe(b, s, m)) ge.insert(b);
        }
        for (const FaceDirection& delta : AllDirections(d)) {
          if (std::all_of(delta.begin(), delta.end(), [](int x) { return x == 0; })) continue;
          std::set<Bucket> covered;
          for (const Bucket& a : Anchors(s, m, delta)) {
            const auto line = LineFrom(a, delta, s, m);
            EXPECT_LE(static_cast<int>(line.size()), s);
            // Consecutive ι, all inside, and maximal.
            Bucket cur = a;
            for (const Bucket& b : line) {
              EXPECT_EQ(b, cur);
              EXPECT_TRUE(InGe(b, s, m));
              covered.insert(b);
              for (int k = 0; k < d; ++k) {
                cur.lambda[k] += delta[k];
                cur.mu[k] += delta[k];
              }
            }
            EXPECT_FALSE(InGe(cur, s, m));
          }
          EXPECT_EQ(covered, ge);
        }
      }
    }
  }
}

TEST(BucketObjectiveTest, ExamplesAndRecomposition) {
  const GridPolicy c = GridPolicy::Constant(1, 0, kTwo);
  const Sample one({Buyer{{0.1}, {0.2}, 0.5}});
  EXPECT_EQ(BucketConditionalObjective(c, one, 4, B1(3, 4)), 0.0);
  EXPECT_EQ(BucketConditionalObjective(c, one, 4, B1(1, 1)), 0.25);

  std::mt19937_64 rng(5);
  const PriceGrid grid({0.2, 0.5, 0.8});
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 2, s = 1 + trial % 4;
    const Sample sample = testing::RandomLatticeSample(rng, 8, d, 7, {0.1, 0.55, 0.9});
    const GridPolicy p = testing::RandomGridPolicy(rng, 2 * s, d, grid);
    std::map<Bucket, int> counts;
    for (const Buyer& b : sample.buyers()) ++counts[BucketOf(b, s)];
    double total = 0.0;
    for (const auto& [b, n] : counts) {
      total += static_cast<double>(n) / sample.size() *
               BucketConditionalObjective(p, sample, s, b);
    }
    EXPECT_NEAR(total, EmpiricalObjective(p, sample), 1e-12);
  }
}

TEST(BetaBoundTest, MatchesFormula) {
  // D/S (ceil(sqrt S) + (3^D - 1) 2 K S / ceil(sqrt S)).
  EXPECT_DOUBLE_EQ(BetaBound(4, 1, 2), 0.25 * (2 + 2.0 * 2 * 2 * 4 / 2));
  EXPECT_DOUBLE_EQ(BetaBound(9, 2, 3), 2.0 / 9 * (3 + 8.0 * 2 * 3 * 9 / 3));
  EXPECT_LT(BetaBound(1 << 20, 1, 2), BetaBound(1 << 10, 1, 2));
}

TEST(VerifyCombinatoricsTest, ConstantPoliciesPass) {
  std::vector<GridPolicy> policies = {GridPolicy::Constant(2, 0, kTwo),
                                      GridPolicy::Constant(2, 1, kTwo)};
  for (GridPolicy& p : policies) p = GridPolicy(6, 2, std::vector<int>(36, p.cells()[0]), kTwo);
  const BoundReport r = VerifyCombinatorics(3, 1, policies, 2);
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.find("violating_ratio").max_measured, 0.0);
  EXPECT_EQ(r.normalization, 81.0);
  EXPECT_EQ(r.bucket_count, 36);
  // At M=1 buckets with a unit gap have an empty interior face, whose
  // minimum is +inf, so only M=2 gives an empty directional set here.
  const BoundReport r2 = VerifyCombinatorics(3, 2, policies, 2);
  EXPECT_TRUE(r2.all_pass());
  EXPECT_EQ(r2.find("directional_count").max_measured, 0.0);
}

TEST(VerifyCombinatoricsTest, ExhaustiveSmall) {
  for (int s = 2; s <= 4; ++s) {
    std::vector<GridPolicy> all;
    const int cells = 2 * s;
    for (int mask = 0; mask < (1 << cells); ++mask) {
      std::vector<int> t(cells);
      for (int c = 0; c < cells; ++c) t[c] = mask >> c & 1;
      all.emplace_back(cells, 1, t, kTwo);
    }
    for (int m = 1; m < s; ++m) {
      const BoundReport r = VerifyCombinatorics(s, m, all, 2);
      for (const CheckResult& c : r.checks) {
        EXPECT_TRUE(c.pass) << c.check << " S=" << s << " M=" << m;
      }
      for (const char* name :
           {"necessary_condition", "anchor_count", "line_cover", "face_inclusion",
            "small_gap_count", "line_separation", "violating_ratio",
            "directional_count", "violating_decomposition"}) {
        EXPECT_NO_THROW(r.find(name)) << name;
      }
    }
  }
}

TEST(VerifyCombinatoricsTest, RandomTwoDimensional) {
  std::mt19937_64 rng(9);
  const PriceGrid grid({0.2, 0.5, 0.8});
  for (int s = 2; s <= 3; ++s) {
    std::vector<GridPolicy> ps;
    for (int i = 0; i < 20; ++i) ps.push_back(testing::RandomGridPolicy(rng, 2 * s, 2, grid));
    for (int m = 1; m < s; ++m) EXPECT_TRUE(VerifyCombinatorics(s, m, ps, 3).all_pass());
  }
}

TEST(VerifyCombinatoricsTest, Errors) {
  const std::vector<GridPolicy> ps = {GridPolicy(4, 1, {0, 1, 0, 1}, kTwo)};
  EXPECT_THROW(VerifyCombinatorics(2, 2, ps, 2), std::invalid_argument);
  EXPECT_THROW(VerifyCombinatorics(3, 1, ps, 2), std::invalid_argument);
  EXPECT_THROW(VerifyCombinatorics(2, 1, std::vector<GridPolicy>{}, 2), std::invalid_argument);
}

TEST(BucketProbabilityTest, Examples) {
  // Every buyer is the box [0.1,0.2]: one bucket at S=4.
  const BuyerSampler fixed = [](uint64_t, int64_t) { return Buyer{{0.1}, {0.2}, 0.5}; };
  EXPECT_EQ(BucketProbabilityEstimate(fixed, 4, B1(1, 1), 100, 1), 1.0);
  EXPECT_EQ(BucketProbabilityEstimate(fixed, 4, B1(2, 3), 100, 1), 0.0);
  EXPECT_THROW(BucketProbabilityEstimate(fixed, 4, B1(1, 1), 0, 1), std::invalid_argument);
}

TEST(BucketProbabilityTest, SumsToOneAndReproducible) {
  const BuyerSampler sampler = MakeSampler(DistributionSpec{"rect_uniform", {0.0, 0.0}});
  const auto probs = BucketProbabilities(sampler, 2, 20000, 77);
  double total = 0.0;
  for (const auto& [b, p] : probs) {
    total += p;
    EXPECT_EQ(b.lambda, b.mu);  // degenerate buyers
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(probs, BucketProbabilities(sampler, 2, 20000, 77));
  EXPECT_EQ(probs.at(Bucket{{1, 1}, {1, 1}}),
            BucketProbabilityEstimate(sampler, 2, Bucket{{1, 1}, {1, 1}}, 20000, 77));
}

}  // namespace
}  // namespace stratprice
