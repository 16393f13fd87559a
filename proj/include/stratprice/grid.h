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

// Hypercube partition of [0,1]^D at resolution S, buckets of buyers, faces,
// anchors and lines, plus a verifier for the counting bounds built on them.
//
// Cube coordinates are 1-based. Cell sigma in dimension d is the half-open
// interval [(sigma-1)/S, sigma/S), except the last one which is closed.

#ifndef STRATPRICE_GRID_H_
#define STRATPRICE_GRID_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stratprice/core.h"

namespace stratprice {

using CubeIndex = std::vector<int>;

// Components in {-1, 0, 1}.
using FaceDirection = std::vector<int>;

struct Bucket {
  CubeIndex lambda;
  CubeIndex mu;

  int dimension() const { return static_cast<int>(lambda.size()); }
  // min_d (mu_d - lambda_d).
  int min_gap() const;

  auto operator<=>(const Bucket&) const = default;
};

// min(floor(x*S)+1, S). Throws std::invalid_argument outside [0,1].
int CubeCoordinate(double x, int resolution);
CubeIndex CubeIndexOf(const Point& x, int resolution);

Bucket BucketOf(const Buyer& buyer, int resolution);

// Every cube of the box lambda..mu, dimension 1 fastest. Throws unless
// lambda <= mu.
std::vector<CubeIndex> RectCubes(const CubeIndex& lambda, const CubeIndex& mu);

// Cubes pinned to lambda where delta=-1, to mu where delta=+1, and strictly
// between where delta=0. Possibly empty.
std::vector<CubeIndex> FaceCubes(const Bucket& bucket,
                                 const FaceDirection& delta);

// All 3^D directions in odometer order, zero included.
std::vector<FaceDirection> AllDirections(int dimension);

// All buckets lambda <= mu, lexicographic with lambda then mu.
std::vector<Bucket> AllBuckets(int resolution, int dimension);
// Exact number of buckets, (S(S+1)/2)^D.
int64_t BucketCount(int resolution, int dimension);

// Coarse policy at resolution S whose cell price is the minimum over the
// fine cells it contains. Throws unless S divides the policy's resolution.
GridPolicy RoundPolicy(const GridPolicy& policy, int resolution);

// Whether some buyer mapped to `bucket` earns strictly more under the policy
// than under RoundPolicy(policy, resolution).
bool IsViolatingBucket(const GridPolicy& policy, int resolution,
                       const Bucket& bucket);

// Buckets with min gap >= M that touch the boundary in a direction of delta.
std::vector<Bucket> Anchors(int resolution, int m, const FaceDirection& delta);

// anchor, anchor + (delta, delta), ... while the shift stays inside the grid.
// Throws unless `anchor` is a delta-anchor.
std::vector<Bucket> LineFrom(const Bucket& anchor, const FaceDirection& delta,
                             int resolution, int m);

// Mean revenue over the buyers mapped to `bucket`; 0 for an empty bucket.
double BucketConditionalObjective(const PricingPolicy& policy,
                                  const Sample& sample, int resolution,
                                  const Bucket& bucket);

// (D/S)(ceil(sqrt S) + (3^D - 1) 2KS / ceil(sqrt S)).
double BetaBound(int resolution, int dimension, int k);

struct CheckResult {
  std::string check;
  int64_t instances = 0;
  double max_measured = 0.0;
  double bound = 0.0;
  bool pass = true;
};

struct BoundReport {
  int resolution = 0;
  int m = 0;
  int dimension = 0;
  int k = 0;
  int64_t policies = 0;
  int64_t bucket_count = 0;
  // S^{2D}, the normalization used by the ratio check.
  double normalization = 0.0;
  std::vector<CheckResult> checks;

  bool all_pass() const;
  const CheckResult& find(const std::string& name) const;
};

// Runs every counting and inclusion check for each policy. Checks whose
// "measured" value is a failure count have bound 0. Throws on M outside
// [1, S-1], an empty policy list, or a resolution mismatch.
BoundReport VerifyCombinatorics(int resolution, int m,
                                std::span<const GridPolicy> policies, int k);

// Draw `draw` of a reproducible buyer stream keyed by `seed`.
using BuyerSampler = std::function<Buyer(uint64_t seed, int64_t draw)>;

double BucketProbabilityEstimate(const BuyerSampler& sampler, int resolution,
                                 const Bucket& bucket, int64_t draws,
                                 uint64_t seed);

// Frequencies of every bucket hit at least once.
std::map<Bucket, double> BucketProbabilities(const BuyerSampler& sampler,
                                             int resolution, int64_t draws,
                                             uint64_t seed);

}  // namespace stratprice

#endif  // STRATPRICE_GRID_H_
