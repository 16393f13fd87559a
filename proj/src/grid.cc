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

#include "stratprice/grid.h"

#include <algorithm>
#include <climits>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

#include "multi_index.h"

namespace stratprice {
namespace {

constexpr int kInfinity = INT_MAX;

int64_t IntPow(int64_t base, int exp) {
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void CheckDirection(const FaceDirection& delta) {
  for (int x : delta) {
    if (x < -1 || x > 1) throw std::invalid_argument("direction outside {-1,0,1}");
  }
}

bool IsZero(const FaceDirection& delta) {
  return std::all_of(delta.begin(), delta.end(), [](int x) { return x == 0; });
}

void CheckM(int resolution, int m) {
  if (m < 1 || m > resolution - 1) {
    throw std::invalid_argument("M must lie in [1, S-1]");
  }
}

// Per-dimension face range [lo, hi], 1-based; lo > hi means empty.
std::pair<int, int> FaceRange(const Bucket& b, const FaceDirection& delta,
                              int d) {
  if (delta[d] == -1) return {b.lambda[d], b.lambda[d]};
  if (delta[d] == 1) return {b.mu[d], b.mu[d]};
  return {b.lambda[d] + 1, b.mu[d] - 1};
}

// Minimum coarse price index over a face; kInfinity when the face is empty.
int FaceMin(const GridPolicy& coarse, const Bucket& b,
            const FaceDirection& delta) {
  const int dims = b.dimension();
  std::vector<int> lo(dims), hi(dims);
  for (int d = 0; d < dims; ++d) std::tie(lo[d], hi[d]) = FaceRange(b, delta, d);
  int best = kInfinity;
  internal::ForEachInBox(lo, hi, [&](const std::vector<int>& cube) {
    best = std::min(best, coarse.CellPrice(cube));
    return true;
  });
  return best;
}

int BoxMin(const GridPolicy& policy, std::span<const int> lo,
           std::span<const int> hi) {
  int best = kInfinity;
  internal::ForEachInBox(lo, hi, [&](const std::vector<int>& cube) {
    best = std::min(best, policy.CellPrice(cube));
    return best > 0;
  });
  return best;
}

bool InsideGrid(const Bucket& b, int resolution) {
  for (int d = 0; d < b.dimension(); ++d) {
    if (b.lambda[d] < 1 || b.mu[d] > resolution) return false;
  }
  return true;
}

Bucket Shift(const Bucket& b, const FaceDirection& delta, int iota) {
  Bucket s = b;
  for (int d = 0; d < b.dimension(); ++d) {
    s.lambda[d] += iota * delta[d];
    s.mu[d] += iota * delta[d];
  }
  return s;
}

bool IsAnchor(const Bucket& b, const FaceDirection& delta, int resolution) {
  for (int d = 0; d < b.dimension(); ++d) {
    if (delta[d] == 1 && b.lambda[d] == 1) return true;
    if (delta[d] == -1 && b.mu[d] == resolution) return true;
  }
  return false;
}

bool ViolatingWithCoarse(const GridPolicy& fine, const GridPolicy& coarse,
                         const Bucket& bucket) {
  const int dims = bucket.dimension();
  const int r = fine.resolution() / coarse.resolution();
  const int t_min = BoxMin(coarse, bucket.lambda, bucket.mu);
  // Minimal fine boxes: [ell, u] with ell as high as possible inside cube
  // lambda and u as low as possible inside cube mu. When lambda_d = mu_d any
  // single fine column of that cube is a candidate.
  std::vector<int> choice_lo(dims, 0), choice_hi(dims, 0);
  for (int d = 0; d < dims; ++d) {
    if (bucket.lambda[d] == bucket.mu[d]) choice_hi[d] = r - 1;
  }
  int best = -1;
  std::vector<int> a(dims), b(dims);
  internal::ForEachInBox(choice_lo, choice_hi, [&](const std::vector<int>& c) {
    for (int d = 0; d < dims; ++d) {
      if (bucket.lambda[d] == bucket.mu[d]) {
        a[d] = b[d] = (bucket.lambda[d] - 1) * r + 1 + c[d];
      } else {
        a[d] = bucket.lambda[d] * r;
        b[d] = (bucket.mu[d] - 1) * r + 1;
      }
    }
    best = std::max(best, BoxMin(fine, a, b));
    return best <= t_min;
  });
  return best > t_min;
}

}  // namespace

int Bucket::min_gap() const {
  int gap = INT_MAX;
  for (size_t d = 0; d < lambda.size(); ++d) gap = std::min(gap, mu[d] - lambda[d]);
  return gap;
}

int CubeCoordinate(double x, int resolution) {
  if (resolution < 1) throw std::invalid_argument("S must be positive");
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("coordinate outside [0,1]");
  }
  const double scaled = std::floor(x * resolution);
  return std::min(static_cast<int>(scaled) + 1, resolution);
}

CubeIndex CubeIndexOf(const Point& x, int resolution) {
  CubeIndex sigma(x.size());
  for (size_t d = 0; d < x.size(); ++d) sigma[d] = CubeCoordinate(x[d], resolution);
  return sigma;
}

Bucket BucketOf(const Buyer& buyer, int resolution) {
  return {CubeIndexOf(buyer.lower, resolution),
          CubeIndexOf(buyer.upper, resolution)};
}

std::vector<CubeIndex> RectCubes(const CubeIndex& lambda, const CubeIndex& mu) {
  if (lambda.size() != mu.size()) throw std::invalid_argument("dimension mismatch");
  for (size_t d = 0; d < lambda.size(); ++d) {
    if (lambda[d] > mu[d]) throw std::invalid_argument("lambda exceeds mu");
  }
  std::vector<CubeIndex> cubes;
  internal::ForEachInBox(lambda, mu, [&](const std::vector<int>& c) {
    cubes.push_back(c);
    return true;
  });
  return cubes;
}

std::vector<CubeIndex> FaceCubes(const Bucket& bucket,
                                 const FaceDirection& delta) {
  if (static_cast<int>(delta.size()) != bucket.dimension()) {
    throw std::invalid_argument("direction dimension mismatch");
  }
  CheckDirection(delta);
  const int dims = bucket.dimension();
  std::vector<int> lo(dims), hi(dims);
  for (int d = 0; d < dims; ++d) {
    if (bucket.lambda[d] > bucket.mu[d]) {
      throw std::invalid_argument("lambda exceeds mu");
    }
    std::tie(lo[d], hi[d]) = FaceRange(bucket, delta, d);
  }
  std::vector<CubeIndex> cubes;
  internal::ForEachInBox(lo, hi, [&](const std::vector<int>& c) {
    cubes.push_back(c);
    return true;
  });
  return cubes;
}

std::vector<FaceDirection> AllDirections(int dimension) {
  std::vector<FaceDirection> out;
  std::vector<int> lo(dimension, -1), hi(dimension, 1);
  internal::ForEachInBox(lo, hi, [&](const std::vector<int>& d) {
    out.push_back(d);
    return true;
  });
  return out;
}

std::vector<Bucket> AllBuckets(int resolution, int dimension) {
  std::vector<Bucket> out;
  out.reserve(BucketCount(resolution, dimension));
  std::vector<int> lo(dimension, 1), hi(dimension, resolution);
  internal::ForEachInBox(lo, hi, [&](const std::vector<int>& lambda) {
    internal::ForEachInBox(lambda, hi, [&](const std::vector<int>& mu) {
      out.push_back({lambda, mu});
      return true;
    });
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

int64_t BucketCount(int resolution, int dimension) {
  return IntPow(int64_t{resolution} * (resolution + 1) / 2, dimension);
}

GridPolicy RoundPolicy(const GridPolicy& policy, int resolution) {
  if (resolution < 1 || policy.resolution() % resolution != 0) {
    throw std::invalid_argument("S must divide the policy resolution");
  }
  const int dims = policy.dimension();
  const int r = policy.resolution() / resolution;
  std::vector<int> cells(IntPow(resolution, dims));
  std::vector<int> lo(dims, 1), hi(dims, resolution);
  std::vector<int> flo(dims), fhi(dims);
  int64_t flat = 0;
  internal::ForEachInBox(lo, hi, [&](const std::vector<int>& sigma) {
    for (int d = 0; d < dims; ++d) {
      flo[d] = (sigma[d] - 1) * r + 1;
      fhi[d] = sigma[d] * r;
    }
    cells[flat++] = BoxMin(policy, flo, fhi);
    return true;
  });
  return GridPolicy(resolution, dims, std::move(cells), policy.grid());
}

bool IsViolatingBucket(const GridPolicy& policy, int resolution,
                       const Bucket& bucket) {
  if (bucket.dimension() != policy.dimension()) {
    throw std::invalid_argument("bucket dimension mismatch");
  }
  const GridPolicy coarse = RoundPolicy(policy, resolution);
  return ViolatingWithCoarse(policy, coarse, bucket);
}

std::vector<Bucket> Anchors(int resolution, int m, const FaceDirection& delta) {
  CheckDirection(delta);
  if (IsZero(delta)) throw std::invalid_argument("anchors need delta != 0");
  CheckM(resolution, m);
  std::vector<Bucket> out;
  for (Bucket& b : AllBuckets(resolution, static_cast<int>(delta.size()))) {
    if (b.min_gap() >= m && IsAnchor(b, delta, resolution)) {
      out.push_back(std::move(b));
    }
  }
  return out;
}

std::vector<Bucket> LineFrom(const Bucket& anchor, const FaceDirection& delta,
                             int resolution, int m) {
  CheckDirection(delta);
  if (IsZero(delta)) throw std::invalid_argument("lines need delta != 0");
  CheckM(resolution, m);
  if (static_cast<int>(delta.size()) != anchor.dimension() ||
      !InsideGrid(anchor, resolution) || anchor.min_gap() < m ||
      !IsAnchor(anchor, delta, resolution)) {
    throw std::invalid_argument("bucket is not a delta-anchor");
  }
  std::vector<Bucket> line;
  for (int iota = 0;; ++iota) {
    Bucket b = Shift(anchor, delta, iota);
    if (!InsideGrid(b, resolution)) break;
    line.push_back(std::move(b));
  }
  return line;
}

double BucketConditionalObjective(const PricingPolicy& policy,
                                  const Sample& sample, int resolution,
                                  const Bucket& bucket) {
  ExactRevenueSum sum;
  int64_t count = 0;
  for (const Buyer& b : sample.buyers()) {
    if (BucketOf(b, resolution) != bucket) continue;
    sum.Add(Revenue(policy, b));
    ++count;
  }
  return count == 0 ? 0.0 : sum.Mean(count);
}

double BetaBound(int resolution, int dimension, int k) {
  const double root = std::ceil(std::sqrt(static_cast<double>(resolution)));
  const double s = resolution;
  return dimension / s *
         (root + (std::pow(3.0, dimension) - 1.0) * 2.0 * k * s / root);
}

bool BoundReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

const CheckResult& BoundReport::find(const std::string& name) const {
  for (const CheckResult& c : checks) {
    if (c.check == name) return c;
  }
  throw std::out_of_range("no check named " + name);
}

BoundReport VerifyCombinatorics(int resolution, int m,
                                std::span<const GridPolicy> policies, int k) {
  CheckM(resolution, m);
  if (policies.empty()) throw std::invalid_argument("no policies to verify");
  const int dims = policies.front().dimension();
  for (const GridPolicy& p : policies) {
    if (p.dimension() != dims || p.resolution() % resolution != 0) {
      throw std::invalid_argument("policy resolution or dimension mismatch");
    }
  }
  const int S = resolution;
  BoundReport report;
  report.resolution = S;
  report.m = m;
  report.dimension = dims;
  report.k = k;
  report.policies = static_cast<int64_t>(policies.size());
  report.bucket_count = BucketCount(S, dims);
  report.normalization = std::pow(static_cast<double>(S), 2.0 * dims);

  const std::vector<Bucket> buckets = AllBuckets(S, dims);
  std::vector<Bucket> large_gap;
  int64_t small_gap = 0;
  for (const Bucket& b : buckets) {
    if (b.min_gap() >= m) {
      large_gap.push_back(b);
    } else {
      ++small_gap;
    }
  }
  const double anchor_bound = dims * std::pow(static_cast<double>(S), 2 * dims - 1);

  std::vector<FaceDirection> directions;
  for (FaceDirection& d : AllDirections(dims)) {
    if (!IsZero(d)) directions.push_back(std::move(d));
  }

  // Policy-independent structure: anchors and their lines.
  CheckResult anchors{"anchor_count", 0, 0.0, anchor_bound, true};
  CheckResult cover{"line_cover", 0, 0.0, 0.0, true};
  CheckResult inclusion{"face_inclusion", 0, 0.0, 0.0, true};
  std::vector<std::vector<std::vector<Bucket>>> lines(directions.size());
  for (size_t t = 0; t < directions.size(); ++t) {
    const FaceDirection& delta = directions[t];
    const std::vector<Bucket> anchor_set = Anchors(S, m, delta);
    ++anchors.instances;
    anchors.max_measured =
        std::max(anchors.max_measured, static_cast<double>(anchor_set.size()));
    if (static_cast<double>(anchor_set.size()) > anchor_bound) anchors.pass = false;

    std::set<Bucket> covered;
    for (const Bucket& a : anchor_set) {
      std::vector<Bucket> line = LineFrom(a, delta, S, m);
      covered.insert(line.begin(), line.end());
      for (size_t i = 0; i < line.size(); ++i) {
        const std::vector<CubeIndex> face = FaceCubes(line[i], delta);
        for (size_t j = i + 1; j < line.size() && j < i + m; ++j) {
          ++inclusion.instances;
          const std::vector<CubeIndex> interior =
              FaceCubes(line[j], FaceDirection(dims, 0));
          const std::set<CubeIndex> inner(interior.begin(), interior.end());
          for (const CubeIndex& c : face) {
            if (!inner.count(c)) {
              inclusion.max_measured += 1.0;
              inclusion.pass = false;
              break;
            }
          }
        }
      }
      lines[t].push_back(std::move(line));
    }
    ++cover.instances;
    const std::set<Bucket> expected(large_gap.begin(), large_gap.end());
    if (covered != expected) {
      cover.max_measured += 1.0;
      cover.pass = false;
    }
  }
  const double small_bound = m * anchor_bound;
  CheckResult small{"small_gap_count", 1, static_cast<double>(small_gap),
                    small_bound, static_cast<double>(small_gap) <= small_bound};

  const double prop3_bound = 2.0 * dims * k * report.normalization / m;
  const double beta = BetaBound(S, dims, k);
  CheckResult necessity{"necessary_condition", 0, 0.0, 0.0, true};
  CheckResult decomposition{"violating_decomposition", 0, 0.0, 0.0, true};
  CheckResult prop3{"directional_count", 0, 0.0, prop3_bound, true};
  CheckResult separation{"line_separation", 0, 0.0, 0.0, true};
  CheckResult ratio{"violating_ratio", 0, 0.0, beta, true};

  const FaceDirection zero(dims, 0);
  for (const GridPolicy& policy : policies) {
    const GridPolicy coarse = RoundPolicy(policy, S);
    std::map<Bucket, int> interior_min;
    std::map<std::pair<Bucket, size_t>, int> face_min;
    for (const Bucket& b : buckets) interior_min[b] = FaceMin(coarse, b, zero);
    auto directional = [&](const Bucket& b, size_t t) {
      auto key = std::make_pair(b, t);
      auto it = face_min.find(key);
      if (it != face_min.end()) return it->second;
      const int v = FaceMin(coarse, b, directions[t]);
      face_min.emplace(std::move(key), v);
      return v;
    };
    // A bucket belongs to the delta class when its interior minimum strictly
    // exceeds its delta-face minimum (empty interior counts as +infinity).
    auto in_class = [&](const Bucket& b, size_t t) {
      return b.min_gap() >= m && interior_min[b] > directional(b, t);
    };

    int64_t violating = 0;
    for (const Bucket& b : buckets) {
      if (!ViolatingWithCoarse(policy, coarse, b)) continue;
      ++violating;
      ++necessity.instances;
      int boundary = kInfinity;
      for (size_t t = 0; t < directions.size(); ++t) {
        boundary = std::min(boundary, directional(b, t));
      }
      if (!(interior_min[b] > boundary)) {
        necessity.max_measured += 1.0;
        necessity.pass = false;
      }
      ++decomposition.instances;
      bool covered = b.min_gap() < m;
      for (size_t t = 0; !covered && t < directions.size(); ++t) {
        covered = in_class(b, t);
      }
      if (!covered) {
        decomposition.max_measured += 1.0;
        decomposition.pass = false;
      }
    }

    for (size_t t = 0; t < directions.size(); ++t) {
      int64_t count = 0;
      for (const Bucket& b : large_gap) count += in_class(b, t) ? 1 : 0;
      ++prop3.instances;
      prop3.max_measured = std::max(prop3.max_measured, static_cast<double>(count));
      if (count > prop3_bound) prop3.pass = false;

      for (const std::vector<Bucket>& line : lines[t]) {
        ++separation.instances;
        // Positions on the line per finite interior level.
        std::map<int, std::vector<int>> by_level;
        for (size_t i = 0; i < line.size(); ++i) {
          if (in_class(line[i], t) && interior_min[line[i]] != kInfinity) {
            by_level[interior_min[line[i]]].push_back(static_cast<int>(i));
          }
        }
        const int64_t cap = (static_cast<int64_t>(line.size()) + m - 1) / m;
        for (const auto& [level, positions] : by_level) {
          bool ok = static_cast<int64_t>(positions.size()) <= cap;
          for (size_t i = 1; i < positions.size(); ++i) {
            ok = ok && positions[i] - positions[i - 1] >= m;
          }
          if (!ok) {
            separation.max_measured += 1.0;
            separation.pass = false;
          }
        }
      }
    }

    ++ratio.instances;
    const double r = violating / report.normalization;
    ratio.max_measured = std::max(ratio.max_measured, r);
    if (r > beta) ratio.pass = false;
  }

  report.checks = {necessity, anchors,  cover, inclusion, small,
                   separation, ratio,   prop3, decomposition};
  return report;
}

double BucketProbabilityEstimate(const BuyerSampler& sampler, int resolution,
                                 const Bucket& bucket, int64_t draws,
                                 uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("need at least one draw");
  int64_t hits = 0;
  for (int64_t i = 0; i < draws; ++i) {
    if (BucketOf(sampler(seed, i), resolution) == bucket) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

std::map<Bucket, double> BucketProbabilities(const BuyerSampler& sampler,
                                             int resolution, int64_t draws,
                                             uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("need at least one draw");
  std::map<Bucket, int64_t> hits;
  for (int64_t i = 0; i < draws; ++i) ++hits[BucketOf(sampler(seed, i), resolution)];
  std::map<Bucket, double> out;
  for (const auto& [b, h] : hits) {
    out.emplace(b, static_cast<double>(h) / static_cast<double>(draws));
  }
  return out;
}

}  // namespace stratprice
