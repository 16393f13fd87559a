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

#include "stratprice/distributions.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "multi_index.h"
#include "stratprice/geometry.h"

namespace stratprice {
namespace {

constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
// Uniforms reserved per buyer draw.
constexpr uint64_t kSlotsPerDraw = 4;
constexpr int64_t kMaxPrefixEntries = int64_t{1} << 27;

double Clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

uint64_t Mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

CounterRng::CounterRng(uint64_t seed, uint64_t stream)
    : key_(Mix64(seed + kGamma) ^ Mix64(stream * kGamma + 0x632BE59BD9B4E019ULL)) {}

uint64_t CounterRng::Bits(uint64_t counter) const {
  return Mix64(key_ + (counter + 1) * kGamma);
}

double CounterRng::Uniform(uint64_t counter) const {
  return std::ldexp(static_cast<double>(Bits(counter) >> 11), -53);
}

uint64_t DeriveSeed(uint64_t master, std::string_view label, int64_t n,
                    int64_t replication) {
  uint64_t fnv = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    fnv ^= c;
    fnv *= 0x100000001B3ULL;
  }
  uint64_t h = Mix64(master + kGamma);
  h = Mix64(h ^ fnv);
  h = Mix64(h ^ static_cast<uint64_t>(n));
  h = Mix64(h ^ static_cast<uint64_t>(replication));
  return h;
}

void ValidateSpec(const DistributionSpec& spec) {
  if (spec.id == "rect_uniform") {
    if (spec.epsilon.size() != 2) {
      throw std::invalid_argument("rect_uniform needs a 2-vector epsilon");
    }
    for (double e : spec.epsilon) {
      if (!(e >= 0.0 && e <= 0.1)) {
        throw std::invalid_argument("rect_uniform epsilon must lie in [0, 0.1]");
      }
    }
  } else if (spec.id == "circle") {
    if (spec.epsilon.size() != 1) {
      throw std::invalid_argument("circle needs a scalar epsilon");
    }
    if (!(spec.epsilon[0] >= 0.0 && spec.epsilon[0] <= 0.25)) {
      throw std::invalid_argument("circle epsilon must lie in [0, 0.25]");
    }
    if (spec.center.size() != 2 || !(spec.radius >= 0.0)) {
      throw std::invalid_argument("circle needs a 2-d center and radius >= 0");
    }
  } else if (spec.id == "example1") {
    if (!spec.epsilon.empty() &&
        std::any_of(spec.epsilon.begin(), spec.epsilon.end(),
                    [](double e) { return e != 0.0; })) {
      throw std::invalid_argument("example1 has no epsilon");
    }
  } else {
    throw std::invalid_argument("unknown distribution " + spec.id);
  }
}

Buyer DrawBuyer(const DistributionSpec& spec, uint64_t seed, int64_t draw) {
  const CounterRng rng(seed, 0);
  const uint64_t base = static_cast<uint64_t>(draw) * kSlotsPerDraw;
  Buyer b;
  if (spec.id == "rect_uniform") {
    for (int d = 0; d < 2; ++d) {
      const double x = 0.1 + 0.8 * rng.Uniform(base + d);
      b.lower.push_back(x - spec.epsilon[d]);
      b.upper.push_back(x + spec.epsilon[d]);
    }
    double v = 0.0;
    for (int d = 0; d < 2; ++d) {
      v += b.lower[d] * (1.0 - b.lower[d]) + b.upper[d] * (1.0 - b.upper[d]);
    }
    b.valuation = v;
  } else if (spec.id == "example1") {
    const double x = rng.Uniform(base);
    b.lower = {x};
    b.upper = {x};
    b.valuation = rng.Uniform(base + 1);
  } else if (spec.id == "circle") {
    const double theta = 2.0 * std::numbers::pi * rng.Uniform(base);
    const double e = spec.epsilon[0];
    const double x[2] = {spec.center[0] + spec.radius * std::cos(theta),
                         spec.center[1] + spec.radius * std::sin(theta)};
    for (int d = 0; d < 2; ++d) {
      b.lower.push_back(Clamp01(x[d] - e));
      b.upper.push_back(Clamp01(x[d] + e));
    }
    b.valuation = rng.Uniform(base + 1) < 0.5 ? 1.0 / 3.0 : 0.5;
  } else {
    throw std::invalid_argument("unknown distribution " + spec.id);
  }
  return b;
}

Sample DrawSample(const DistributionSpec& spec, int n, uint64_t seed) {
  ValidateSpec(spec);
  if (n < 1) throw std::invalid_argument("N must be positive");
  std::vector<Buyer> buyers;
  buyers.reserve(n);
  for (int i = 0; i < n; ++i) buyers.push_back(DrawBuyer(spec, seed, i));
  return Sample(std::move(buyers), SampleMeta{spec.id, spec.epsilon, seed});
}

Sample SampleRectExperiment(int n, const std::vector<double>& epsilon,
                            uint64_t seed) {
  DistributionSpec spec;
  spec.id = "rect_uniform";
  spec.epsilon = epsilon;
  return DrawSample(spec, n, seed);
}

Sample SampleExample1(int n, uint64_t seed) {
  DistributionSpec spec;
  spec.id = "example1";
  spec.epsilon = {};
  return DrawSample(spec, n, seed);
}

Sample SampleCircle(int n, double epsilon, uint64_t seed) {
  DistributionSpec spec;
  spec.id = "circle";
  spec.epsilon = {epsilon};
  return DrawSample(spec, n, seed);
}

BuyerSampler MakeSampler(const DistributionSpec& spec) {
  ValidateSpec(spec);
  return [spec](uint64_t seed, int64_t draw) { return DrawBuyer(spec, seed, draw); };
}

// Dense table of price levels over a product of per-dimension cells, with
// prefix counts of "level <= k" for k < K-1.
struct BoxMinOracle::Field {
  int dims = 0;
  int levels = 0;
  std::vector<int> extent;
  std::vector<int> stride;  // into the (extent+1) prefix arrays
  std::vector<std::vector<int32_t>> prefix;
  std::function<int(int, double)> cell_of;

  void Build(const std::vector<int>& table) {
    int64_t total = 1;
    stride.assign(dims, 0);
    for (int d = 0; d < dims; ++d) {
      stride[d] = static_cast<int>(total);
      total *= extent[d] + 1;
    }
    prefix.assign(levels - 1, std::vector<int32_t>(total, 0));
    std::vector<int> lo(dims, 0), hi(dims);
    for (int d = 0; d < dims; ++d) hi[d] = extent[d] - 1;
    int64_t flat = 0;
    internal::ForEachInBox(lo, hi, [&](const std::vector<int>& c) {
      int64_t at = 0;
      for (int d = 0; d < dims; ++d) at += static_cast<int64_t>(c[d] + 1) * stride[d];
      for (int k = table[flat]; k < levels - 1; ++k) prefix[k][at] = 1;
      ++flat;
      return true;
    });
    for (std::vector<int32_t>& p : prefix) {
      for (int d = 0; d < dims; ++d) {
        std::vector<int> plo(dims, 0), phi(dims);
        for (int e = 0; e < dims; ++e) phi[e] = extent[e];
        plo[d] = 1;
        internal::ForEachInBox(plo, phi, [&](const std::vector<int>& c) {
          int64_t at = 0;
          for (int e = 0; e < dims; ++e) at += static_cast<int64_t>(c[e]) * stride[e];
          p[at] += p[at - stride[d]];
          return true;
        });
      }
    }
  }

  int Query(const std::vector<int>& a, const std::vector<int>& b) const {
    for (int k = 0; k < levels - 1; ++k) {
      int64_t count = 0;
      for (int corner = 0; corner < (1 << dims); ++corner) {
        int64_t at = 0;
        int sign = 1;
        for (int d = 0; d < dims; ++d) {
          if (corner & (1 << d)) {
            at += static_cast<int64_t>(b[d] + 1) * stride[d];
          } else {
            at += static_cast<int64_t>(a[d]) * stride[d];
            sign = -sign;
          }
        }
        count += sign * prefix[k][at];
      }
      if (count > 0) return k;
    }
    return levels - 1;
  }
};

BoxMinOracle::BoxMinOracle(const PricingPolicy& policy) : policy_(policy) {
  auto field = std::make_unique<Field>();
  field->dims = policy.dimension();
  field->levels = policy.grid().size();
  std::vector<int> table;
  if (const auto* g = dynamic_cast<const GridPolicy*>(&policy)) {
    const int s = g->resolution();
    field->extent.assign(field->dims, s);
    field->cell_of = [s](int, double x) { return CubeCoordinate(x, s) - 1; };
    table = g->cells();
  } else if (const auto* r = dynamic_cast<const RegionPolicy*>(&policy)) {
    const Arrangement* a = &r->arrangement();
    for (int d = 0; d < field->dims; ++d) field->extent.push_back(a->piece_count(d));
    field->cell_of = [a](int d, double x) { return a->PieceIndex(d, x); };
  } else {
    return;
  }
  int64_t total = 1;
  for (int e : field->extent) total *= e + 1;
  if (total * std::max(1, field->levels - 1) > kMaxPrefixEntries) return;
  if (table.empty()) {
    table = static_cast<const RegionPolicy&>(policy).PieceLevels();
  }
  field->Build(table);
  field_ = std::move(field);
}

BoxMinOracle::~BoxMinOracle() = default;

int BoxMinOracle::MinPriceIndex(const Point& lower, const Point& upper) const {
  if (!field_) return policy_.MinPriceIndexOverBox(lower, upper);
  std::vector<int> a(field_->dims), b(field_->dims);
  for (int d = 0; d < field_->dims; ++d) {
    a[d] = field_->cell_of(d, lower[d]);
    b[d] = field_->cell_of(d, upper[d]);
  }
  return field_->Query(a, b);
}

double BoxMinOracle::Revenue(const Buyer& buyer) const {
  if (buyer.dimension() != policy_.dimension()) {
    throw std::invalid_argument("buyer dimension does not match policy");
  }
  const double m = policy_.grid().price(MinPriceIndex(buyer.lower, buyer.upper));
  return m <= buyer.valuation ? m : 0.0;
}

double FastEmpiricalObjective(const PricingPolicy& policy, const Sample& sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  const BoxMinOracle oracle(policy);
  ExactRevenueSum sum;
  for (const Buyer& b : sample.buyers()) {
    ValidateBuyer(b);
    sum.Add(oracle.Revenue(b));
  }
  return sum.Mean(sample.size());
}

EvalResult EstimateTrueObjective(const PricingPolicy& policy,
                                 const DistributionSpec& spec, int64_t draws,
                                 uint64_t seed) {
  ValidateSpec(spec);
  if (draws < 1) throw std::invalid_argument("need at least one draw");
  if (spec.dimension() != policy.dimension()) {
    throw std::invalid_argument("distribution dimension does not match policy");
  }
  const BoxMinOracle oracle(policy);
  ExactRevenueSum sum;
  long double squares = 0.0L;
  for (int64_t i = 0; i < draws; ++i) {
    const double r = oracle.Revenue(DrawBuyer(spec, seed, i));
    sum.Add(r);
    squares += static_cast<long double>(r) * r;
  }
  EvalResult out;
  out.draws = draws;
  out.mean = sum.Mean(draws);
  if (draws > 1) {
    const long double n = static_cast<long double>(draws);
    const long double mean = out.mean;
    const long double var = std::max(0.0L, (squares - n * mean * mean) / (n - 1));
    out.ci_half_width = static_cast<double>(1.96L * std::sqrt(var / n));
  }
  return out;
}

GridPolicy CheckerboardPolicy(int square_count, double corner_fraction,
                              int low_index, int high_index, int phase,
                              const PriceGrid& grid) {
  if (square_count < 2) throw std::invalid_argument("square_count must be >= 2");
  if (!(corner_fraction > 0.0 && corner_fraction <= 0.5)) {
    throw std::invalid_argument("corner_fraction must lie in (0, 1/2]");
  }
  if (phase != 0 && phase != 1) throw std::invalid_argument("phase must be 0 or 1");
  if (low_index < 0 || low_index >= grid.size() || high_index < 0 ||
      high_index >= grid.size()) {
    throw std::invalid_argument("price index out of range");
  }
  int q = 0;
  int c = 0;
  for (int t = 1; t <= 10000; ++t) {
    const double scaled = corner_fraction * t;
    if (std::abs(scaled - std::round(scaled)) < 1e-9) {
      q = t;
      c = static_cast<int>(std::round(scaled));
      break;
    }
  }
  if (q == 0) throw std::invalid_argument("corner_fraction is not a short rational");
  const int s = square_count * q;
  std::vector<int> cells(static_cast<size_t>(s) * s, high_index);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      const int i = x / q;
      const int j = y / q;
      if ((i + j + phase) % 2 != 0) continue;
      const int a = x % q;
      const int b = y % q;
      if ((a < c || a >= q - c) && (b < c || b >= q - c)) {
        cells[static_cast<size_t>(y) * s + x] = low_index;
      }
    }
  }
  return GridPolicy(s, 2, std::move(cells), grid);
}

}  // namespace stratprice
