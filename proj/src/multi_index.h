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

#ifndef STRATPRICE_SRC_MULTI_INDEX_H_
#define STRATPRICE_SRC_MULTI_INDEX_H_

#include <cstdint>
#include <span>
#include <vector>

namespace stratprice::internal {

// Calls fn(index) for every integer vector in the box [lo, hi], dimension 0
// varying fastest. Stops early if fn returns false.
template <typename Fn>
void ForEachInBox(std::span<const int> lo, std::span<const int> hi, Fn&& fn) {
  const size_t dims = lo.size();
  for (size_t d = 0; d < dims; ++d) {
    if (lo[d] > hi[d]) return;
  }
  std::vector<int> index(lo.begin(), lo.end());
  while (true) {
    if (!fn(static_cast<const std::vector<int>&>(index))) return;
    size_t d = 0;
    while (d < dims && index[d] == hi[d]) {
      index[d] = lo[d];
      ++d;
    }
    if (d == dims) return;
    ++index[d];
  }
}

// Row-major flattening with dimension 0 fastest over 0-based extents.
inline int64_t Flatten(std::span<const int> index, std::span<const int> extent) {
  int64_t flat = 0;
  for (size_t d = index.size(); d-- > 0;) flat = flat * extent[d] + index[d];
  return flat;
}

}  // namespace stratprice::internal

#endif  // STRATPRICE_SRC_MULTI_INDEX_H_
