// Copyright 2026 The Geopool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GEOPOOL_TESTS_COMMON_RANK_H_
#define GEOPOOL_TESTS_COMMON_RANK_H_

#include <cstddef>
#include <vector>

namespace geopool::testing {

// Spearman rank correlation between position i and perm[i], where perm is a
// permutation of 0..n-1 (no ties). n >= 2.
inline double SpearmanOfPermutation(const std::vector<size_t>& perm) {
  const double n = static_cast<double>(perm.size());
  double sum_d2 = 0;
  for (size_t i = 0; i < perm.size(); ++i) {
    double d = static_cast<double>(i) - static_cast<double>(perm[i]);
    sum_d2 += d * d;
  }
  return 1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0));
}

}  // namespace geopool::testing

#endif  // GEOPOOL_TESTS_COMMON_RANK_H_
