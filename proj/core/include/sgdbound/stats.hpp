// Copyright 2026 The sgdbound Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sgdbound {

/// Pairwise (cascade) summation in a fixed reduction order. The result depends
/// only on the input sequence, never on how it was produced.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct SampleMoments {
  double mean = 0.0;
  double std = 0.0;     // unbiased sample standard deviation (0 when n < 2)
  double stderr_ = 0.0; // std / sqrt(n)
  std::size_t n = 0;
};

/// Moments of v shifted by v[0], so constant samples give std exactly 0.
inline SampleMoments sample_moments(std::span<const double> v) {
  SampleMoments m;
  m.n = v.size();
  if (m.n == 0) return m;
  std::vector<double> dev(v.begin(), v.end());
  for (double& x : dev) x -= v[0];
  const double shift = pairwise_sum(dev) / static_cast<double>(m.n);
  m.mean = v[0] + shift;
  if (m.n > 1) {
    double ss = 0.0;
    for (double x : dev) ss += (x - shift) * (x - shift);
    m.std = std::sqrt(ss / static_cast<double>(m.n - 1));
  }
  m.stderr_ = m.std / std::sqrt(static_cast<double>(m.n));
  return m;
}

/// Two-sided 99% standard-normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

}  // namespace sgdbound
