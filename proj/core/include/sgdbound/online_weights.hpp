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
#include <limits>

namespace sgdbound {

/// Streaming normalizer for weighted averages whose weights arrive as
/// logarithms. For each new weight w_t it returns rho_t = w_t / W_t using
///
///   W_t / w_t = 1 + (w_prev / w_t) * (W_prev / w_prev),
///
/// where w_prev is the most recent positive weight. Neither w_t nor W_t is
/// ever formed, so geometric weights such as (1 - a*gamma)^-(t+1) cannot
/// overflow. A running mean updated as m <- m + rho_t * (v_t - m) then equals
/// the weighted mean of everything pushed so far.
class OnlineWeights {
 public:
  /// Registers the next weight. Returns 0 for a zero weight (log = -inf).
  double push(double log_weight) {
    if (log_weight == -std::numeric_limits<double>::infinity()) return 0.0;
    if (!seen_) {
      seen_ = true;
      last_log_weight_ = log_weight;
      total_over_last_ = 1.0;
      return 1.0;
    }
    const double ratio = std::exp(last_log_weight_ - log_weight);
    total_over_last_ = 1.0 + ratio * total_over_last_;
    last_log_weight_ = log_weight;
    return 1.0 / total_over_last_;
  }

  /// True once a positive weight has been pushed.
  bool any_positive() const { return seen_; }

 private:
  bool seen_ = false;
  double last_log_weight_ = 0.0;
  double total_over_last_ = 0.0;
};

}  // namespace sgdbound
