/*
 * Copyright 2026 The TabFlow Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace tabflow::testing {

struct GradCheckResult {
  std::size_t checked = 0;
  double worst_relative_error = 0.0;
};

/// Central differences on `count` distinct parameter indices drawn from
/// [0, total). `param(i)` exposes parameter i for writing, `loss()`
/// evaluates the loss, and `analytic(i)` returns the analytic gradient.
/// Relative error is |a - n| / max(|a|, |n|, 1e-8).
inline GradCheckResult grad_check(std::size_t total, std::size_t count, std::uint64_t seed,
                                  const std::function<double&(std::size_t)>& param,
                                  const std::function<double()>& loss,
                                  const std::function<double(std::size_t)>& analytic, double eps = 1e-5) {
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(count, total));
  GradCheckResult out;
  for (std::size_t i : idx) {
    double& p = param(i);
    const double saved = p;
    p = saved + eps;
    const double up = loss();
    p = saved - eps;
    const double down = loss();
    p = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double a = analytic(i);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    out.worst_relative_error = std::max(out.worst_relative_error, std::abs(a - numeric) / denom);
    ++out.checked;
  }
  return out;
}

}  // namespace tabflow::testing
