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

#include <cstdint>
#include <optional>
#include <vector>

#include "tabflow/table.hpp"

namespace tabflow {

struct SmoteConfig {
  int k_neighbors = 5;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  /// Overrides the U(0, 1) interpolation weight when set.
  std::optional<double> fixed_lambda;
};

/// Provenance of one generated row.
struct SmoteDraw {
  std::size_t seed_row = 0;
  std::size_t neighbor_row = 0;
  double lambda = 0.0;
};

/// Interpolates between a uniformly drawn row and one of its k nearest
/// neighbors (standardized L2 on numerics plus 0/1 mismatch per categorical
/// column; ties go to the lower row index). Numeric cells are
/// x_seed + lambda * (x_nbr - x_seed); categorical cells take the seed's
/// token when lambda < 0.5 and the neighbor's otherwise; datetimes are
/// interpolated and rounded to the column's time quantum.
Table smote_generate(const Table& real, const SmoteConfig& config,
                     std::vector<SmoteDraw>* draws = nullptr);

}  // namespace tabflow
