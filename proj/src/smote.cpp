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

#include "tabflow/smote.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "tabflow/compressor.hpp"
#include "tabflow/error.hpp"

namespace tabflow {

namespace {

class NeighborIndex {
 public:
  NeighborIndex(const Table& t, int k) : table_(t), k_(k) {
    const std::size_t n = t.num_rows();
    for (std::size_t c = 0; c < t.num_columns(); ++c) {
      if (t.column(c).kind == ColumnKind::kCategorical) {
        categorical_.push_back(c);
        continue;
      }
      numeric_.push_back(c);
      double mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += t.as_double(r, c);
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t r = 0; r < n; ++r) ss += std::pow(t.as_double(r, c) - mean, 2);
      const double sd = std::max(std::sqrt(ss / static_cast<double>(n)), 1e-8);
      std::vector<double> z(n);
      for (std::size_t r = 0; r < n; ++r) z[r] = (t.as_double(r, c) - mean) / sd;
      scaled_.push_back(std::move(z));
    }
  }

  const std::vector<std::size_t>& neighbors(std::size_t row) {
    auto it = cache_.find(row);
    if (it != cache_.end()) return it->second;
    const std::size_t n = table_.num_rows();
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n - 1);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == row) continue;
      double d = 0.0;
      for (const auto& z : scaled_) d += (z[r] - z[row]) * (z[r] - z[row]);
      for (std::size_t c : categorical_) {
        d += table_.category_id(r, c) == table_.category_id(row, c) ? 0.0 : 1.0;
      }
      dist.emplace_back(d, r);
    }
    const auto k = static_cast<std::size_t>(k_);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
    return cache_.emplace(row, std::move(out)).first->second;
  }

 private:
  const Table& table_;
  int k_;
  std::vector<std::size_t> numeric_;
  std::vector<std::size_t> categorical_;
  std::vector<std::vector<double>> scaled_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> cache_;
};

}  // namespace

Table smote_generate(const Table& real, const SmoteConfig& config, std::vector<SmoteDraw>* draws) {
  if (config.k_neighbors < 1) throw UsageError("SMOTE needs k_neighbors >= 1");
  if (real.num_rows() <= static_cast<std::size_t>(config.k_neighbors)) {
    throw DataError(fmt::format("SMOTE with k={} needs more than {} rows, got {}", config.k_neighbors,
                                config.k_neighbors, real.num_rows()));
  }
  if (real.has_missing()) throw DataError("SMOTE input has missing cells");
  if (config.fixed_lambda && (*config.fixed_lambda < 0.0 || *config.fixed_lambda > 1.0)) {
    throw UsageError("SMOTE lambda must lie in [0, 1]");
  }

  std::vector<std::int64_t> quantum(real.num_columns(), 1);
  for (std::size_t c = 0; c < real.num_columns(); ++c) {
    if (real.column(c).kind != ColumnKind::kDatetime) continue;
    std::vector<std::int64_t> secs;
    for (std::size_t r = 0; r < real.num_rows(); ++r) secs.push_back(real.timestamp(r, c).seconds);
    quantum[c] = time_quantum(secs);
  }

  NeighborIndex index(real, config.k_neighbors);
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick_row(0, real.num_rows() - 1);
  std::uniform_int_distribution<int> pick_nbr(0, config.k_neighbors - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TableBuilder builder(real.schema());
  builder.reserve(config.n_samples);
  std::vector<Value> row(real.num_columns());
  for (std::size_t i = 0; i < config.n_samples; ++i) {
    const std::size_t s = pick_row(rng);
    const std::size_t nb = index.neighbors(s)[static_cast<std::size_t>(pick_nbr(rng))];
    const double lambda = config.fixed_lambda ? *config.fixed_lambda : unit(rng);
    for (std::size_t c = 0; c < real.num_columns(); ++c) {
      switch (real.column(c).kind) {
        case ColumnKind::kCategorical:
          row[c] = std::string(real.category(lambda < 0.5 ? s : nb, c));
          break;
        case ColumnKind::kNumeric: {
          const double a = real.number(s, c);
          row[c] = a + lambda * (real.number(nb, c) - a);
          break;
        }
        case ColumnKind::kDatetime: {
          const auto a = static_cast<double>(real.timestamp(s, c).seconds);
          const double v = a + lambda * (static_cast<double>(real.timestamp(nb, c).seconds) - a);
          const auto q = quantum[c];
          row[c] = Timestamp{std::llround(v / static_cast<double>(q)) * q};
          break;
        }
      }
    }
    builder.add_row(row);
    if (draws != nullptr) draws->push_back({s, nb, lambda});
  }
  return std::move(builder).build();
}

}  // namespace tabflow
