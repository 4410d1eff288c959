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
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tabflow/compressor.hpp"
#include "tabflow/latent_codec.hpp"
#include "tabflow/relationship.hpp"
#include "tabflow/table.hpp"

namespace tabflow {

// Scores are on a 0-100 scale, higher is better unless noted.

/// 100 * (1 - sup |F_real - F_synth|).
double ks_complement(std::span<const double> real, std::span<const double> synth);

/// 100 * (1 - total variation distance) over the union of categories.
double tv_complement(std::span<const std::string> real, std::span<const std::string> synth);

/// Column values as doubles (numeric and datetime columns) or tokens.
std::vector<double> numeric_column(const Table& table, std::size_t column);
std::vector<std::string> token_column(const Table& table, std::size_t column);

/// Throws DataError unless both tables have the same column names and kinds
/// in the same order.
void require_same_schema(const Table& real, const Table& synth);

/// Mean over columns of ks_complement (numeric, datetime) or tv_complement
/// (categorical).
double density_estimation_score(const Table& real, const Table& synth);

/// Mean over unordered column pairs. Numeric pairs compare Pearson
/// correlations; every other pair compares joint frequency tables, with
/// numeric sides binned at the real data's quartiles. Numeric pairs with a
/// constant column fall back to the binned rule.
double pairwise_correlation_score(const Table& real, const Table& synth);

/// Quartile cut points (type-1 quantiles) of a sample.
std::vector<double> quartile_cuts(std::vector<double> values);

/// Bin index under cut points: bins are (-inf, c0], (c0, c1], ...
int bin_of(std::span<const double> cuts, double value);

/// Per numeric column, the share of synthetic cells inside the real range;
/// per categorical column, the share whose token occurs in the real data.
/// Returns 100 * mean over columns.
double coverage_score(const Table& real, const Table& synth);

/// Shared representation for distance-based metrics: numerics standardized
/// with the reference table's moments, categoricals one-hot over the
/// reference vocabulary (unseen tokens map to an all-zero block).
class Embedder {
 public:
  explicit Embedder(const Table& reference);
  Eigen::MatrixXd embed(const Table& table) const;
  const ColumnCodec& codec() const { return codec_; }

 private:
  ColumnCodec codec_;
};

/// Alpha grid 0.05, 0.10, ..., 0.95.
std::vector<double> default_alpha_grid();

/// Type-1 empirical quantile: the ceil(q * n)-th smallest value.
double quantile_type1(std::vector<double> values, double q);

/// Coordinatewise median.
Eigen::RowVectorXd coordinate_median(const Eigen::MatrixXd& data);

/// Balls around the real median: P(a) is the share of synthetic rows within
/// the real a-quantile distance. Score = 100 * max(0, 1 - 2 * mean |P(a) - a|).
double alpha_precision(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth,
                       std::span<const double> alphas);
double alpha_precision(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth);

/// alpha_precision with the roles of real and synthetic swapped.
double beta_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth,
                   std::span<const double> betas);
double beta_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth);

/// Area under the ROC curve with average ranks for tied scores.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Logistic-regression two-sample test. 100 means indistinguishable.
double c2st_score(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth, std::uint64_t seed);

/// Admissible (granular, ancestors...) tuples of one hierarchy group.
struct HierarchyTuples {
  HierarchyGroup group;
  std::set<std::vector<std::string>> tuples;
};

/// Every tuple observed in `real`.
HierarchyTuples observed_tuples(const Table& real, const HierarchyGroup& group);
/// The tuples a hierarchy map reconstructs.
HierarchyTuples map_tuples(const HierarchyMap& map);

/// 100 * mean over groups of the share of synthetic rows whose tuple is
/// admissible. Missing cells count as violations. 100 when no groups.
double hcs(const Table& synth, std::span<const HierarchyTuples> groups);

/// 100 * mean over conditions of the share of rows satisfying it. Each
/// derived formula is a condition (within derived_tolerance), as is each
/// adjacent pair of a temporal chain (strictly increasing). 100 when there
/// are no conditions.
double mdi(const Table& synth, std::span<const MathGroup> math,
           std::span<const TemporalChain> chains, double rel_tol = kDefaultRelTol);

/// Share of synthetic rows strictly closer (L1) to the training rows than to
/// the test rows, times 100. Ideal is 50.
double dcr(const Eigen::MatrixXd& synth, const Eigen::MatrixXd& real_train,
           const Eigen::MatrixXd& real_test);

}  // namespace tabflow
