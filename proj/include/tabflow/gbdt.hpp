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
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tabflow/table.hpp"

namespace tabflow {

enum class GbdtLoss { kLogistic, kSquared };

struct GbdtParams {
  GbdtLoss loss = GbdtLoss::kSquared;
  int trees = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  double l2 = 1.0;
  int min_leaf = 1;
  int patience = 20;  // early-stopping rounds on the validation set
};

/// Regression trees fitted level by level with exact splits on presorted
/// features, using gradient and Hessian sums (Newton leaf values).
class GbdtModel {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  /// Raw score (log-odds for the logistic loss).
  Eigen::VectorXd predict_raw(const Eigen::MatrixXd& x) const;
  /// Probabilities for the logistic loss, values for the squared loss.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

  GbdtLoss loss = GbdtLoss::kSquared;
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  double best_validation_loss = 0.0;
};

/// Fits on (x, y); when a validation set is given, keeps the prefix of trees
/// with the lowest validation loss and stops after `patience` rounds without
/// improvement.
GbdtModel fit_gbdt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbdtParams& params,
                   const Eigen::MatrixXd* x_valid = nullptr, const Eigen::VectorXd* y_valid = nullptr);

double gbdt_loss(GbdtLoss loss, const Eigen::VectorXd& raw, const Eigen::VectorXd& y);

enum class UtilityTask { kClassification, kRegression };

UtilityTask parse_utility_task(std::string_view text);

struct UtilityConfig {
  std::vector<int> trees{100, 200};
  std::vector<double> learning_rates{0.1, 0.01};
  std::vector<int> depths{3};
  double holdout_fraction = 0.1;
  int patience = 20;
};

/// Trains on the synthetic rows and scores on the real test rows.
/// Classification is binary with the lexicographically greatest label as the
/// positive class and reports "auc" and "f1" (0-100, threshold 0.5).
/// Regression reports "r2" as 100 * max(0, R^2) plus raw "rmse" and "mae".
std::map<std::string, double> ml_efficiency(const Table& synth_train, const Table& real_test,
                                            const std::string& target, UtilityTask task,
                                            const UtilityConfig& config, std::uint64_t seed);

}  // namespace tabflow
