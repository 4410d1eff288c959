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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tabflow/table.hpp"

namespace tabflow {

struct GmmModel {
  static constexpr double kVarianceFloor = 1e-6;

  Eigen::VectorXd weights;    // K
  Eigen::MatrixXd means;      // K x d
  Eigen::MatrixXd variances;  // K x d, diagonal covariances
  /// Mean per-row log-likelihood before each M-step.
  std::vector<double> log_likelihood_trace;

  int components() const { return static_cast<int>(weights.size()); }
};

struct GmmOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;
};

/// EM with k-means++ initialization. Data whose rows are all identical yield
/// a single component with floored variance.
GmmModel fit_gmm(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const GmmOptions& options = {});

/// Per-row log-likelihood under the mixture.
Eigen::VectorXd gmm_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& data);

double gmm_mean_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& data);

/// Numeric and datetime columns plus the target, the default DSI subset.
std::vector<std::string> default_dsi_columns(const Table& table);

/// Fits a K-component mixture on the real rows restricted to `columns` and
/// returns 100 * exp(-|LL_real - LL_synth|) with both mean log-likelihoods
/// taken under that model.
double dsi(const Table& real, const Table& synth, std::span<const std::string> columns, int k,
           std::uint64_t seed);

}  // namespace tabflow
