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
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tabflow/nn.hpp"

namespace tabflow {

/// Variance-exploding schedule with alpha(t) = t on [sigma_min, sigma_max].
struct NoiseSchedule {
  double sigma_min = 0.002;
  double sigma_max = 3.0;
  double rho = 7.0;

  double alpha(double t) const { return t; }
  double alpha_derivative(double /*t*/) const { return 1.0; }

  /// t_0 > t_1 > ... > t_{steps-1}, warped by rho. Throws UsageError for
  /// steps < 2 or invalid bounds.
  std::vector<double> levels(int steps) const;

  void validate() const;
  nlohmann::json to_json() const;
  static NoiseSchedule from_json(const nlohmann::json& doc);
};

struct Perturbed {
  Eigen::MatrixXd ht;
  Eigen::MatrixXd eta;
};

/// H_t = H_0 + alpha(t) * eta with eta ~ N(0, I) drawn from `seed`.
Perturbed perturb(const Eigen::MatrixXd& h0, double t, std::uint64_t seed,
                  const NoiseSchedule& schedule = {});

struct ScoreConfig {
  std::vector<int> hidden{256, 256};
  int epochs = 1000;
  int batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static ScoreConfig from_json(const nlohmann::json& doc);
};

/// Number of time features appended to each latent row.
inline constexpr int kTimeFeatures = 9;

/// [log(sigma)/4, sin(2^j pi c), cos(2^j pi c) for j = 0..3] where c is
/// log(sigma) rescaled to [0, 1] over the schedule bounds.
Eigen::RowVectorXd time_features(double sigma, const NoiseSchedule& schedule);

/// Noise predictor eta_phi(H_t, t).
struct ScoreModel {
  static constexpr std::string_view kFormat = "tabflow.score_model";
  static constexpr int kVersion = 1;
  static constexpr std::string_view kConvention = "karras_ve_alpha_t_eq_t";

  NoiseSchedule schedule;
  ScoreConfig config;
  int d_latent = 0;
  nn::Mlp net;  // d_latent + kTimeFeatures -> hidden -> d_latent
  std::vector<double> loss_trace;  // mean loss per epoch

  /// Noise prediction for each row at its own level.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& ht, const Eigen::VectorXd& sigmas) const;

  nlohmann::json to_json() const;
  static ScoreModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static ScoreModel load(const std::filesystem::path& path);
};

ScoreModel init_score_model(int d_latent, const NoiseSchedule& schedule, const ScoreConfig& config);

/// Mean over rows of ||eta_phi(H_0 + sigma eta, sigma) - eta||^2. Adds
/// dL/dparams into `grads` when given.
double score_loss(const ScoreModel& model, const Eigen::MatrixXd& h0, const Eigen::MatrixXd& eta,
                  const Eigen::VectorXd& sigmas, nn::Gradients* grads = nullptr);

/// Denoising score matching with sigma drawn log-uniformly per row. Throws
/// NumericError on a non-finite loss.
ScoreModel train_score(const Eigen::MatrixXd& latents, const NoiseSchedule& schedule,
                       const ScoreConfig& config);

enum class SamplerMode { kSde, kOde };

struct SamplerConfig {
  int steps = 50;
  SamplerMode mode = SamplerMode::kSde;
  std::uint64_t seed = 0;
};

SamplerMode parse_sampler_mode(std::string_view text);

/// Starts from N(0, sigma_max^2 I) and integrates the reverse dynamics with
/// Euler-Maruyama down the schedule levels. Throws NumericError naming the
/// step when the state turns non-finite.
Eigen::MatrixXd sample_latents(const ScoreModel& model, std::size_t n, const SamplerConfig& config);

}  // namespace tabflow
