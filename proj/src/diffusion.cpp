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

#include "tabflow/diffusion.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tabflow/error.hpp"
#include "tabflow/json_io.hpp"

namespace tabflow {

using nlohmann::json;

void NoiseSchedule::validate() const {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) || !(rho > 0.0)) {
    throw UsageError(fmt::format("invalid noise schedule: sigma_min={} sigma_max={} rho={}",
                                 sigma_min, sigma_max, rho));
  }
}

std::vector<double> NoiseSchedule::levels(int steps) const {
  validate();
  if (steps < 2) throw UsageError(fmt::format("sampler needs at least 2 steps, got {}", steps));
  const double hi = std::pow(sigma_max, 1.0 / rho);
  const double lo = std::pow(sigma_min, 1.0 / rho);
  std::vector<double> t(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    t[static_cast<std::size_t>(i)] = std::pow(hi + (static_cast<double>(i) / (steps - 1)) * (lo - hi), rho);
  }
  return t;
}

json NoiseSchedule::to_json() const {
  return {{"sigma_min", sigma_min}, {"sigma_max", sigma_max}, {"rho", rho}};
}

NoiseSchedule NoiseSchedule::from_json(const json& doc) {
  NoiseSchedule s;
  try {
    s.sigma_min = doc.value("sigma_min", s.sigma_min);
    s.sigma_max = doc.value("sigma_max", s.sigma_max);
    s.rho = doc.value("rho", s.rho);
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("malformed noise schedule: {}", e.what()));
  }
  s.validate();
  return s;
}

Perturbed perturb(const Eigen::MatrixXd& h0, double t, std::uint64_t seed,
                  const NoiseSchedule& schedule) {
  if (t < schedule.sigma_min || t > schedule.sigma_max) {
    throw UsageError(fmt::format("noise level {} outside [{}, {}]", t, schedule.sigma_min,
                                 schedule.sigma_max));
  }
  std::mt19937_64 rng(seed);
  Perturbed p;
  p.eta = nn::standard_normal(h0.rows(), h0.cols(), rng);
  p.ht = h0 + schedule.alpha(t) * p.eta;
  return p;
}

json ScoreConfig::to_json() const {
  return {{"hidden", hidden},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"seed", seed}};
}

ScoreConfig ScoreConfig::from_json(const json& doc) {
  ScoreConfig c;
  try {
    c.hidden = doc.value("hidden", c.hidden);
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.seed = doc.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("malformed diffusion config: {}", e.what()));
  }
  if (c.epochs < 0 || c.batch_size < 1 || c.learning_rate < 0) {
    throw UsageError("diffusion config values out of range");
  }
  return c;
}

Eigen::RowVectorXd time_features(double sigma, const NoiseSchedule& schedule) {
  const double ls = std::log(sigma);
  const double c = (ls - std::log(schedule.sigma_min)) /
                   (std::log(schedule.sigma_max) - std::log(schedule.sigma_min));
  Eigen::RowVectorXd f(kTimeFeatures);
  f(0) = ls / 4.0;
  for (int j = 0; j < 4; ++j) {
    const double w = std::ldexp(std::numbers::pi, j);
    f(1 + 2 * j) = std::sin(w * c);
    f(2 + 2 * j) = std::cos(w * c);
  }
  return f;
}

namespace {

Eigen::MatrixXd net_input(const Eigen::MatrixXd& ht, const Eigen::VectorXd& sigmas,
                          const NoiseSchedule& schedule) {
  Eigen::MatrixXd x(ht.rows(), ht.cols() + kTimeFeatures);
  x.leftCols(ht.cols()) = ht;
  for (Eigen::Index r = 0; r < ht.rows(); ++r) {
    x.row(r).tail(kTimeFeatures) = time_features(sigmas(r), schedule);
  }
  return x;
}

}  // namespace

Eigen::MatrixXd ScoreModel::predict(const Eigen::MatrixXd& ht, const Eigen::VectorXd& sigmas) const {
  return net.forward(net_input(ht, sigmas, schedule));
}

json ScoreModel::to_json() const {
  return {{"format", kFormat},
          {"version", kVersion},
          {"convention", kConvention},
          {"schedule", schedule.to_json()},
          {"config", config.to_json()},
          {"d_latent", d_latent},
          {"net", net.to_json()},
          {"loss_trace", loss_trace}};
}

ScoreModel ScoreModel::from_json(const json& doc) {
  require_format(doc, std::string(kFormat), kVersion);
  ScoreModel m;
  try {
    if (doc.at("convention").get<std::string>() != kConvention) {
      throw UsageError(fmt::format("unsupported diffusion convention '{}'",
                                   doc.at("convention").get<std::string>()));
    }
    m.schedule = NoiseSchedule::from_json(doc.at("schedule"));
    m.config = ScoreConfig::from_json(doc.at("config"));
    m.d_latent = doc.at("d_latent").get<int>();
    m.net = nn::Mlp::from_json(doc.at("net"));
    m.loss_trace = doc.at("loss_trace").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("malformed diffusion checkpoint: {}", e.what()));
  }
  if (m.net.input_width() != m.d_latent + kTimeFeatures || m.net.output_width() != m.d_latent) {
    throw UsageError("diffusion checkpoint widths do not match d_latent");
  }
  return m;
}

void ScoreModel::save(const std::filesystem::path& path) const { write_json_file(path, to_json()); }

ScoreModel ScoreModel::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

ScoreModel init_score_model(int d_latent, const NoiseSchedule& schedule, const ScoreConfig& config) {
  schedule.validate();
  if (d_latent < 1) throw UsageError("score model needs d_latent >= 1");
  ScoreModel m;
  m.schedule = schedule;
  m.config = config;
  m.d_latent = d_latent;
  std::mt19937_64 rng(config.seed);
  std::vector<int> widths{d_latent + kTimeFeatures};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(d_latent);
  m.net = nn::Mlp(widths, rng);
  return m;
}

double score_loss(const ScoreModel& model, const Eigen::MatrixXd& h0, const Eigen::MatrixXd& eta,
                  const Eigen::VectorXd& sigmas, nn::Gradients* grads) {
  Eigen::MatrixXd ht = h0;
  for (Eigen::Index r = 0; r < ht.rows(); ++r) {
    ht.row(r) += model.schedule.alpha(sigmas(r)) * eta.row(r);
  }
  nn::Mlp::Cache cache;
  const Eigen::MatrixXd pred = model.net.forward(net_input(ht, sigmas, model.schedule), &cache);
  const Eigen::MatrixXd diff = pred - eta;
  const double inv_b = 1.0 / static_cast<double>(h0.rows());
  if (grads != nullptr) model.net.backward(cache, 2.0 * inv_b * diff, *grads);
  return diff.squaredNorm() * inv_b;
}

ScoreModel train_score(const Eigen::MatrixXd& latents, const NoiseSchedule& schedule,
                       const ScoreConfig& config) {
  if (latents.rows() < 1) throw DataError("diffusion training needs at least 1 latent row");
  ScoreModel model = init_score_model(static_cast<int>(latents.cols()), schedule, config);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_lo = std::log(schedule.sigma_min);
  const double log_hi = std::log(schedule.sigma_max);
  nn::Adam opt(config.learning_rate);

  const Eigen::Index n = latents.rows();
  const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % (i + 1)]);
    }
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      Eigen::MatrixXd h0(len, latents.cols());
      for (Eigen::Index r = 0; r < len; ++r) {
        h0.row(r) = latents.row(order[static_cast<std::size_t>(start + r)]);
      }
      Eigen::VectorXd sigmas(len);
      for (Eigen::Index r = 0; r < len; ++r) sigmas(r) = std::exp(log_lo + unit(rng) * (log_hi - log_lo));
      const Eigen::MatrixXd eta = nn::standard_normal(len, latents.cols(), rng);
      auto grads = model.net.zero_gradients();
      const double loss = score_loss(model, h0, eta, sigmas, &grads);
      if (!std::isfinite(loss)) {
        throw NumericError(fmt::format("diffusion loss became non-finite at epoch {}", epoch));
      }
      opt.step(model.net, grads);
      epoch_loss += loss * static_cast<double>(len);
    }
    model.loss_trace.push_back(epoch_loss / static_cast<double>(n));
  }
  if (!model.loss_trace.empty()) {
    spdlog::info("diffusion trained: loss {:.6f} -> {:.6f}", model.loss_trace.front(),
                 model.loss_trace.back());
  }
  return model;
}

SamplerMode parse_sampler_mode(std::string_view text) {
  if (text == "sde") return SamplerMode::kSde;
  if (text == "ode") return SamplerMode::kOde;
  throw UsageError(fmt::format("unknown sampler mode '{}'", text));
}

Eigen::MatrixXd sample_latents(const ScoreModel& model, std::size_t n, const SamplerConfig& config) {
  if (n == 0) throw UsageError("sample count must be at least 1");
  const auto t = model.schedule.levels(config.steps);
  std::mt19937_64 rng(config.seed);
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd h = model.schedule.sigma_max * nn::standard_normal(rows, model.d_latent, rng);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double dt = t[i] - t[i + 1];
    // With alpha(t) = t the score is -eta/t, so the drift terms reduce to
    // multiples of the predicted noise.
    const double g = model.schedule.alpha_derivative(t[i]) * dt;
    const Eigen::MatrixXd eta = model.predict(h, Eigen::VectorXd::Constant(rows, t[i]));
    if (config.mode == SamplerMode::kSde) {
      h += -2.0 * g * eta + std::sqrt(2.0 * model.schedule.alpha(t[i]) * g) *
                                nn::standard_normal(rows, model.d_latent, rng);
    } else {
      h -= g * eta;
    }
    if (!h.allFinite()) {
      throw NumericError(fmt::format("sampler state became non-finite at step {}", i));
    }
  }
  return h;
}

}  // namespace tabflow
