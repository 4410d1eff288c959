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

#include "tabflow/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tabflow/error.hpp"
#include "tabflow/metrics.hpp"

namespace tabflow {

namespace {

/// Row-by-component log of weight_k * N(x | mean_k, var_k).
Eigen::MatrixXd weighted_log_density(const GmmModel& m, const Eigen::MatrixXd& x) {
  const Eigen::Index k = m.weights.size();
  const double d = static_cast<double>(x.cols());
  Eigen::MatrixXd out(x.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double lw = m.weights(j) > 0.0 ? std::log(m.weights(j)) : -std::numeric_limits<double>::infinity();
    const Eigen::RowVectorXd inv_var = m.variances.row(j).cwiseInverse();
    const double log_norm = -0.5 * (d * std::log(2.0 * std::numbers::pi) + m.variances.row(j).array().log().sum());
    const Eigen::MatrixXd diff = x.rowwise() - m.means.row(j);
    out.col(j) = ((diff.array().square().rowwise() * inv_var.array()).rowwise().sum() * -0.5 + log_norm + lw).matrix();
  }
  return out;
}

Eigen::VectorXd logsumexp_rows(const Eigen::MatrixXd& a) {
  Eigen::VectorXd out(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double mx = a.row(r).maxCoeff();
    if (!std::isfinite(mx)) {
      out(r) = mx;
      continue;
    }
    out(r) = mx + std::log((a.row(r).array() - mx).exp().sum());
  }
  return out;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(k, x.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = x.row(pick(rng));
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double u = unit(rng) * total;
      for (chosen = 0; chosen < n - 1; ++chosen) {
        u -= d2(chosen);
        if (u < 0.0) break;
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(c) = x.row(chosen);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

Eigen::VectorXd gmm_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& data) {
  if (data.cols() != model.means.cols()) throw DataError("GMM data width does not match the model");
  return logsumexp_rows(weighted_log_density(model, data));
}

double gmm_mean_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& data) {
  return gmm_log_likelihood(model, data).mean();
}

GmmModel fit_gmm(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const GmmOptions& options) {
  if (k < 1) throw UsageError(fmt::format("GMM needs K >= 1, got {}", k));
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n < k) throw DataError(fmt::format("GMM with K={} needs at least {} rows, got {}", k, k, n));
  if (d == 0) throw DataError("GMM needs at least one column");

  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::RowVectorXd var =
      (data.rowwise() - mean).array().square().colwise().mean().max(GmmModel::kVarianceFloor).matrix();

  GmmModel m;
  const bool degenerate = ((data.rowwise() - data.row(0)).array() == 0.0).all();
  if (degenerate) {
    if (k > 1) spdlog::warn("GMM: all rows identical; fitting a single component");
    m.weights = Eigen::VectorXd::Ones(1);
    m.means = mean;
    m.variances = var;
    m.log_likelihood_trace.push_back(gmm_mean_log_likelihood(m, data));
    return m;
  }

  std::mt19937_64 rng(seed);
  m.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  m.means = kmeans_plus_plus(data, k, rng);
  m.variances = var.replicate(k, 1);

  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::MatrixXd lp = weighted_log_density(m, data);
    const Eigen::VectorXd ll = logsumexp_rows(lp);
    const double mean_ll = ll.mean();
    if (!std::isfinite(mean_ll)) throw NumericError("GMM log-likelihood became non-finite");
    if (!m.log_likelihood_trace.empty() &&
        mean_ll - m.log_likelihood_trace.back() < options.tolerance) {
      m.log_likelihood_trace.push_back(mean_ll);
      break;
    }
    m.log_likelihood_trace.push_back(mean_ll);

    const Eigen::MatrixXd resp = (lp.colwise() - ll).array().exp().matrix();
    const Eigen::VectorXd nk = resp.colwise().sum().transpose();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (nk(j) <= 0.0) {
        m.weights(j) = 0.0;  // keeps its mean and variance
        continue;
      }
      m.weights(j) = nk(j) / static_cast<double>(n);
      const Eigen::RowVectorXd mu = (resp.col(j).transpose() * data) / nk(j);
      const Eigen::MatrixXd diff = data.rowwise() - mu;
      m.means.row(j) = mu;
      m.variances.row(j) = ((resp.col(j).transpose() * diff.array().square().matrix()) / nk(j))
                               .array()
                               .max(GmmModel::kVarianceFloor)
                               .matrix();
    }
  }
  return m;
}

std::vector<std::string> default_dsi_columns(const Table& table) {
  std::vector<std::string> cols;
  for (const auto& c : table.schema()) {
    if (c.kind != ColumnKind::kCategorical || c.role == ColumnRole::kTarget) cols.push_back(c.name);
  }
  return cols;
}

double dsi(const Table& real, const Table& synth, std::span<const std::string> columns, int k,
           std::uint64_t seed) {
  if (columns.empty()) throw UsageError("DSI needs at least one column");
  const Table r = real.select_columns(columns);
  const Table s = synth.select_columns(columns);
  const Embedder embedder(r);
  const GmmModel model = fit_gmm(embedder.embed(r), k, seed);
  const double ll_real = gmm_mean_log_likelihood(model, embedder.embed(r));
  const double ll_synth = gmm_mean_log_likelihood(model, embedder.embed(s));
  return 100.0 * std::exp(-std::abs(ll_real - ll_synth));
}

}  // namespace tabflow
