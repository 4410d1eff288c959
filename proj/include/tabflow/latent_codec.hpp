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
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tabflow/nn.hpp"
#include "tabflow/table.hpp"

namespace tabflow {

/// Per-column tokenizer into a dense vector: numeric and datetime columns
/// become one standardized scalar, categorical columns a one-hot block.
class ColumnCodec {
 public:
  static constexpr double kStdFloor = 1e-8;

  struct Column {
    ColumnSchema schema;
    int offset = 0;  // first slot in the encoded row
    int width = 1;
    // numeric and datetime
    double mean = 0.0;
    double std = 1.0;
    double min = 0.0;
    double max = 0.0;
    std::int64_t quantum = 1;  // datetime only
    // categorical, in first-seen order
    std::vector<std::string> vocabulary;

    bool operator==(const Column&) const = default;
  };

  ColumnCodec() = default;
  explicit ColumnCodec(std::vector<Column> columns);

  const std::vector<Column>& columns() const { return columns_; }
  std::vector<ColumnSchema> schema() const;
  int width() const { return width_; }

  /// Throws DataError for missing cells, schema mismatch, or a categorical
  /// token outside the vocabulary (naming column and token).
  Eigen::MatrixXd encode(const Table& table) const;

  /// Index of a token within a categorical column's vocabulary.
  std::optional<int> token_index(std::size_t column, std::string_view token) const;

  nlohmann::json to_json() const;
  static ColumnCodec from_json(const nlohmann::json& doc);

  bool operator==(const ColumnCodec& other) const { return columns_ == other.columns_; }

 private:
  std::vector<Column> columns_;
  std::vector<std::unordered_map<std::string, int>> index_;
  int width_ = 0;
};

/// Numeric moments are population moments with std floored at kStdFloor.
ColumnCodec fit_codec(const Table& table);

struct VaeConfig {
  int d_latent = 0;  // 0 selects min(64, 4 * columns)
  std::vector<int> hidden{256, 256};
  int epochs = 500;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double beta_kl = 1e-3;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static VaeConfig from_json(const nlohmann::json& doc);
};

struct VaeModel {
  static constexpr std::string_view kFormat = "tabflow.vae";
  static constexpr int kVersion = 1;

  nn::Mlp encoder;  // codec width -> hidden -> 2 * d_latent (mean, log-variance)
  nn::Mlp decoder;  // d_latent -> hidden -> codec width (scalars and logits)
  int d_latent = 0;
  VaeConfig config;
  Eigen::RowVectorXd latent_mean;  // whitening statistics of mean encodings
  Eigen::RowVectorXd latent_std;
  double initial_reconstruction = 0.0;
  double final_reconstruction = 0.0;
  std::vector<double> loss_trace;  // mean total loss per epoch

  nlohmann::json to_json() const;
  static VaeModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static VaeModel load(const std::filesystem::path& path);
};

struct VaeLoss {
  double total = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
};

/// Batch loss: squared error on standardized numerics plus cross-entropy on
/// categorical logits, plus beta * KL(q || N(0, I)); averaged over rows.
/// `noise` supplies the reparameterization draws (rows x d_latent). When
/// gradient sinks are given, dL/dparams is accumulated into them.
VaeLoss vae_loss(const VaeModel& model, const ColumnCodec& codec, const Eigen::MatrixXd& encoded,
                 const Eigen::MatrixXd& noise, double beta_kl,
                 nn::Gradients* encoder_grads = nullptr, nn::Gradients* decoder_grads = nullptr);

/// Builds networks for the codec without training them.
VaeModel init_vae(const ColumnCodec& codec, const VaeConfig& config);

/// Minibatch Adam on vae_loss; deterministic for a fixed seed. Throws
/// NumericError on a non-finite loss. Whitening statistics are fitted on the
/// mean encodings of the training rows.
VaeModel train_vae(const Table& table, const ColumnCodec& codec, const VaeConfig& config);

/// Latent rows plus the whitening statistics applied to them.
struct LatentMatrix {
  Eigen::MatrixXd values;
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd std;
};

enum class EncodeMode { kMean, kSample };

LatentMatrix encode(const VaeModel& model, const ColumnCodec& codec, const Table& table,
                    EncodeMode mode = EncodeMode::kMean, std::uint64_t seed = 0);

/// Un-whitens, runs the decoder, de-standardizes numerics and clips them to
/// the training range, and picks the arg-max token (lowest index on ties).
Table decode(const VaeModel& model, const ColumnCodec& codec, const Eigen::MatrixXd& whitened);

}  // namespace tabflow
