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

#include "tabflow/latent_codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tabflow/compressor.hpp"
#include "tabflow/error.hpp"
#include "tabflow/json_io.hpp"

namespace tabflow {

using nlohmann::json;

namespace {

constexpr Eigen::Index kChunkRows = 4096;

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericError(fmt::format("non-finite values in {}", what));
}

}  // namespace

ColumnCodec::ColumnCodec(std::vector<Column> columns) : columns_(std::move(columns)) {
  width_ = 0;
  index_.resize(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    auto& col = columns_[c];
    col.offset = width_;
    if (col.schema.kind == ColumnKind::kCategorical) {
      col.width = static_cast<int>(col.vocabulary.size());
      for (std::size_t i = 0; i < col.vocabulary.size(); ++i) {
        index_[c].emplace(col.vocabulary[i], static_cast<int>(i));
      }
    } else {
      col.width = 1;
    }
    width_ += col.width;
  }
}

std::vector<ColumnSchema> ColumnCodec::schema() const {
  std::vector<ColumnSchema> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.schema);
  return out;
}

std::optional<int> ColumnCodec::token_index(std::size_t column, std::string_view token) const {
  const auto& idx = index_.at(column);
  auto it = idx.find(std::string(token));
  if (it == idx.end()) return std::nullopt;
  return it->second;
}

Eigen::MatrixXd ColumnCodec::encode(const Table& table) const {
  if (table.num_columns() != columns_.size()) {
    throw DataError(fmt::format("table has {} columns, codec expects {}", table.num_columns(),
                                columns_.size()));
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& want = columns_[c].schema;
    const auto& got = table.column(c);
    if (got.name != want.name || got.kind != want.kind) {
      throw DataError(fmt::format("column {} is '{}' ({}), codec expects '{}' ({})", c, got.name,
                                  to_string(got.kind), want.name, to_string(want.kind)));
    }
  }
  const auto rows = static_cast<Eigen::Index>(table.num_rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, width_);
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& col = columns_[c];
    // Map the table's own vocabulary once per column.
    std::vector<int> remap;
    if (col.schema.kind == ColumnKind::kCategorical) {
      for (const auto& token : table.vocabulary(c)) {
        auto idx = token_index(c, token);
        remap.push_back(idx ? *idx : -1);
      }
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto row = static_cast<std::size_t>(r);
      if (table.is_missing(row, c)) {
        throw DataError(fmt::format("missing cell in column '{}' at row {}", col.schema.name, r));
      }
      if (col.schema.kind == ColumnKind::kCategorical) {
        const int idx = remap[table.category_id(row, c).index];
        if (idx < 0) {
          throw DataError(fmt::format("token '{}' in column '{}' is not in the codec vocabulary",
                                      table.category(row, c), col.schema.name));
        }
        out(r, col.offset + idx) = 1.0;
      } else {
        out(r, col.offset) = (table.as_double(row, c) - col.mean) / col.std;
      }
    }
  }
  return out;
}

json ColumnCodec::to_json() const {
  json cols = json::array();
  for (const auto& c : columns_) {
    json j{{"schema", tabflow::to_json(c.schema)}};
    if (c.schema.kind == ColumnKind::kCategorical) {
      j["vocabulary"] = c.vocabulary;
    } else {
      j["mean"] = c.mean;
      j["std"] = c.std;
      j["min"] = c.min;
      j["max"] = c.max;
      if (c.schema.kind == ColumnKind::kDatetime) j["quantum"] = c.quantum;
    }
    cols.push_back(std::move(j));
  }
  return {{"format", "tabflow.codec"}, {"version", 1}, {"columns", cols}};
}

ColumnCodec ColumnCodec::from_json(const json& doc) {
  require_format(doc, "tabflow.codec", 1);
  std::vector<Column> cols;
  try {
    for (const auto& j : doc.at("columns")) {
      Column c;
      c.schema = column_schema_from_json(j.at("schema"));
      if (c.schema.kind == ColumnKind::kCategorical) {
        c.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
      } else {
        c.mean = j.at("mean").get<double>();
        c.std = j.at("std").get<double>();
        c.min = j.at("min").get<double>();
        c.max = j.at("max").get<double>();
        c.quantum = j.value("quantum", std::int64_t{1});
      }
      cols.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("malformed codec: {}", e.what()));
  }
  return ColumnCodec(std::move(cols));
}

ColumnCodec fit_codec(const Table& table) {
  if (table.num_rows() == 0) throw DataError("cannot fit a codec on an empty table");
  if (table.has_missing()) throw DataError("cannot fit a codec on a table with missing cells");
  std::vector<ColumnCodec::Column> cols;
  const auto n = static_cast<double>(table.num_rows());
  for (std::size_t c = 0; c < table.num_columns(); ++c) {
    ColumnCodec::Column col;
    col.schema = table.column(c);
    if (col.schema.kind == ColumnKind::kCategorical) {
      // The table interns tokens in first-seen order, but a row subset may
      // carry unused tokens; rebuild from the cells.
      std::vector<char> seen(table.vocabulary(c).size(), 0);
      for (std::size_t r = 0; r < table.num_rows(); ++r) {
        const auto id = table.category_id(r, c).index;
        if (!seen[id]) {
          seen[id] = 1;
          col.vocabulary.push_back(table.vocabulary(c)[id]);
        }
      }
    } else {
      double sum = 0.0;
      col.min = table.as_double(0, c);
      col.max = col.min;
      for (std::size_t r = 0; r < table.num_rows(); ++r) {
        const double v = table.as_double(r, c);
        sum += v;
        col.min = std::min(col.min, v);
        col.max = std::max(col.max, v);
      }
      col.mean = sum / n;
      double ss = 0.0;
      for (std::size_t r = 0; r < table.num_rows(); ++r) {
        const double d = table.as_double(r, c) - col.mean;
        ss += d * d;
      }
      col.std = std::sqrt(ss / n);
      if (col.std < ColumnCodec::kStdFloor) {
        spdlog::warn("codec: column '{}' is constant; std floored at {}", col.schema.name,
                     ColumnCodec::kStdFloor);
        col.std = ColumnCodec::kStdFloor;
      }
      if (col.schema.kind == ColumnKind::kDatetime) {
        std::vector<std::int64_t> secs;
        secs.reserve(table.num_rows());
        for (std::size_t r = 0; r < table.num_rows(); ++r) {
          secs.push_back(table.timestamp(r, c).seconds);
        }
        col.quantum = time_quantum(secs);
      }
    }
    cols.push_back(std::move(col));
  }
  return ColumnCodec(std::move(cols));
}

json VaeConfig::to_json() const {
  return {{"d_latent", d_latent},     {"hidden", hidden},
          {"epochs", epochs},         {"batch_size", batch_size},
          {"learning_rate", learning_rate}, {"beta_kl", beta_kl},
          {"seed", seed}};
}

VaeConfig VaeConfig::from_json(const json& doc) {
  VaeConfig c;
  try {
    c.d_latent = doc.value("d_latent", c.d_latent);
    c.hidden = doc.value("hidden", c.hidden);
    c.epochs = doc.value("epochs", c.epochs);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.beta_kl = doc.value("beta_kl", c.beta_kl);
    c.seed = doc.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("malformed VAE config: {}", e.what()));
  }
  if (c.d_latent < 0 || c.epochs < 0 || c.batch_size < 1 || c.learning_rate < 0 || c.beta_kl < 0) {
    throw UsageError("VAE config values out of range");
  }
  return c;
}

json VaeModel::to_json() const {
  return {{"format", kFormat},
          {"version", kVersion},
          {"config", config.to_json()},
          {"d_latent", d_latent},
          {"encoder", encoder.to_json()},
          {"decoder", decoder.to_json()},
          {"latent_mean", tabflow::to_json(Eigen::VectorXd(latent_mean.transpose()))},
          {"latent_std", tabflow::to_json(Eigen::VectorXd(latent_std.transpose()))},
          {"initial_reconstruction", initial_reconstruction},
          {"final_reconstruction", final_reconstruction},
          {"loss_trace", loss_trace}};
}

VaeModel VaeModel::from_json(const json& doc) {
  require_format(doc, std::string(kFormat), kVersion);
  VaeModel m;
  try {
    m.config = VaeConfig::from_json(doc.at("config"));
    m.d_latent = doc.at("d_latent").get<int>();
    m.encoder = nn::Mlp::from_json(doc.at("encoder"));
    m.decoder = nn::Mlp::from_json(doc.at("decoder"));
    m.latent_mean = vector_from_json(doc.at("latent_mean")).transpose();
    m.latent_std = vector_from_json(doc.at("latent_std")).transpose();
    m.initial_reconstruction = doc.at("initial_reconstruction").get<double>();
    m.final_reconstruction = doc.at("final_reconstruction").get<double>();
    m.loss_trace = doc.at("loss_trace").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("malformed VAE checkpoint: {}", e.what()));
  }
  if (m.encoder.output_width() != 2 * m.d_latent || m.decoder.input_width() != m.d_latent) {
    throw UsageError("VAE checkpoint widths do not match d_latent");
  }
  return m;
}

void VaeModel::save(const std::filesystem::path& path) const { write_json_file(path, to_json()); }

VaeModel VaeModel::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

VaeLoss vae_loss(const VaeModel& model, const ColumnCodec& codec, const Eigen::MatrixXd& encoded,
                 const Eigen::MatrixXd& noise, double beta_kl, nn::Gradients* encoder_grads,
                 nn::Gradients* decoder_grads) {
  const Eigen::Index b = encoded.rows();
  const int d = model.d_latent;
  const double inv_b = 1.0 / static_cast<double>(b);

  nn::Mlp::Cache enc_cache;
  nn::Mlp::Cache dec_cache;
  const Eigen::MatrixXd stats = model.encoder.forward(encoded, &enc_cache);
  const Eigen::MatrixXd mu = stats.leftCols(d);
  const Eigen::MatrixXd logvar = stats.rightCols(d);
  const Eigen::MatrixXd sigma = (0.5 * logvar.array()).exp().matrix();
  const Eigen::MatrixXd z = mu + sigma.cwiseProduct(noise);
  const Eigen::MatrixXd out = model.decoder.forward(z, &dec_cache);

  VaeLoss loss;
  Eigen::MatrixXd grad_out = Eigen::MatrixXd::Zero(b, out.cols());
  for (const auto& col : codec.columns()) {
    if (col.schema.kind != ColumnKind::kCategorical) {
      const auto diff = out.col(col.offset) - encoded.col(col.offset);
      loss.reconstruction += diff.squaredNorm();
      grad_out.col(col.offset) = 2.0 * diff * inv_b;
      continue;
    }
    const auto logits = out.middleCols(col.offset, col.width);
    for (Eigen::Index r = 0; r < b; ++r) {
      const double mx = logits.row(r).maxCoeff();
      const Eigen::RowVectorXd e = (logits.row(r).array() - mx).exp().matrix();
      const double sum = e.sum();
      Eigen::Index target = 0;
      encoded.row(r).segment(col.offset, col.width).maxCoeff(&target);
      loss.reconstruction += mx + std::log(sum) - logits(r, target);
      grad_out.row(r).segment(col.offset, col.width) = e / sum * inv_b;
      grad_out(r, col.offset + target) -= inv_b;
    }
  }
  loss.kl = 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array()).sum();
  loss.reconstruction *= inv_b;
  loss.kl *= inv_b;
  loss.total = loss.reconstruction + beta_kl * loss.kl;

  if (encoder_grads != nullptr && decoder_grads != nullptr) {
    const Eigen::MatrixXd grad_z = model.decoder.backward(dec_cache, grad_out, *decoder_grads);
    Eigen::MatrixXd grad_stats(b, 2 * d);
    grad_stats.leftCols(d) = grad_z + beta_kl * inv_b * mu;
    grad_stats.rightCols(d) =
        (0.5 * grad_z.array() * sigma.array() * noise.array() +
         0.5 * beta_kl * inv_b * (logvar.array().exp() - 1.0))
            .matrix();
    model.encoder.backward(enc_cache, grad_stats, *encoder_grads);
  }
  return loss;
}

VaeModel init_vae(const ColumnCodec& codec, const VaeConfig& config) {
  if (codec.width() == 0) throw DataError("codec has no columns");
  VaeModel m;
  m.config = config;
  m.d_latent = config.d_latent > 0
                   ? config.d_latent
                   : std::min(64, 4 * static_cast<int>(codec.columns().size()));
  std::mt19937_64 rng(config.seed);
  std::vector<int> enc{codec.width()};
  enc.insert(enc.end(), config.hidden.begin(), config.hidden.end());
  enc.push_back(2 * m.d_latent);
  std::vector<int> dec{m.d_latent};
  dec.insert(dec.end(), config.hidden.begin(), config.hidden.end());
  dec.push_back(codec.width());
  m.encoder = nn::Mlp(enc, rng);
  m.decoder = nn::Mlp(dec, rng);
  m.latent_mean = Eigen::RowVectorXd::Zero(m.d_latent);
  m.latent_std = Eigen::RowVectorXd::Ones(m.d_latent);
  return m;
}

namespace {

Eigen::MatrixXd encoder_means(const VaeModel& model, const Eigen::MatrixXd& encoded) {
  Eigen::MatrixXd mu(encoded.rows(), model.d_latent);
  for (Eigen::Index start = 0; start < encoded.rows(); start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, encoded.rows() - start);
    mu.middleRows(start, len) =
        model.encoder.forward(encoded.middleRows(start, len)).leftCols(model.d_latent);
  }
  return mu;
}

}  // namespace

VaeModel train_vae(const Table& table, const ColumnCodec& codec, const VaeConfig& config) {
  if (table.num_rows() < 2) throw DataError("VAE training needs at least 2 rows");
  VaeModel model = init_vae(codec, config);
  const Eigen::MatrixXd data = codec.encode(table);
  const Eigen::Index n = data.rows();
  const int d = model.d_latent;

  const Eigen::MatrixXd zero_noise = Eigen::MatrixXd::Zero(n, d);
  model.initial_reconstruction = vae_loss(model, codec, data, zero_noise, 0.0).reconstruction;

  // Separate stream from the weight initialization draws in init_vae.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  nn::Adam enc_opt(config.learning_rate);
  nn::Adam dec_opt(config.learning_rate);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % (i + 1)]);
    }
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      Eigen::MatrixXd x(len, data.cols());
      for (Eigen::Index r = 0; r < len; ++r) {
        x.row(r) = data.row(order[static_cast<std::size_t>(start + r)]);
      }
      const Eigen::MatrixXd eps = nn::standard_normal(len, d, rng);
      auto eg = model.encoder.zero_gradients();
      auto dg = model.decoder.zero_gradients();
      const VaeLoss loss = vae_loss(model, codec, x, eps, config.beta_kl, &eg, &dg);
      if (!std::isfinite(loss.total)) {
        throw NumericError(fmt::format(
            "VAE loss became non-finite at epoch {} (reconstruction {}, kl {})", epoch,
            loss.reconstruction, loss.kl));
      }
      enc_opt.step(model.encoder, eg);
      dec_opt.step(model.decoder, dg);
      epoch_loss += loss.total * static_cast<double>(len);
    }
    model.loss_trace.push_back(epoch_loss / static_cast<double>(n));
  }

  model.final_reconstruction = vae_loss(model, codec, data, zero_noise, 0.0).reconstruction;
  const Eigen::MatrixXd mu = encoder_means(model, data);
  require_finite(mu, "VAE mean encodings");
  model.latent_mean = mu.colwise().mean();
  const Eigen::MatrixXd centered = mu.rowwise() - model.latent_mean;
  model.latent_std = (centered.array().square().colwise().sum() / static_cast<double>(n))
                         .sqrt()
                         .max(ColumnCodec::kStdFloor)
                         .matrix();
  spdlog::info("VAE trained: reconstruction {:.6f} -> {:.6f}", model.initial_reconstruction,
               model.final_reconstruction);
  return model;
}

LatentMatrix encode(const VaeModel& model, const ColumnCodec& codec, const Table& table,
                    EncodeMode mode, std::uint64_t seed) {
  const Eigen::MatrixXd data = codec.encode(table);
  Eigen::MatrixXd h(data.rows(), model.d_latent);
  std::mt19937_64 rng(seed);
  for (Eigen::Index start = 0; start < data.rows(); start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, data.rows() - start);
    const Eigen::MatrixXd stats = model.encoder.forward(data.middleRows(start, len));
    Eigen::MatrixXd z = stats.leftCols(model.d_latent);
    if (mode == EncodeMode::kSample) {
      const Eigen::MatrixXd sigma = (0.5 * stats.rightCols(model.d_latent).array()).exp().matrix();
      z += sigma.cwiseProduct(nn::standard_normal(len, model.d_latent, rng));
    }
    h.middleRows(start, len) = z;
  }
  require_finite(h, "latent encodings");
  LatentMatrix out;
  out.values = (h.rowwise() - model.latent_mean).array().rowwise() / model.latent_std.array();
  out.mean = model.latent_mean;
  out.std = model.latent_std;
  return out;
}

Table decode(const VaeModel& model, const ColumnCodec& codec, const Eigen::MatrixXd& whitened) {
  if (whitened.cols() != model.d_latent) {
    throw DataError(fmt::format("latent width {} does not match d_latent {}", whitened.cols(),
                                model.d_latent));
  }
  const Eigen::MatrixXd h =
      (whitened.array().rowwise() * model.latent_std.array()).rowwise() +
      model.latent_mean.array();
  Eigen::MatrixXd out(h.rows(), codec.width());
  for (Eigen::Index start = 0; start < h.rows(); start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, h.rows() - start);
    out.middleRows(start, len) = model.decoder.forward(h.middleRows(start, len));
  }
  require_finite(out, "decoder output");

  TableBuilder builder(codec.schema());
  builder.reserve(static_cast<std::size_t>(out.rows()));
  std::vector<Value> row(codec.columns().size());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < codec.columns().size(); ++c) {
      const auto& col = codec.columns()[c];
      if (col.schema.kind == ColumnKind::kCategorical) {
        int best = 0;
        for (int k = 1; k < col.width; ++k) {
          if (out(r, col.offset + k) > out(r, col.offset + best)) best = k;
        }
        row[c] = col.vocabulary[static_cast<std::size_t>(best)];
        continue;
      }
      const double v = std::clamp(col.mean + out(r, col.offset) * col.std, col.min, col.max);
      if (col.schema.kind == ColumnKind::kDatetime) {
        const auto q = static_cast<double>(col.quantum);
        row[c] = Timestamp{static_cast<std::int64_t>(std::llround(v / q)) * col.quantum};
      } else {
        row[c] = v;
      }
    }
    builder.add_row(row);
  }
  return std::move(builder).build();
}

}  // namespace tabflow
