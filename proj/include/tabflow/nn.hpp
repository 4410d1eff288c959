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

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace tabflow::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  RowVector bias;
};

/// Gradients share the layout of the network's layers.
using Gradients = std::vector<DenseLayer>;

/// Fully connected network with SiLU on hidden layers and a linear output.
/// Rows of the input matrix are samples.
class Mlp {
 public:
  struct Cache {
    std::vector<Matrix> inputs;  // input to each layer
    std::vector<Matrix> pre;     // pre-activation of each layer
  };

  Mlp() = default;
  /// widths = {input, hidden..., output}; weights ~ N(0, 1/fan_in), zero bias.
  Mlp(const std::vector<int>& widths, std::mt19937_64& rng);

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;

  /// Adds dL/dparams into `grads` and returns dL/dx.
  Matrix backward(const Cache& cache, const Matrix& grad_out, Gradients& grads) const;

  Gradients zero_gradients() const;

  int input_width() const { return static_cast<int>(layers_.front().weight.rows()); }
  int output_width() const { return static_cast<int>(layers_.back().weight.cols()); }
  std::vector<int> widths() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  /// Flat view over all parameters: weights (column-major) then bias, layer
  /// by layer.
  std::size_t num_parameters() const;
  double& parameter(std::size_t index);
  double parameter(std::size_t index) const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& doc);

  bool operator==(const Mlp& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Flat read access into a gradient set, matching Mlp::parameter.
double gradient_at(const Gradients& grads, std::size_t index);

/// Adam optimizer bound to one network's parameter layout.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(Mlp& net, const Gradients& grads);

 private:
  struct Moments {
    Gradients m;
    Gradients v;
    long t = 0;
  };
  double lr_, beta1_, beta2_, eps_;
  Moments state_;
  bool initialized_ = false;
};

/// Matrix of independent N(0, 1) draws.
Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

}  // namespace tabflow::nn
