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

#include "tabflow/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "tabflow/json_io.hpp"

namespace tabflow::nn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix silu(const Matrix& z) {
  return z.unaryExpr([](double v) { return v * sigmoid(v); });
}

Matrix silu_grad(const Matrix& z) {
  return z.unaryExpr([](double v) {
    const double s = sigmoid(v);
    return s * (1.0 + v * (1.0 - s));
  });
}

}  // namespace

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Fill row by row so draws land in the same cells regardless of storage order.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

Mlp::Mlp(const std::vector<int>& widths, std::mt19937_64& rng) {
  if (widths.size() < 2) throw std::invalid_argument("Mlp needs at least input and output widths");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    DenseLayer layer;
    const double scale = std::sqrt(1.0 / widths[i]);
    layer.weight = standard_normal(widths[i], widths[i + 1], rng) * scale;
    layer.bias = RowVector::Zero(widths[i + 1]);
    layers_.push_back(std::move(layer));
  }
}

std::vector<int> Mlp::widths() const {
  std::vector<int> w;
  if (layers_.empty()) return w;
  w.push_back(static_cast<int>(layers_.front().weight.rows()));
  for (const auto& l : layers_) w.push_back(static_cast<int>(l.weight.cols()));
  return w;
}

Matrix Mlp::forward(const Matrix& x, Cache* cache) const {
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = h * layers_[i].weight;
    z.rowwise() += layers_[i].bias;
    if (cache != nullptr) {
      cache->inputs.push_back(h);
      cache->pre.push_back(z);
    }
    h = (i + 1 < layers_.size()) ? silu(z) : std::move(z);
  }
  return h;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& grad_out, Gradients& grads) const {
  Matrix g = grad_out;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size()) g = g.cwiseProduct(silu_grad(cache.pre[k]));
    grads[k].weight.noalias() += cache.inputs[k].transpose() * g;
    grads[k].bias += g.colwise().sum();
    g = g * layers_[k].weight.transpose();
  }
  return g;
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), RowVector::Zero(l.bias.size())});
  }
  return g;
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

namespace {

template <typename Layers>
auto& locate(Layers& layers, std::size_t index) {
  for (auto& l : layers) {
    const auto w = static_cast<std::size_t>(l.weight.size());
    if (index < w) return l.weight.data()[index];
    index -= w;
    const auto b = static_cast<std::size_t>(l.bias.size());
    if (index < b) return l.bias.data()[index];
    index -= b;
  }
  throw std::out_of_range("parameter index out of range");
}

}  // namespace

double& Mlp::parameter(std::size_t index) { return locate(layers_, index); }
double Mlp::parameter(std::size_t index) const { return locate(layers_, index); }
double gradient_at(const Gradients& grads, std::size_t index) { return locate(grads, index); }

nlohmann::json Mlp::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) {
    layers.push_back({{"weight", tabflow::to_json(Matrix(l.weight))},
                      {"bias", tabflow::to_json(Eigen::VectorXd(l.bias.transpose()))}});
  }
  return {{"widths", widths()}, {"layers", layers}};
}

Mlp Mlp::from_json(const nlohmann::json& doc) {
  Mlp net;
  for (const auto& l : doc.at("layers")) {
    DenseLayer layer;
    layer.weight = matrix_from_json(l.at("weight"));
    layer.bias = vector_from_json(l.at("bias")).transpose();
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

bool Mlp::operator==(const Mlp& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].weight != other.layers_[i].weight) return false;
    if (layers_[i].bias != other.layers_[i].bias) return false;
  }
  return true;
}

void Adam::step(Mlp& net, const Gradients& grads) {
  if (!initialized_) {
    state_ = Moments{net.zero_gradients(), net.zero_gradients(), 0};
    initialized_ = true;
  }
  Moments* s = &state_;
  ++s->t;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(s->t));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(s->t));
  auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = beta1_ * m + (1.0 - beta1_) * g;
      v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
      param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
    };
    update(layers[i].weight, s->m[i].weight, s->v[i].weight, grads[i].weight);
    update(layers[i].bias, s->m[i].bias, s->v[i].bias, grads[i].bias);
  }
}

}  // namespace tabflow::nn
