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

#include "tabflow/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "tabflow/error.hpp"
#include "tabflow/metrics.hpp"

namespace tabflow {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct LevelNode {
  int id;  // index into the tree
  double g = 0.0;
  double h = 0.0;
  int count = 0;
};

struct Split {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

GbdtModel::Tree fit_tree(const Eigen::MatrixXd& x, const std::vector<std::vector<int>>& sorted,
                         const Eigen::VectorXd& g, const Eigen::VectorXd& h, const GbdtParams& p) {
  const int n = static_cast<int>(x.rows());
  const auto score = [&](double gs, double hs) { return gs * gs / (hs + p.l2); };
  GbdtModel::Tree tree(1);
  std::vector<int> node_of(static_cast<std::size_t>(n), 0);
  std::vector<LevelNode> level{{0, g.sum(), h.sum(), n}};

  for (int depth = 0; depth < p.max_depth && !level.empty(); ++depth) {
    // Slot of each tree node within this level, -1 for finished leaves.
    std::vector<int> slot(tree.size(), -1);
    for (std::size_t s = 0; s < level.size(); ++s) slot[static_cast<std::size_t>(level[s].id)] = static_cast<int>(s);
    std::vector<Split> best(level.size());

    struct Running {
      double g = 0.0;
      double h = 0.0;
      int count = 0;
      double last = 0.0;
    };
    std::vector<Running> run(level.size());
    for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
      std::fill(run.begin(), run.end(), Running{});
      for (int i : sorted[static_cast<std::size_t>(f)]) {
        const int node = node_of[static_cast<std::size_t>(i)];
        if (node < 0) continue;
        const int s = slot[static_cast<std::size_t>(node)];
        if (s < 0) continue;
        auto& r = run[static_cast<std::size_t>(s)];
        const auto& ln = level[static_cast<std::size_t>(s)];
        const double v = x(i, f);
        if (r.count >= p.min_leaf && v > r.last && ln.count - r.count >= p.min_leaf) {
          const double gain = score(r.g, r.h) + score(ln.g - r.g, ln.h - r.h) - score(ln.g, ln.h);
          auto& b = best[static_cast<std::size_t>(s)];
          if (gain > b.gain + 1e-12) {
            double thr = r.last + 0.5 * (v - r.last);
            if (!(thr < v)) thr = r.last;
            b = {gain, f, thr};
          }
        }
        r.g += g(i);
        r.h += h(i);
        ++r.count;
        r.last = v;
      }
    }

    std::vector<LevelNode> next;
    for (std::size_t s = 0; s < level.size(); ++s) {
      const auto& ln = level[s];
      if (best[s].feature < 0) {
        tree[static_cast<std::size_t>(ln.id)].value = -ln.g / (ln.h + p.l2);
        continue;
      }
      const int left = static_cast<int>(tree.size());
      tree.emplace_back();
      tree.emplace_back();
      auto& node = tree[static_cast<std::size_t>(ln.id)];
      node.feature = best[s].feature;
      node.threshold = best[s].threshold;
      node.left = left;
      node.right = left + 1;
      next.push_back({left});
      next.push_back({left + 1});
    }
    // Route rows to the new children and accumulate their sums.
    std::unordered_map<int, std::size_t> next_slot;
    for (std::size_t s = 0; s < next.size(); ++s) next_slot[next[s].id] = s;
    for (int i = 0; i < n; ++i) {
      auto& node_id = node_of[static_cast<std::size_t>(i)];
      if (node_id < 0) continue;
      const auto& node = tree[static_cast<std::size_t>(node_id)];
      if (node.feature < 0) {
        node_id = -1;  // finished leaf
        continue;
      }
      node_id = x(i, node.feature) <= node.threshold ? node.left : node.right;
      auto& ln = next[next_slot.at(node_id)];
      ln.g += g(i);
      ln.h += h(i);
      ++ln.count;
    }
    level = std::move(next);
  }
  for (const auto& ln : level) tree[static_cast<std::size_t>(ln.id)].value = -ln.g / (ln.h + p.l2);
  return tree;
}

double tree_value(const GbdtModel::Tree& tree, const Eigen::MatrixXd& x, Eigen::Index row) {
  int k = 0;
  while (tree[static_cast<std::size_t>(k)].feature >= 0) {
    const auto& n = tree[static_cast<std::size_t>(k)];
    k = x(row, n.feature) <= n.threshold ? n.left : n.right;
  }
  return tree[static_cast<std::size_t>(k)].value;
}

void gradients(GbdtLoss loss, const Eigen::VectorXd& raw, const Eigen::VectorXd& y, Eigen::VectorXd& g,
               Eigen::VectorXd& h) {
  if (loss == GbdtLoss::kSquared) {
    g = raw - y;
    h = Eigen::VectorXd::Ones(y.size());
    return;
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = sigmoid(raw(i));
    g(i) = p - y(i);
    h(i) = std::max(p * (1.0 - p), 1e-16);
  }
}

}  // namespace

double gbdt_loss(GbdtLoss loss, const Eigen::VectorXd& raw, const Eigen::VectorXd& y) {
  if (loss == GbdtLoss::kSquared) return (raw - y).squaredNorm() / static_cast<double>(y.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // log(1 + exp(z)) - y z, computed stably
    const double z = raw(i);
    sum += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y(i) * z;
  }
  return sum / static_cast<double>(y.size());
}

Eigen::VectorXd GbdtModel::predict_raw(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), base_score);
  for (const auto& t : trees) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) += learning_rate * tree_value(t, x, r);
  }
  return out;
}

Eigen::VectorXd GbdtModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd raw = predict_raw(x);
  if (loss == GbdtLoss::kLogistic) raw = raw.unaryExpr([](double z) { return sigmoid(z); });
  return raw;
}

GbdtModel fit_gbdt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbdtParams& params,
                   const Eigen::MatrixXd* x_valid, const Eigen::VectorXd* y_valid) {
  if (x.rows() == 0 || x.rows() != y.size()) throw DataError("GBDT needs matching, nonempty x and y");
  if (params.trees < 0 || params.max_depth < 1 || params.learning_rate <= 0.0) {
    throw UsageError("invalid GBDT parameters");
  }
  GbdtModel m;
  m.loss = params.loss;
  m.learning_rate = params.learning_rate;
  if (params.loss == GbdtLoss::kSquared) {
    m.base_score = y.mean();
  } else {
    const double pos = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
    m.base_score = std::log(pos / (1.0 - pos));
  }

  std::vector<std::vector<int>> sorted(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    auto& idx = sorted[static_cast<std::size_t>(f)];
    idx.resize(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
  }

  Eigen::VectorXd raw = Eigen::VectorXd::Constant(y.size(), m.base_score);
  Eigen::VectorXd g(y.size());
  Eigen::VectorXd h(y.size());
  const bool validate = x_valid != nullptr && y_valid != nullptr && x_valid->rows() > 0;
  Eigen::VectorXd vraw;
  std::size_t best_count = 0;
  if (validate) {
    vraw = Eigen::VectorXd::Constant(y_valid->size(), m.base_score);
    m.best_validation_loss = gbdt_loss(params.loss, vraw, *y_valid);
  }
  for (int t = 0; t < params.trees; ++t) {
    gradients(params.loss, raw, y, g, h);
    m.trees.push_back(fit_tree(x, sorted, g, h, params));
    for (Eigen::Index r = 0; r < x.rows(); ++r) raw(r) += params.learning_rate * tree_value(m.trees.back(), x, r);
    if (!validate) continue;
    for (Eigen::Index r = 0; r < x_valid->rows(); ++r) {
      vraw(r) += params.learning_rate * tree_value(m.trees.back(), *x_valid, r);
    }
    const double vl = gbdt_loss(params.loss, vraw, *y_valid);
    if (vl < m.best_validation_loss) {
      m.best_validation_loss = vl;
      best_count = m.trees.size();
    } else if (static_cast<int>(m.trees.size() - best_count) >= params.patience) {
      break;
    }
  }
  if (validate) m.trees.resize(best_count);
  return m;
}

UtilityTask parse_utility_task(std::string_view text) {
  if (text == "classification") return UtilityTask::kClassification;
  if (text == "regression") return UtilityTask::kRegression;
  throw UsageError(fmt::format("unknown utility task '{}'", text));
}

namespace {

struct Features {
  std::vector<std::size_t> columns;
  std::vector<std::unordered_map<std::string, int>> codes;  // categorical only
};

Features feature_layout(const Table& train, std::size_t target) {
  Features f;
  for (std::size_t c = 0; c < train.num_columns(); ++c) {
    if (c == target) continue;
    f.columns.push_back(c);
    std::unordered_map<std::string, int> codes;
    if (train.column(c).kind == ColumnKind::kCategorical) {
      for (const auto& t : token_column(train, c)) codes.try_emplace(t, static_cast<int>(codes.size()));
    }
    f.codes.push_back(std::move(codes));
  }
  return f;
}

Eigen::MatrixXd feature_matrix(const Table& table, const Table& reference, const Features& f) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(table.num_rows()), static_cast<Eigen::Index>(f.columns.size()));
  for (std::size_t k = 0; k < f.columns.size(); ++k) {
    const auto& name = reference.column(f.columns[k]).name;
    const std::size_t c = table.column_index(name);
    const auto col = static_cast<Eigen::Index>(k);
    if (table.column(c).kind == ColumnKind::kCategorical) {
      const auto tokens = token_column(table, c);
      for (std::size_t r = 0; r < tokens.size(); ++r) {
        auto it = f.codes[k].find(tokens[r]);
        x(static_cast<Eigen::Index>(r), col) = it == f.codes[k].end() ? -1.0 : it->second;
      }
    } else {
      const auto v = numeric_column(table, c);
      for (std::size_t r = 0; r < v.size(); ++r) x(static_cast<Eigen::Index>(r), col) = v[r];
    }
  }
  return x;
}

}  // namespace

std::map<std::string, double> ml_efficiency(const Table& synth_train, const Table& real_test,
                                            const std::string& target, UtilityTask task,
                                            const UtilityConfig& config, std::uint64_t seed) {
  if (synth_train.num_rows() < 2) throw DataError("ML efficiency needs at least 2 synthetic rows");
  if (real_test.num_rows() == 0) throw DataError("ML efficiency needs real test rows");
  const std::size_t tc = synth_train.column_index(target);
  const std::size_t test_tc = real_test.column_index(target);
  const bool classify = task == UtilityTask::kClassification;
  const auto kind = synth_train.column(tc).kind;
  if (classify && kind != ColumnKind::kCategorical) {
    throw UsageError(fmt::format("classification target '{}' must be categorical", target));
  }
  if (!classify && kind == ColumnKind::kCategorical) {
    throw UsageError(fmt::format("regression target '{}' must be numeric", target));
  }

  Eigen::VectorXd y(static_cast<Eigen::Index>(synth_train.num_rows()));
  Eigen::VectorXd y_test(static_cast<Eigen::Index>(real_test.num_rows()));
  if (classify) {
    const auto labels = token_column(synth_train, tc);
    const std::string positive = *std::max_element(labels.begin(), labels.end());
    const std::string negative = *std::min_element(labels.begin(), labels.end());
    if (positive == negative) {
      throw DataError(fmt::format("synthetic target '{}' holds a single class '{}'", target, positive));
    }
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] != positive && labels[r] != negative) {
        throw DataError(fmt::format("target '{}' has more than two classes", target));
      }
      y(static_cast<Eigen::Index>(r)) = labels[r] == positive ? 1.0 : 0.0;
    }
    const auto test_labels = token_column(real_test, test_tc);
    for (std::size_t r = 0; r < test_labels.size(); ++r) {
      y_test(static_cast<Eigen::Index>(r)) = test_labels[r] == positive ? 1.0 : 0.0;
    }
  } else {
    const auto v = numeric_column(synth_train, tc);
    const auto vt = numeric_column(real_test, test_tc);
    for (std::size_t r = 0; r < v.size(); ++r) y(static_cast<Eigen::Index>(r)) = v[r];
    for (std::size_t r = 0; r < vt.size(); ++r) y_test(static_cast<Eigen::Index>(r)) = vt[r];
  }

  const Features layout = feature_layout(synth_train, tc);
  const Eigen::MatrixXd x = feature_matrix(synth_train, synth_train, layout);
  const Eigen::MatrixXd x_test = feature_matrix(real_test, synth_train, layout);

  // Holdout split for early stopping and grid selection.
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
  const auto n_hold = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.holdout_fraction * static_cast<double>(order.size()))), 1,
      order.size() - 1);
  auto gather = [&](std::size_t from, std::size_t to, Eigen::MatrixXd& xs, Eigen::VectorXd& ys) {
    xs.resize(static_cast<Eigen::Index>(to - from), x.cols());
    ys.resize(static_cast<Eigen::Index>(to - from));
    for (std::size_t i = from; i < to; ++i) {
      xs.row(static_cast<Eigen::Index>(i - from)) = x.row(order[i]);
      ys(static_cast<Eigen::Index>(i - from)) = y(order[i]);
    }
  };
  Eigen::MatrixXd x_hold;
  Eigen::VectorXd y_hold;
  Eigen::MatrixXd x_fit;
  Eigen::VectorXd y_fit;
  gather(0, n_hold, x_hold, y_hold);
  gather(n_hold, order.size(), x_fit, y_fit);
  if (classify && (y_fit.minCoeff() == y_fit.maxCoeff())) {
    throw DataError("synthetic training split holds a single class");
  }

  GbdtModel best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int trees : config.trees) {
    for (double lr : config.learning_rates) {
      for (int depth : config.depths) {
        GbdtParams p;
        p.loss = classify ? GbdtLoss::kLogistic : GbdtLoss::kSquared;
        p.trees = trees;
        p.learning_rate = lr;
        p.max_depth = depth;
        p.patience = config.patience;
        GbdtModel m = fit_gbdt(x_fit, y_fit, p, &x_hold, &y_hold);
        if (m.best_validation_loss < best_loss) {
          best_loss = m.best_validation_loss;
          best = std::move(m);
        }
      }
    }
  }

  const Eigen::VectorXd pred = best.predict(x_test);
  std::map<std::string, double> out;
  if (classify) {
    std::vector<int> labels(static_cast<std::size_t>(y_test.size()));
    for (Eigen::Index i = 0; i < y_test.size(); ++i) labels[static_cast<std::size_t>(i)] = y_test(i) > 0.5 ? 1 : 0;
    out["auc"] = 100.0 * roc_auc(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())), labels);
    double tp = 0;
    double fp = 0;
    double fn = 0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      const bool predicted = pred(i) >= 0.5;
      const bool actual = y_test(i) > 0.5;
      tp += predicted && actual;
      fp += predicted && !actual;
      fn += !predicted && actual;
    }
    out["f1"] = tp == 0 ? 0.0 : 100.0 * 2 * tp / (2 * tp + fp + fn);
  } else {
    const Eigen::VectorXd err = pred - y_test;
    const double sse = err.squaredNorm();
    const double sst = (y_test.array() - y_test.mean()).square().sum();
    const double r2 = sst > 0.0 ? 1.0 - sse / sst : 0.0;
    out["r2"] = 100.0 * std::max(0.0, r2);
    out["rmse"] = std::sqrt(sse / static_cast<double>(y_test.size()));
    out["mae"] = err.cwiseAbs().mean();
  }
  return out;
}

}  // namespace tabflow
