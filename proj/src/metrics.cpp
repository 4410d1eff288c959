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

#include "tabflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tabflow/error.hpp"
#include "tabflow/formula.hpp"

namespace tabflow {

double ks_complement(std::span<const double> real, std::span<const double> synth) {
  if (real.empty() || synth.empty()) throw DataError("ks_complement needs nonempty samples");
  std::vector<double> a(real.begin(), real.end());
  std::vector<double> b(synth.begin(), synth.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
      x = a[i];
    } else {
      x = b[j];
    }
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return 100.0 * (1.0 - sup);
}

double tv_complement(std::span<const std::string> real, std::span<const std::string> synth) {
  if (real.empty() || synth.empty()) throw DataError("tv_complement needs nonempty samples");
  std::unordered_map<std::string_view, std::pair<double, double>> freq;
  for (const auto& t : real) freq[t].first += 1.0;
  for (const auto& t : synth) freq[t].second += 1.0;
  const double nr = static_cast<double>(real.size());
  const double ns = static_cast<double>(synth.size());
  double tv = 0.0;
  for (const auto& [token, counts] : freq) tv += std::abs(counts.first / nr - counts.second / ns);
  return 100.0 * (1.0 - 0.5 * tv);
}

std::vector<double> numeric_column(const Table& table, std::size_t column) {
  std::vector<double> v;
  v.reserve(table.num_rows());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    if (table.is_missing(r, column)) {
      throw DataError(fmt::format("missing cell in column '{}' at row {}", table.column(column).name, r));
    }
    v.push_back(table.as_double(r, column));
  }
  return v;
}

std::vector<std::string> token_column(const Table& table, std::size_t column) {
  std::vector<std::string> v;
  v.reserve(table.num_rows());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    if (table.is_missing(r, column)) {
      throw DataError(fmt::format("missing cell in column '{}' at row {}", table.column(column).name, r));
    }
    v.emplace_back(table.category(r, column));
  }
  return v;
}

void require_same_schema(const Table& real, const Table& synth) {
  if (real.num_columns() != synth.num_columns()) {
    throw DataError(fmt::format("schema mismatch: {} real columns vs {} synthetic",
                                real.num_columns(), synth.num_columns()));
  }
  for (std::size_t c = 0; c < real.num_columns(); ++c) {
    const auto& a = real.column(c);
    const auto& b = synth.column(c);
    if (a.name != b.name || a.kind != b.kind) {
      throw DataError(fmt::format("schema mismatch at column {}: '{}' ({}) vs '{}' ({})", c, a.name,
                                  to_string(a.kind), b.name, to_string(b.kind)));
    }
  }
}

double density_estimation_score(const Table& real, const Table& synth) {
  require_same_schema(real, synth);
  if (real.num_columns() == 0) throw DataError("density estimation needs at least one column");
  double sum = 0.0;
  for (std::size_t c = 0; c < real.num_columns(); ++c) {
    if (real.column(c).kind == ColumnKind::kCategorical) {
      sum += tv_complement(token_column(real, c), token_column(synth, c));
    } else {
      sum += ks_complement(numeric_column(real, c), numeric_column(synth, c));
    }
  }
  return sum / static_cast<double>(real.num_columns());
}

double quantile_type1(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  const auto n = values.size();
  auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end());
  return values[k - 1];
}

std::vector<double> quartile_cuts(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<double> cuts;
  for (double q : {0.25, 0.5, 0.75}) {
    const double c = quantile_type1(values, q);
    if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
  }
  return cuts;
}

int bin_of(std::span<const double> cuts, double value) {
  return static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

namespace {

/// A column reduced to integer codes for contingency tables.
std::pair<std::vector<int>, std::vector<int>> discretize(const Table& real, const Table& synth,
                                                         std::size_t c) {
  std::vector<int> a;
  std::vector<int> b;
  if (real.column(c).kind == ColumnKind::kCategorical) {
    std::unordered_map<std::string, int> ids;
    auto code = [&](const std::string& t) {
      return ids.try_emplace(t, static_cast<int>(ids.size())).first->second;
    };
    for (const auto& t : token_column(real, c)) a.push_back(code(t));
    for (const auto& t : token_column(synth, c)) b.push_back(code(t));
  } else {
    const auto rv = numeric_column(real, c);
    const auto cuts = quartile_cuts(rv);
    for (double v : rv) a.push_back(bin_of(cuts, v));
    for (double v : numeric_column(synth, c)) b.push_back(bin_of(cuts, v));
  }
  return {a, b};
}

double contingency_score(const std::vector<int>& ra, const std::vector<int>& rb,
                         const std::vector<int>& sa, const std::vector<int>& sb) {
  std::map<std::pair<int, int>, std::pair<double, double>> joint;
  for (std::size_t i = 0; i < ra.size(); ++i) joint[{ra[i], rb[i]}].first += 1.0;
  for (std::size_t i = 0; i < sa.size(); ++i) joint[{sa[i], sb[i]}].second += 1.0;
  const double nr = static_cast<double>(ra.size());
  const double ns = static_cast<double>(sa.size());
  double tv = 0.0;
  for (const auto& [cell, counts] : joint) tv += std::abs(counts.first / nr - counts.second / ns);
  return 100.0 * (1.0 - 0.5 * tv);
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

double pairwise_correlation_score(const Table& real, const Table& synth) {
  require_same_schema(real, synth);
  const std::size_t m = real.num_columns();
  if (m < 2) throw DataError("pairwise correlation needs at least 2 columns");
  if (real.num_rows() == 0 || synth.num_rows() == 0) throw DataError("pairwise correlation needs rows");

  std::vector<std::pair<std::vector<int>, std::vector<int>>> codes(m);
  std::vector<std::vector<double>> rnum(m);
  std::vector<std::vector<double>> snum(m);
  for (std::size_t c = 0; c < m; ++c) {
    codes[c] = discretize(real, synth, c);
    if (real.column(c).kind != ColumnKind::kCategorical) {
      rnum[c] = numeric_column(real, c);
      snum[c] = numeric_column(synth, c);
    }
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      ++pairs;
      const bool numeric = real.column(i).kind != ColumnKind::kCategorical &&
                           real.column(j).kind != ColumnKind::kCategorical;
      if (numeric) {
        const auto pr = pearson(rnum[i], rnum[j]);
        const auto ps = pearson(snum[i], snum[j]);
        if (pr && ps) {
          sum += 100.0 * (1.0 - std::abs(*pr - *ps) / 2.0);
          continue;
        }
        spdlog::warn("correlation undefined for constant column in pair ('{}', '{}'); using binned rule",
                     real.column(i).name, real.column(j).name);
      }
      sum += contingency_score(codes[i].first, codes[j].first, codes[i].second, codes[j].second);
    }
  }
  return sum / static_cast<double>(pairs);
}

double coverage_score(const Table& real, const Table& synth) {
  require_same_schema(real, synth);
  if (real.num_columns() == 0 || real.num_rows() == 0 || synth.num_rows() == 0) {
    throw DataError("coverage needs nonempty tables");
  }
  double sum = 0.0;
  const double ns = static_cast<double>(synth.num_rows());
  for (std::size_t c = 0; c < real.num_columns(); ++c) {
    std::size_t inside = 0;
    if (real.column(c).kind == ColumnKind::kCategorical) {
      const auto tokens = token_column(real, c);
      const std::unordered_set<std::string> known(tokens.begin(), tokens.end());
      for (const auto& t : token_column(synth, c)) inside += known.count(t);
    } else {
      const auto rv = numeric_column(real, c);
      const auto [lo, hi] = std::minmax_element(rv.begin(), rv.end());
      for (double v : numeric_column(synth, c)) inside += (*lo <= v && v <= *hi) ? 1 : 0;
    }
    sum += static_cast<double>(inside) / ns;
  }
  return 100.0 * sum / static_cast<double>(real.num_columns());
}

Embedder::Embedder(const Table& reference) : codec_(fit_codec(reference)) {}

Eigen::MatrixXd Embedder::embed(const Table& table) const {
  const auto& cols = codec_.columns();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(table.num_rows()), codec_.width());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto& col = cols[k];
    const std::size_t c = table.column_index(col.schema.name);
    if (table.column(c).kind != col.schema.kind) {
      throw DataError(fmt::format("column '{}' changed kind", col.schema.name));
    }
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
      if (table.is_missing(r, c)) {
        throw DataError(fmt::format("missing cell in column '{}' at row {}", col.schema.name, r));
      }
      const auto row = static_cast<Eigen::Index>(r);
      if (col.schema.kind == ColumnKind::kCategorical) {
        if (auto idx = codec_.token_index(k, table.category(r, c))) out(row, col.offset + *idx) = 1.0;
      } else {
        out(row, col.offset) = (table.as_double(r, c) - col.mean) / col.std;
      }
    }
  }
  return out;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
  return g;
}

Eigen::RowVectorXd coordinate_median(const Eigen::MatrixXd& data) {
  if (data.rows() == 0) throw DataError("median of an empty matrix");
  Eigen::RowVectorXd med(data.cols());
  std::vector<double> v(static_cast<std::size_t>(data.rows()));
  const std::size_t n = v.size();
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    for (Eigen::Index r = 0; r < data.rows(); ++r) v[static_cast<std::size_t>(r)] = data(r, c);
    std::sort(v.begin(), v.end());
    med(c) = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }
  return med;
}

namespace {

double quantile_ball_score(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& probe,
                           std::span<const double> levels) {
  if (reference.cols() != probe.cols()) {
    throw DataError(fmt::format("embedding widths differ: {} vs {}", reference.cols(), probe.cols()));
  }
  if (reference.rows() == 0 || probe.rows() == 0) throw DataError("quantile-ball score needs rows");
  if (levels.empty()) throw UsageError("empty quantile grid");
  const Eigen::RowVectorXd center = coordinate_median(reference);
  std::vector<double> ref_dist(static_cast<std::size_t>(reference.rows()));
  for (Eigen::Index r = 0; r < reference.rows(); ++r) {
    ref_dist[static_cast<std::size_t>(r)] = (reference.row(r) - center).norm();
  }
  std::vector<double> probe_dist(static_cast<std::size_t>(probe.rows()));
  for (Eigen::Index r = 0; r < probe.rows(); ++r) {
    probe_dist[static_cast<std::size_t>(r)] = (probe.row(r) - center).norm();
  }
  std::sort(probe_dist.begin(), probe_dist.end());
  double dev = 0.0;
  for (double a : levels) {
    const double radius = quantile_type1(ref_dist, a);
    const auto inside = std::upper_bound(probe_dist.begin(), probe_dist.end(), radius) - probe_dist.begin();
    dev += std::abs(static_cast<double>(inside) / static_cast<double>(probe_dist.size()) - a);
  }
  dev /= static_cast<double>(levels.size());
  return 100.0 * std::max(0.0, 1.0 - 2.0 * dev);
}

}  // namespace

double alpha_precision(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth,
                       std::span<const double> alphas) {
  return quantile_ball_score(real, synth, alphas);
}

double alpha_precision(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth) {
  const auto grid = default_alpha_grid();
  return alpha_precision(real, synth, grid);
}

double beta_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth,
                   std::span<const double> betas) {
  return quantile_ball_score(synth, real, betas);
}

double beta_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth) {
  const auto grid = default_alpha_grid();
  return beta_recall(real, synth, grid);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  if (n != labels.size()) throw DataError("roc_auc: scores and labels differ in length");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) {
        pos_rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw DataError("roc_auc needs both classes");
  const double p = static_cast<double>(pos);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double c2st_score(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth, std::uint64_t seed) {
  constexpr Eigen::Index kMinRows = 20;
  constexpr int kEpochs = 500;
  constexpr double kL2 = 1e-4;
  constexpr double kLearningRate = 0.5;
  if (real.rows() < kMinRows || synth.rows() < kMinRows) {
    throw DataError(fmt::format("C2ST needs at least {} rows on each side", kMinRows));
  }
  if (real.cols() != synth.cols()) throw DataError("C2ST embedding widths differ");

  std::mt19937_64 rng(seed);
  auto halves = [&](Eigen::Index n) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng() % (i + 1)]);
    const auto half = idx.begin() + static_cast<std::ptrdiff_t>(n / 2);
    return std::pair{std::vector<Eigen::Index>(idx.begin(), half), std::vector<Eigen::Index>(half, idx.end())};
  };
  const auto [real_train, real_test] = halves(real.rows());
  const auto [synth_train, synth_test] = halves(synth.rows());

  auto stack = [&](const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b,
                   Eigen::MatrixXd& x, Eigen::VectorXd& y) {
    const auto na = static_cast<Eigen::Index>(a.size());
    const auto nb = static_cast<Eigen::Index>(b.size());
    x.resize(na + nb, real.cols());
    y.resize(na + nb);
    for (Eigen::Index i = 0; i < na; ++i) {
      x.row(i) = real.row(a[static_cast<std::size_t>(i)]);
      y(i) = 0.0;
    }
    for (Eigen::Index i = 0; i < nb; ++i) {
      x.row(na + i) = synth.row(b[static_cast<std::size_t>(i)]);
      y(na + i) = 1.0;
    }
  };
  Eigen::MatrixXd xtr;
  Eigen::VectorXd ytr;
  Eigen::MatrixXd xte;
  Eigen::VectorXd yte;
  stack(real_train, synth_train, xtr, ytr);
  stack(real_test, synth_test, xte, yte);

  const Eigen::RowVectorXd mean = xtr.colwise().mean();
  const Eigen::RowVectorXd sd =
      ((xtr.rowwise() - mean).array().square().colwise().mean()).sqrt().max(1e-8).matrix();
  xtr = ((xtr.rowwise() - mean).array().rowwise() / sd.array()).matrix();
  xte = ((xte.rowwise() - mean).array().rowwise() / sd.array()).matrix();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(xtr.cols());
  double bias = 0.0;
  const double inv_n = 1.0 / static_cast<double>(xtr.rows());
  for (int epoch = 0; epoch < kEpochs; ++epoch) {
    const Eigen::VectorXd z = (xtr * w).array() + bias;
    const Eigen::VectorXd p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    const Eigen::VectorXd g = p - ytr;
    w -= kLearningRate * (inv_n * (xtr.transpose() * g) + kL2 * w);
    bias -= kLearningRate * inv_n * g.sum();
  }
  const Eigen::VectorXd scores = (xte * w).array() + bias;
  std::vector<int> labels(static_cast<std::size_t>(yte.size()));
  for (Eigen::Index i = 0; i < yte.size(); ++i) labels[static_cast<std::size_t>(i)] = yte(i) > 0.5 ? 1 : 0;
  const double auc = roc_auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), labels);
  return 100.0 * (1.0 - 2.0 * std::max(0.0, auc - 0.5));
}

namespace {

std::vector<std::size_t> group_columns(const Table& table, const HierarchyGroup& group) {
  std::vector<std::size_t> cols{table.column_index(group.granular)};
  for (const auto& a : group.ancestors) cols.push_back(table.column_index(a));
  for (std::size_t c : cols) {
    if (table.column(c).kind != ColumnKind::kCategorical) {
      throw DataError(fmt::format("hierarchy column '{}' is not categorical", table.column(c).name));
    }
  }
  return cols;
}

}  // namespace

HierarchyTuples observed_tuples(const Table& real, const HierarchyGroup& group) {
  HierarchyTuples out{group, {}};
  const auto cols = group_columns(real, group);
  for (std::size_t r = 0; r < real.num_rows(); ++r) {
    std::vector<std::string> t;
    bool missing = false;
    for (std::size_t c : cols) {
      if (real.is_missing(r, c)) {
        missing = true;
        break;
      }
      t.emplace_back(real.category(r, c));
    }
    if (!missing) out.tuples.insert(std::move(t));
  }
  return out;
}

HierarchyTuples map_tuples(const HierarchyMap& map) {
  HierarchyTuples out{map.group, {}};
  for (const auto& [granular, entry] : map.entries) {
    std::vector<std::string> t{granular};
    t.insert(t.end(), entry.ancestors.begin(), entry.ancestors.end());
    out.tuples.insert(std::move(t));
  }
  return out;
}

double hcs(const Table& synth, std::span<const HierarchyTuples> groups) {
  if (groups.empty()) return 100.0;
  if (synth.num_rows() == 0) throw DataError("HCS needs synthetic rows");
  double sum = 0.0;
  for (const auto& g : groups) {
    const auto cols = group_columns(synth, g.group);
    std::size_t valid = 0;
    std::vector<std::string> t(cols.size());
    for (std::size_t r = 0; r < synth.num_rows(); ++r) {
      bool missing = false;
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (synth.is_missing(r, cols[k])) {
          missing = true;
          break;
        }
        t[k] = synth.category(r, cols[k]);
      }
      if (!missing && g.tuples.count(t) != 0) ++valid;
    }
    sum += static_cast<double>(valid) / static_cast<double>(synth.num_rows());
  }
  return 100.0 * sum / static_cast<double>(groups.size());
}

double mdi(const Table& synth, std::span<const MathGroup> math, std::span<const TemporalChain> chains,
           double rel_tol) {
  std::vector<double> shares;
  const std::size_t n = synth.num_rows();
  if (n == 0 && (!math.empty() || !chains.empty())) throw DataError("MDI needs synthetic rows");
  for (const auto& group : math) {
    for (const auto& d : group.derived) {
      const std::size_t c = synth.column_index(d.column);
      if (synth.column(c).kind != ColumnKind::kNumeric) {
        throw DataError(fmt::format("derived column '{}' is not numeric", d.column));
      }
      const BoundFormula f(d.formula, synth);
      const auto places = synth.column(c).decimal_places;
      std::size_t ok = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (synth.is_missing(r, c)) continue;
        try {
          const double actual = synth.number(r, c);
          if (std::abs(actual - f.eval(synth, r)) <= derived_tolerance(actual, rel_tol, places)) ++ok;
        } catch (const DataError&) {
          // missing independent or zero denominator
        }
      }
      shares.push_back(static_cast<double>(ok) / static_cast<double>(n));
    }
  }
  for (const auto& chain : chains) {
    for (std::size_t k = 1; k < chain.columns.size(); ++k) {
      const std::size_t a = synth.column_index(chain.columns[k - 1]);
      const std::size_t b = synth.column_index(chain.columns[k]);
      std::size_t ok = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (synth.is_missing(r, a) || synth.is_missing(r, b)) continue;
        if (synth.as_double(r, a) < synth.as_double(r, b)) ++ok;
      }
      shares.push_back(static_cast<double>(ok) / static_cast<double>(n));
    }
  }
  if (shares.empty()) return 100.0;
  return 100.0 * std::accumulate(shares.begin(), shares.end(), 0.0) / static_cast<double>(shares.size());
}

double dcr(const Eigen::MatrixXd& synth, const Eigen::MatrixXd& real_train,
           const Eigen::MatrixXd& real_test) {
  if (synth.rows() == 0 || real_train.rows() == 0 || real_test.rows() == 0) {
    throw DataError("DCR needs nonempty synthetic, train, and test sets");
  }
  if (synth.cols() != real_train.cols() || synth.cols() != real_test.cols()) {
    throw DataError("DCR embedding widths differ");
  }
  // Row-major copies keep the inner distance loop contiguous.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor s = synth;
  const RowMajor tr = real_train;
  const RowMajor te = real_test;
  auto nearest = [](const RowMajor& set, const double* x, Eigen::Index d) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < set.rows(); ++r) {
      const double* y = set.data() + r * d;
      double dist = 0.0;
      for (Eigen::Index k = 0; k < d && dist < best; ++k) dist += std::abs(x[k] - y[k]);
      best = std::min(best, dist);
    }
    return best;
  };
  std::size_t closer = 0;
  const Eigen::Index d = s.cols();
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double* x = s.data() + r * d;
    if (nearest(tr, x, d) < nearest(te, x, d)) ++closer;
  }
  return 100.0 * static_cast<double>(closer) / static_cast<double>(s.rows());
}

}  // namespace tabflow
