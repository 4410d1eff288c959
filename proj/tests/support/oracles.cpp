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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "retail_fixture.hpp"

namespace tabflow::testing {

namespace {

std::vector<double> doubles(const Table& t, std::size_t c) {
  std::vector<double> v;
  for (std::size_t r = 0; r < t.num_rows(); ++r) v.push_back(t.as_double(r, c));
  return v;
}

std::vector<std::string> strings(const Table& t, std::size_t c) {
  std::vector<std::string> v;
  for (std::size_t r = 0; r < t.num_rows(); ++r) v.emplace_back(t.category(r, c));
  return v;
}

double brute_pearson(const std::vector<double>& x, const std::vector<double>& y, bool* defined) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    cxx += (x[i] - mx) * (x[i] - mx);
    cyy += (y[i] - my) * (y[i] - my);
  }
  *defined = cxx > 0 && cyy > 0;
  if (!*defined) return 0.0;
  return std::clamp(cxy / std::sqrt(cxx * cyy), -1.0, 1.0);
}

// Quartile labels as strings: the number of distinct cut points below v.
std::vector<std::string> quartile_labels(const std::vector<double>& real, const std::vector<double>& v) {
  std::vector<double> sorted = real;
  std::sort(sorted.begin(), sorted.end());
  std::set<double> cuts;
  for (double q : {0.25, 0.5, 0.75}) {
    std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    if (k == 0) k = 1;
    cuts.insert(sorted[k - 1]);
  }
  std::vector<std::string> out;
  for (double x : v) {
    int below = 0;
    for (double c : cuts) below += c < x ? 1 : 0;
    out.push_back("q" + std::to_string(below));
  }
  return out;
}

std::vector<std::string> labels(const Table& real, const Table& t, std::size_t c) {
  if (real.column(c).kind == ColumnKind::kCategorical) return strings(t, c);
  return quartile_labels(doubles(real, c), doubles(t, c));
}

}  // namespace

double oracle_ks_complement(const std::vector<double>& real, const std::vector<double>& synth) {
  std::vector<double> points = real;
  points.insert(points.end(), synth.begin(), synth.end());
  double worst = 0.0;
  for (double x : points) {
    double fr = 0, fs = 0;
    for (double v : real) fr += v <= x ? 1 : 0;
    for (double v : synth) fs += v <= x ? 1 : 0;
    worst = std::max(worst, std::abs(fr / real.size() - fs / synth.size()));
  }
  return 100.0 * (1.0 - worst);
}

double oracle_tv_complement(const std::vector<std::string>& real, const std::vector<std::string>& synth) {
  std::set<std::string> tokens(real.begin(), real.end());
  tokens.insert(synth.begin(), synth.end());
  double tv = 0.0;
  for (const auto& t : tokens) {
    const double p = static_cast<double>(std::count(real.begin(), real.end(), t)) / real.size();
    const double q = static_cast<double>(std::count(synth.begin(), synth.end(), t)) / synth.size();
    tv += std::abs(p - q);
  }
  return 100.0 * (1.0 - tv / 2.0);
}

double oracle_coverage(const Table& real, const Table& synth) {
  double total = 0.0;
  for (std::size_t c = 0; c < real.num_columns(); ++c) {
    double inside = 0;
    for (std::size_t s = 0; s < synth.num_rows(); ++s) {
      if (real.column(c).kind == ColumnKind::kCategorical) {
        bool seen = false;
        for (std::size_t r = 0; r < real.num_rows() && !seen; ++r) {
          seen = real.category(r, c) == synth.category(s, c);
        }
        inside += seen ? 1 : 0;
      } else {
        bool below = false, above = false;
        const double x = synth.as_double(s, c);
        for (std::size_t r = 0; r < real.num_rows(); ++r) {
          below = below || real.as_double(r, c) <= x;
          above = above || real.as_double(r, c) >= x;
        }
        inside += (below && above) ? 1 : 0;
      }
    }
    total += inside / synth.num_rows();
  }
  return 100.0 * total / real.num_columns();
}

double oracle_pairwise_correlation(const Table& real, const Table& synth) {
  const std::size_t m = real.num_columns();
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      ++pairs;
      if (real.column(i).kind != ColumnKind::kCategorical && real.column(j).kind != ColumnKind::kCategorical) {
        bool dr = false, ds = false;
        const double pr = brute_pearson(doubles(real, i), doubles(real, j), &dr);
        const double ps = brute_pearson(doubles(synth, i), doubles(synth, j), &ds);
        if (dr && ds) {
          sum += 100.0 * (1.0 - std::abs(pr - ps) / 2.0);
          continue;
        }
      }
      const auto ri = labels(real, real, i), rj = labels(real, real, j);
      const auto si = labels(real, synth, i), sj = labels(real, synth, j);
      std::map<std::string, double> p, q;
      for (std::size_t r = 0; r < ri.size(); ++r) p[ri[r] + "\x1f" + rj[r]] += 1.0 / ri.size();
      for (std::size_t r = 0; r < si.size(); ++r) q[si[r] + "\x1f" + sj[r]] += 1.0 / si.size();
      std::set<std::string> keys;
      for (const auto& [k, v] : p) keys.insert(k);
      for (const auto& [k, v] : q) keys.insert(k);
      double tv = 0.0;
      for (const auto& k : keys) tv += std::abs((p.count(k) ? p[k] : 0.0) - (q.count(k) ? q[k] : 0.0));
      sum += 100.0 * (1.0 - tv / 2.0);
    }
  }
  return sum / pairs;
}

double oracle_hcs(const Table& real, const Table& synth, const std::vector<std::vector<std::string>>& groups) {
  if (groups.empty()) return 100.0;
  double sum = 0.0;
  for (const auto& names : groups) {
    double ok = 0;
    for (std::size_t s = 0; s < synth.num_rows(); ++s) {
      bool found = false;
      for (std::size_t r = 0; r < real.num_rows() && !found; ++r) {
        bool same = true;
        for (const auto& name : names) {
          const std::size_t cs = synth.column_index(name);
          const std::size_t cr = real.column_index(name);
          if (synth.is_missing(s, cs) || real.category(r, cr) != synth.category(s, cs)) {
            same = false;
            break;
          }
        }
        found = same;
      }
      ok += found ? 1 : 0;
    }
    sum += ok / synth.num_rows();
  }
  return 100.0 * sum / groups.size();
}

double oracle_share_mean(const Table& synth, const std::vector<RowCheck>& checks) {
  if (checks.empty()) return 100.0;
  double sum = 0.0;
  for (const auto& check : checks) {
    double ok = 0;
    for (std::size_t r = 0; r < synth.num_rows(); ++r) ok += check(synth, r) ? 1 : 0;
    sum += ok / synth.num_rows();
  }
  return 100.0 * sum / checks.size();
}

Table random_mixed_table(std::size_t rows, int numeric, int categorical, bool datetime, std::uint64_t seed,
                         double shift) {
  std::mt19937_64 rng(seed);
  std::vector<ColumnSchema> schema;
  for (int k = 0; k < numeric; ++k) {
    ColumnSchema c;
    c.name = "n" + std::to_string(k);
    c.kind = ColumnKind::kNumeric;
    c.decimal_places = 1;
    schema.push_back(c);
  }
  for (int k = 0; k < categorical; ++k) {
    ColumnSchema c;
    c.name = "c" + std::to_string(k);
    c.kind = ColumnKind::kCategorical;
    schema.push_back(c);
  }
  if (datetime) {
    ColumnSchema c;
    c.name = "t0";
    c.kind = ColumnKind::kDatetime;
    c.datetime_format = "%Y-%m-%d";
    schema.push_back(c);
  }
  std::uniform_int_distribution<int> grid(0, 20);
  std::uniform_int_distribution<int> token(0, 4);
  std::uniform_int_distribution<int> day(0, 30);
  TableBuilder b(schema);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<Value> row;
    double first = 0.0;
    for (int k = 0; k < numeric; ++k) {
      double v = 0.5 * grid(rng) + shift;
      // Correlate later columns with the first so Pearson terms are not all ~0.
      if (k == 0) first = v;
      else if (k % 2 == 1) v = std::round(10.0 * (0.7 * first + 0.3 * v)) / 10.0;
      row.emplace_back(v);
    }
    for (int k = 0; k < categorical; ++k) row.emplace_back("tok" + std::to_string(token(rng)));
    if (datetime) row.emplace_back(Timestamp{1600000000 - 1600000000 % 86400 + 86400 * day(rng)});
    b.add_row(row);
  }
  return std::move(b).build();
}

Table corrupted_retail(std::size_t rows, std::uint64_t seed) {
  const Table t = make_retail_table(rows, seed);
  std::mt19937_64 rng(seed * 7 + 1);
  const std::size_t state = t.column_index("Order State");
  const std::size_t country = t.column_index("Customer Country");
  const std::size_t discount = t.column_index("Order Item Discount");
  const std::size_t sales = t.column_index("Order Item Sales Price");
  const std::size_t delivery = t.column_index("Delivery Date");
  const std::size_t order = t.column_index("Order Date");
  TableBuilder b(t.schema());
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    auto row = t.row(r);
    if (rng() % 5 == 0) row[state] = std::string("Bavaria");
    if (rng() % 7 == 0) row[country] = std::string("Puerto Rico");
    if (rng() % 4 == 0) row[discount] = std::get<double>(row[discount]) + 0.01 * (1 + rng() % 3);
    if (rng() % 6 == 0) row[sales] = std::get<double>(row[sales]) + 0.004;  // inside rounding slack
    if (rng() % 9 == 0) row[sales] = Value{};
    if (rng() % 5 == 0) row[delivery] = row[order];
    b.add_row(row);
  }
  return std::move(b).build();
}

}  // namespace tabflow::testing
