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

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tabflow/gmm.hpp"
#include "tabflow/nn.hpp"

namespace tabflow {
namespace {

Eigen::MatrixXd mixture(std::size_t n, int d, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd centers = 4.0 * nn::standard_normal(k, d, rng);
  Eigen::MatrixXd x = nn::standard_normal(static_cast<Eigen::Index>(n), d, rng);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) += centers.row(static_cast<Eigen::Index>(rng() % k));
  return x;
}

TEST(Gmm, LogLikelihoodIsNondecreasing) {
  for (int f = 0; f < 20; ++f) {
    const Eigen::MatrixXd x = mixture(400, 1 + f % 4, 2 + f % 3, 100 + f);
    const GmmModel m = fit_gmm(x, 1 + f % 5, f);
    ASSERT_GE(m.log_likelihood_trace.size(), 1u);
    for (std::size_t i = 1; i < m.log_likelihood_trace.size(); ++i) {
      EXPECT_GE(m.log_likelihood_trace[i], m.log_likelihood_trace[i - 1]) << "fixture " << f << " iter " << i;
    }
  }
}

TEST(Gmm, SingleComponentRecoversSampleMoments) {
  const Eigen::MatrixXd x = mixture(500, 3, 3, 7);
  const GmmModel m = fit_gmm(x, 1, 1);
  ASSERT_EQ(m.components(), 1);
  EXPECT_NEAR(m.weights(0), 1.0, 1e-12);
  for (Eigen::Index j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= x.rows();
    double var = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= x.rows();
    EXPECT_NEAR(m.means(0, j), mean, 1e-9);
    EXPECT_NEAR(m.variances(0, j), var, 1e-9);
  }
}

TEST(Gmm, SeparatedClustersAreFound) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd x = nn::standard_normal(1000, 1, rng) * 0.5;
  x.topRows(300).array() += 10.0;
  const GmmModel m = fit_gmm(x, 2, 4);
  const int hi = m.means(0, 0) > m.means(1, 0) ? 0 : 1;
  EXPECT_NEAR(m.weights(hi), 0.3, 0.01);
  EXPECT_NEAR(m.means(hi, 0), 10.0, 0.1);
  EXPECT_NEAR(m.means(1 - hi, 0), 0.0, 0.1);
}

TEST(Gmm, DegenerateDataGivesOneComponent) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(50, 2, 3.0);
  const GmmModel m = fit_gmm(x, 3, 1);
  EXPECT_EQ(m.components(), 1);
  EXPECT_EQ(m.variances(0, 0), GmmModel::kVarianceFloor);
  EXPECT_TRUE(std::isfinite(gmm_mean_log_likelihood(m, x)));
}

TEST(Gmm, DsiIsHundredForIdenticalTablesAndDropsForShifted) {
  const Table a = testing::random_mixed_table(400, 3, 1, false, 1);
  const Table shifted = testing::random_mixed_table(400, 3, 1, false, 2, 8.0);
  const auto cols = default_dsi_columns(a);
  EXPECT_EQ(cols, (std::vector<std::string>{"n0", "n1", "n2"}));
  EXPECT_NEAR(dsi(a, a, cols, 3, 1), 100.0, 1e-9);
  EXPECT_LT(dsi(a, shifted, cols, 3, 1), 1.0);
}

}  // namespace
}  // namespace tabflow
