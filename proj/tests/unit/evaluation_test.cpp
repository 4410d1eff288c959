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

#include "retail_fixture.hpp"
#include "tabflow/error.hpp"
#include "tabflow/evaluation.hpp"

namespace tabflow {
namespace {

using testing::make_retail_table;
using testing::retail_spec;

TEST(Evaluation, MetricStatUsesSampleStd) {
  const auto s = MetricStat::from_values({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.std, 1.0);
  EXPECT_EQ(s.display(), "2.00±1.00");
  EXPECT_EQ(MetricStat::from_values({100.0}).display(), "100.00±0.00");
}

TEST(Evaluation, SummaryMapsDcrAndSkipsErrors) {
  EvaluationReport r;
  r.dimensions["privacy"]["dcr"] = MetricStat::from_values({60.0});
  r.dimensions["utility"]["r2"] = MetricStat::from_values({80.0});
  r.dimensions["utility"]["rmse"] = MetricStat::from_values({1234.0});
  const auto s = r.summary();
  EXPECT_DOUBLE_EQ(s.at("privacy"), 80.0);
  EXPECT_DOUBLE_EQ(s.at("utility"), 80.0);
}

TEST(Evaluation, RealAgainstItselfScoresWell) {
  // Equal train and holdout sizes so an iid synthetic set sits at DCR 50.
  const Table train = make_retail_table(400, 1);
  const Table test = make_retail_table(400, 2);
  EvaluationConfig cfg;
  cfg.runs = 2;
  cfg.seed = 3;
  cfg.utility.trees = {50};
  cfg.utility.learning_rates = {0.1};
  const auto report = evaluate_all(train, test, make_retail_table(400, 4), retail_spec(), cfg);
  EXPECT_EQ(report.runs, 2);
  for (const auto& dim : report_dimensions()) EXPECT_TRUE(report.dimensions.count(dim)) << dim;
  const auto& acc = report.dimensions.at("accuracy");
  for (const char* m : {"density_estimation", "pairwise_correlation", "alpha_precision", "c2st"}) {
    ASSERT_TRUE(acc.count(m)) << m;
    EXPECT_EQ(acc.at(m).values.size(), 2u);
  }
  EXPECT_EQ(report.dimensions.at("consistency").at("hcs").mean, 100.0);
  EXPECT_EQ(report.dimensions.at("dependency").at("mdi").mean, 100.0);
  EXPECT_TRUE(report.dimensions.at("utility").count("auc"));
  EXPECT_NEAR(report.dimensions.at("privacy").at("dcr").mean, 50.0, 10.0);

  const auto doc = report.to_json();
  EXPECT_EQ(doc["format"], "tabflow.evaluation_report");
  EXPECT_EQ(doc["dimensions"]["consistency"]["hcs"]["display"], "100.00±0.00");
  const std::string csv = report.to_csv();
  EXPECT_EQ(csv.rfind("metric,dimension,mean,std\n", 0), 0u);
  EXPECT_NE(csv.find("hcs,consistency,100.000000,0.000000"), std::string::npos);
  EXPECT_NE(report.summary_table().find("consistency"), std::string::npos);
}

TEST(Evaluation, RunsUseSeedPlusIndex) {
  const Table train = make_retail_table(200, 1);
  const Table test = make_retail_table(80, 2);
  std::vector<int> seen;
  EvaluationConfig cfg;
  cfg.runs = 3;
  cfg.utility_target = "";
  cfg.utility.trees = {20};
  cfg.utility.learning_rates = {0.1};
  evaluate_all(
      train, test,
      [&](int run) {
        seen.push_back(run);
        return make_retail_table(200, 10 + run);
      },
      retail_spec(), cfg);
  EXPECT_EQ(seen, (std::vector<int>{0, 1, 2}));
  cfg.runs = 0;
  EXPECT_THROW(evaluate_all(train, test, train, retail_spec(), cfg), UsageError);
}

}  // namespace
}  // namespace tabflow
