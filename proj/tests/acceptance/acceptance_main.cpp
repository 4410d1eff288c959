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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "grad_check.hpp"
#include "oracles.hpp"
#include "retail_fixture.hpp"
#include "tabflow/compressor.hpp"
#include "tabflow/diffusion.hpp"
#include "tabflow/gbdt.hpp"
#include "tabflow/gmm.hpp"
#include "tabflow/json_io.hpp"
#include "tabflow/latent_codec.hpp"
#include "tabflow/metrics.hpp"
#include "tabflow/nn.hpp"
#include "tabflow/smote.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tabflow;
using namespace tabflow::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1. Compression round trip on the 1,000-row retail fixture.
Outcome round_trip() {
  const Table t = make_retail_table(1000, 2026);
  const auto t0 = std::chrono::steady_clock::now();
  const auto cr = compress(t, retail_spec());
  const Table back = decompress(cr.compressed, cr.context);
  const double secs = seconds_since(t0);
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t c = 0; c < t.num_columns(); ++c) {
    const std::size_t b = back.column_index(t.column(c).name);
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
      if (t.column(c).kind == ColumnKind::kNumeric) {
        const double err = std::abs(back.number(r, b) - t.number(r, c));
        worst = std::max(worst, err);
        if (err > std::pow(10.0, -t.column(c).decimal_places.value_or(9))) ++bad;
      } else if (!(back.value(r, b) == t.value(r, c))) {
        ++bad;
      }
    }
  }
  return {bad == 0 && secs < 5.0 && back.num_columns() == t.num_columns(),
          fmt::format("{} mismatched cells, max numeric error {:.3g}, {:.3f}s", bad, worst, secs)};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = fmt::format("{} {} > '{}' 2>&1", TABFLOW_CLI_PATH, args, log.string());
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path prepare_pipeline(const fs::path& dir) {
  fs::remove_all(dir);
  write_retail_fixture(dir, 1000, 2026, 300, 600);
  json cfg = read_json_file(dir / "config.json");
  cfg["vae"]["hidden"] = {128, 128};
  cfg["diffusion"]["training"]["hidden"] = {128, 128};
  write_json_file(dir / "config.json", cfg);
  return dir / "config.json";
}

// 2. End-to-end relationship preservation.
Outcome pipeline_preserves_relationships(const fs::path& work) {
  const fs::path cfg = prepare_pipeline(work / "pipeline_a");
  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_cli("pipeline -c " + cfg.string(), work / "pipeline_a.log");
  const double secs = seconds_since(t0);
  if (code != 0) return {false, fmt::format("pipeline exited with {} (see pipeline_a.log)", code)};
  const json report = read_json_file(work / "pipeline_a" / "out" / "report.json");
  const auto& hcs = report["dimensions"]["consistency"]["hcs"];
  const auto& mdi = report["dimensions"]["dependency"]["mdi"];
  const bool ok = hcs["display"] == "100.00±0.00" && mdi["display"] == "100.00±0.00" &&
                  hcs["mean"].get<double>() == 100.0 && mdi["mean"].get<double>() == 100.0 && secs < 600.0;
  return {ok, fmt::format("HCS {} MDI {}, {:.1f}s including training", hcs["display"].get<std::string>(),
                          mdi["display"].get<std::string>(), secs)};
}

Eigen::MatrixXd four_d_mixture(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double off = rng() % 2 ? 3.0 : -3.0;
    for (int j = 0; j < 4; ++j) x(i, j) = (j % 2 ? off : -off) + z(rng);
  }
  return x;
}

// 3. DCR calibration.
Outcome dcr_calibration() {
  std::mt19937_64 rng(31);
  const Eigen::MatrixXd train = four_d_mixture(10000, rng);
  const Eigen::MatrixXd test = four_d_mixture(10000, rng);
  const Eigen::MatrixXd synth = four_d_mixture(10000, rng);
  const double iid = dcr(synth, train, test);
  const double copy = dcr(train, train, test);
  return {std::abs(iid - 50.0) <= 2.0 && copy == 100.0, fmt::format("iid {:.2f}, copy {:.2f}", iid, copy)};
}

// 4. Metric oracles.
Outcome metric_oracles() {
  double worst = 0.0;
  const auto spec = retail_spec();
  for (int seed = 0; seed < 50; ++seed) {
    const Table a = random_mixed_table(100, 3, 2, true, 100 + seed);
    const Table b = random_mixed_table(100, 3, 2, true, 200 + seed, (seed % 4) * 0.5);
    for (std::size_t c = 0; c < a.num_columns(); ++c) {
      if (a.column(c).kind == ColumnKind::kCategorical) {
        worst = std::max(worst, std::abs(tv_complement(token_column(a, c), token_column(b, c)) -
                                         oracle_tv_complement(token_column(a, c), token_column(b, c))));
      } else {
        worst = std::max(worst, std::abs(ks_complement(numeric_column(a, c), numeric_column(b, c)) -
                                         oracle_ks_complement(numeric_column(a, c), numeric_column(b, c))));
      }
    }
    worst = std::max(worst, std::abs(coverage_score(a, b) - oracle_coverage(a, b)));
    worst = std::max(worst, std::abs(pairwise_correlation_score(a, b) - oracle_pairwise_correlation(a, b)));

    const Table real = make_retail_table(100, 300 + seed);
    const Table synth = corrupted_retail(100, 400 + seed);
    std::vector<HierarchyTuples> groups;
    std::vector<std::vector<std::string>> names;
    for (const auto& h : spec.hierarchies) {
      groups.push_back(observed_tuples(real, h));
      std::vector<std::string> n{h.granular};
      n.insert(n.end(), h.ancestors.begin(), h.ancestors.end());
      names.push_back(n);
    }
    worst = std::max(worst, std::abs(hcs(synth, groups) - oracle_hcs(real, synth, names)));

    auto within = [](double actual, double expected) {
      return std::abs(actual - expected) <=
             std::max(1e-6 * std::max(1.0, std::abs(actual)), 0.005 * (1 + 1e-9));
    };
    const std::size_t q = synth.column_index("Order Item Original Price");
    const std::size_t rate = synth.column_index("Order Item Discount Rate");
    const std::size_t disc = synth.column_index("Order Item Discount");
    const std::size_t sales = synth.column_index("Order Item Sales Price");
    const std::size_t od = synth.column_index("Order Date");
    const std::size_t dd = synth.column_index("Delivery Date");
    const std::vector<RowCheck> checks{
        [&](const Table& t, std::size_t r) { return within(t.number(r, disc), t.number(r, q) * t.number(r, rate)); },
        [&](const Table& t, std::size_t r) {
          return !t.is_missing(r, sales) &&
                 within(t.number(r, sales), t.number(r, q) - t.number(r, q) * t.number(r, rate));
        },
        [&](const Table& t, std::size_t r) { return t.timestamp(r, od).seconds < t.timestamp(r, dd).seconds; },
    };
    worst = std::max(worst, std::abs(mdi(synth, spec.math_groups, spec.temporal_chains) -
                                     oracle_share_mean(synth, checks)));
  }
  return {worst <= 1e-9, fmt::format("max deviation {:.3g} over 50 seeds", worst)};
}

// 5. Diffusion on a two-component mixture.
Outcome diffusion_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::RowVector2d m0(-1.5, 1.0), m1(1.0, -0.5);
  std::mt19937_64 rng(55);
  Eigen::MatrixXd x = 0.3 * nn::standard_normal(4000, 2, rng);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) += (std::uniform_real_distribution<double>()(rng) < 0.3) ? m0 : m1;
  ScoreConfig cfg;
  cfg.hidden = {128, 128};
  cfg.epochs = 600;
  cfg.seed = 56;
  const ScoreModel model = train_score(x, NoiseSchedule{}, cfg);
  const Eigen::MatrixXd s = sample_latents(model, 10000, {50, SamplerMode::kSde, 57});
  Eigen::RowVector2d sum0 = Eigen::RowVector2d::Zero(), sum1 = Eigen::RowVector2d::Zero();
  double n0 = 0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if ((s.row(i) - m0).squaredNorm() < (s.row(i) - m1).squaredNorm()) {
      sum0 += s.row(i);
      ++n0;
    } else {
      sum1 += s.row(i);
    }
  }
  const double w0 = n0 / s.rows();
  const Eigen::RowVector2d e0 = sum0 / n0, e1 = sum1 / (s.rows() - n0);
  const double mean_err = std::max((e0 - m0).cwiseAbs().maxCoeff(), (e1 - m1).cwiseAbs().maxCoeff());
  const double final_loss = model.loss_trace.back();
  const double secs = seconds_since(t0);
  const bool ok = std::abs(w0 - 0.3) <= 0.05 && mean_err <= 0.1 && final_loss < 2.0 && secs < 180.0;
  return {ok, fmt::format("weight {:.3f} (0.3), mean error {:.3f}, final loss {:.3f} < 2, {:.1f}s", w0, mean_err,
                          final_loss, secs)};
}

// 6. Analytic gradients against central differences.
Outcome gradients() {
  const Table t = compress(make_retail_table(40, 61), retail_spec()).compressed;
  const ColumnCodec codec = fit_codec(t);
  VaeConfig vc;
  vc.hidden = {16, 16};
  vc.d_latent = 6;
  vc.seed = 62;
  VaeModel vae = init_vae(codec, vc);
  const Eigen::MatrixXd xe = codec.encode(t);
  std::mt19937_64 rng(63);
  const Eigen::MatrixXd noise = nn::standard_normal(xe.rows(), vae.d_latent, rng);
  nn::Gradients eg = vae.encoder.zero_gradients(), dg = vae.decoder.zero_gradients();
  vae_loss(vae, codec, xe, noise, 0.5, &eg, &dg);
  const std::size_t ne = vae.encoder.num_parameters();
  const auto rv = grad_check(
      ne + vae.decoder.num_parameters(), 200, 64,
      [&](std::size_t i) -> double& { return i < ne ? vae.encoder.parameter(i) : vae.decoder.parameter(i - ne); },
      [&] { return vae_loss(vae, codec, xe, noise, 0.5).total; },
      [&](std::size_t i) { return i < ne ? nn::gradient_at(eg, i) : nn::gradient_at(dg, i - ne); });

  ScoreConfig sc;
  sc.hidden = {16, 16};
  sc.seed = 65;
  ScoreModel score = init_score_model(4, NoiseSchedule{}, sc);
  const Eigen::MatrixXd h0 = nn::standard_normal(32, 4, rng);
  const Eigen::MatrixXd eta = nn::standard_normal(32, 4, rng);
  Eigen::VectorXd sig(32);
  for (int i = 0; i < 32; ++i) sig(i) = 0.002 * std::pow(1500.0, i / 31.0);
  nn::Gradients g = score.net.zero_gradients();
  score_loss(score, h0, eta, sig, &g);
  const auto rs = grad_check(
      score.net.num_parameters(), 200, 66, [&](std::size_t i) -> double& { return score.net.parameter(i); },
      [&] { return score_loss(score, h0, eta, sig); }, [&](std::size_t i) { return nn::gradient_at(g, i); });
  const bool ok = rv.checked >= 100 && rs.checked >= 100 && rv.worst_relative_error < 1e-4 &&
                  rs.worst_relative_error < 1e-4;
  return {ok, fmt::format("VAE {} params max rel err {:.2e}; score {} params max rel err {:.2e}", rv.checked,
                          rv.worst_relative_error, rs.checked, rs.worst_relative_error)};
}

// 7. EM monotonicity and K=1 moments.
Outcome em_monotonic() {
  int decreases = 0;
  for (int f = 0; f < 20; ++f) {
    std::mt19937_64 rng(700 + f);
    const int d = 1 + f % 4;
    const int k = 2 + f % 3;
    const Eigen::MatrixXd centers = 4.0 * nn::standard_normal(k, d, rng);
    Eigen::MatrixXd x = nn::standard_normal(500, d, rng);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) += centers.row(static_cast<Eigen::Index>(rng() % k));
    const GmmModel m = fit_gmm(x, 1 + f % 5, f);
    for (std::size_t i = 1; i < m.log_likelihood_trace.size(); ++i) {
      if (m.log_likelihood_trace[i] < m.log_likelihood_trace[i - 1]) ++decreases;
    }
  }
  std::mt19937_64 rng(799);
  const Eigen::MatrixXd x = 2.0 * nn::standard_normal(800, 3, rng);
  const GmmModel one = fit_gmm(x, 1, 1);
  double moment_err = 0.0;
  for (Eigen::Index j = 0; j < 3; ++j) {
    double mean = 0.0, var = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= x.rows();
    for (Eigen::Index i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= x.rows();
    moment_err = std::max({moment_err, std::abs(one.means(0, j) - mean), std::abs(one.variances(0, j) - var)});
  }
  return {decreases == 0 && moment_err <= 1e-9,
          fmt::format("{} decreasing steps over 20 fixtures, K=1 moment error {:.2e}", decreases, moment_err)};
}

// 8. C2ST discrimination.
Outcome c2st() {
  std::mt19937_64 rng(81);
  const Eigen::MatrixXd a = nn::standard_normal(10000, 4, rng);
  const Eigen::MatrixXd b = nn::standard_normal(10000, 4, rng);
  Eigen::MatrixXd c = nn::standard_normal(10000, 4, rng);
  c.col(0).array() += 10.0;
  const double same = c2st_score(a, b, 82);
  const double shifted = c2st_score(a, c, 82);
  return {same >= 90.0 && shifted <= 5.0, fmt::format("identical {:.2f}, shifted {:.2f}", same, shifted)};
}

// 9. SMOTE convexity, with lambda recovered from the output.
Outcome smote_convexity() {
  const Table real = random_mixed_table(300, 4, 2, false, 91);
  SmoteConfig cfg;
  cfg.n_samples = 2000;
  cfg.seed = 92;
  std::vector<SmoteDraw> draws;
  const Table out = smote_generate(real, cfg, &draws);
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t r = 0; r < out.num_rows(); ++r) {
    const auto& d = draws[r];
    std::optional<double> lambda;
    for (std::size_t c = 0; c < real.num_columns(); ++c) {
      if (real.column(c).kind == ColumnKind::kCategorical) {
        const auto v = out.category(r, c);
        if (v != real.category(d.seed_row, c) && v != real.category(d.neighbor_row, c)) ++bad;
        continue;
      }
      const double a = real.number(d.seed_row, c), b = real.number(d.neighbor_row, c);
      if (a == b) {
        worst = std::max(worst, std::abs(out.number(r, c) - a));
        continue;
      }
      const double l = (out.number(r, c) - a) / (b - a);
      if (l < -1e-9 || l > 1 + 1e-9) ++bad;
      if (!lambda) lambda = l;
      worst = std::max(worst, std::abs(l - *lambda));
    }
  }
  return {bad == 0 && worst <= 1e-9,
          fmt::format("{} rows, {} violations, max lambda disagreement {:.2e}", out.num_rows(), bad, worst)};
}

// 10. Two full runs with the same config.
Outcome determinism(const fs::path& work) {
  const fs::path a = work / "pipeline_a" / "out";
  if (!fs::exists(a / "synthetic.csv")) return {false, "first pipeline run produced no output"};
  const fs::path cfg = prepare_pipeline(work / "pipeline_b");
  const int code = run_cli("pipeline -c " + cfg.string(), work / "pipeline_b.log");
  if (code != 0) return {false, fmt::format("second pipeline exited with {}", code)};
  const fs::path b = work / "pipeline_b" / "out";
  const bool csv = slurp(a / "synthetic.csv") == slurp(b / "synthetic.csv");
  const bool report = read_json_file(a / "report.json") == read_json_file(b / "report.json");
  const bool manifest = read_json_file(a / "model" / "manifest.json")["artifacts"] ==
                        read_json_file(b / "model" / "manifest.json")["artifacts"];
  return {csv && report && manifest,
          fmt::format("synthetic.csv {}, report {}, artifact hashes {}", csv ? "identical" : "differs",
                      report ? "identical" : "differs", manifest ? "identical" : "differ")};
}

Table separable(std::size_t n, std::uint64_t seed, bool shuffle) {
  std::vector<ColumnSchema> cols(4);
  cols[0] = {"x0", "", ColumnKind::kNumeric};
  cols[1] = {"x1", "", ColumnKind::kNumeric};
  cols[2] = {"color", "", ColumnKind::kCategorical};
  cols[3] = {"label", "", ColumnKind::kCategorical, ColumnRole::kTarget};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<std::vector<Value>> rows;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = rng() % 2;
    const double c = pos ? 2.0 : -2.0;
    rows.push_back({c + z(rng), c + z(rng), std::string(rng() % 2 ? "red" : "blue")});
    labels.push_back(pos ? "1" : "0");
  }
  if (shuffle) std::shuffle(labels.begin(), labels.end(), rng);
  TableBuilder b(cols);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].push_back(labels[i]);
    b.add_row(rows[i]);
  }
  return std::move(b).build();
}

// 11. Utility ranks real data above label-shuffled data.
Outcome utility_direction() {
  const Table train = separable(3000, 111, false);
  const Table test = separable(1000, 112, false);
  const Table shuffled = separable(3000, 113, true);
  const auto real = ml_efficiency(train, test, "label", UtilityTask::kClassification, UtilityConfig{}, 114);
  const auto noise = ml_efficiency(shuffled, test, "label", UtilityTask::kClassification, UtilityConfig{}, 114);
  const double auc_real = real.at("auc") / 100.0;
  const double auc_noise = noise.at("auc") / 100.0;
  return {auc_real >= 0.95 && std::abs(auc_noise - 0.5) <= 0.05,
          fmt::format("AUC real {:.4f}, shuffled {:.4f}", auc_real, auc_noise)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work, "Scratch directory for pipeline runs");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);
  fs::create_directories(work);
  const fs::path w = fs::absolute(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"compression round trip", round_trip},
      {"end-to-end HCS and MDI", [&] { return pipeline_preserves_relationships(w); }},
      {"DCR calibration", dcr_calibration},
      {"metric oracles", metric_oracles},
      {"diffusion sanity", diffusion_sanity},
      {"gradient correctness", gradients},
      {"EM monotonicity", em_monotonic},
      {"C2ST discrimination", c2st},
      {"SMOTE convexity", smote_convexity},
      {"determinism", [&] { return determinism(w); }},
      {"utility direction", utility_direction},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << fmt::format("{} {:>2} {}: {} [{:.1f}s]", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                             o.detail, seconds_since(t0))
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
