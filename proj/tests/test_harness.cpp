#include <danr/harness.hpp>
#include <danr/svg.hpp>

#include <gtest/gtest.h>

using namespace danr;
using namespace danr::harness;

namespace {

ClassificationSpec small_spec() {
  ClassificationSpec spec;
  spec.gen.communities = 2;
  spec.gen.nodes_per_community = 8;
  spec.gen.p_intra = 0.5;
  spec.gen.p_inter = 0.05;
  spec.seeds = {3};
  spec.lambdas = {0.01, 0.1, 1.0, 10.0};
  spec.mus = {0.6, 0.9};
  return spec;
}

EvalRecord without_runtime(EvalRecord r) {
  r.runtime = 0.0;
  return r;
}

EvalRecord accuracy_row(const std::string& mode, double lambda, double mu, double value) {
  EvalRecord r;
  r.experiment = "classification";
  r.seed = 1;
  r.mode = mode;
  r.lambda = lambda;
  r.mu = mu;
  r.metric = "accuracy";
  r.value = value;
  return r;
}

}  // namespace

TEST(Grids, SizesAndEndpoints) {
  const auto l = lambda_grid();
  ASSERT_EQ(l.size(), 45u);
  EXPECT_DOUBLE_EQ(l.front(), 1e-3);
  EXPECT_NEAR(l.back(), 1e-3 * std::pow(1.3, 44), 1e-9);
  for (std::size_t i = 1; i < l.size(); ++i) EXPECT_NEAR(l[i] / l[i - 1], 1.3, 1e-12);
  const auto m = mu_grid();
  ASSERT_EQ(m.size(), 36u);
  EXPECT_DOUBLE_EQ(m.front(), 0.3);
  EXPECT_NEAR(m.back(), 1.0, 1e-12);
}

TEST(ResultsCsv, RoundTrip) {
  std::vector<EvalRecord> rows;
  rows.push_back(accuracy_row("danr", 0.1 / 3.0, 0.62, 0.8125));
  rows.back().clusters = 4;
  rows.back().nonzero_alpha = 17;
  rows.back().iterations = 311;
  rows.back().runtime = 0.0123456789;
  EvalRecord bad = accuracy_row("nl", 1e-3, 1.0, 0.0);
  bad.converged = false;
  bad.error = "solver said \"no\", twice";
  rows.push_back(bad);
  EXPECT_EQ(from_csv(to_csv(rows)), rows);
  EXPECT_THROW(from_csv("a,b\n"), InvalidInput);
  EXPECT_THROW(from_csv(std::string(kCsvHeader) + "\n1,2\n"), InvalidInput);
}

TEST(Classification, RunCellReproducesTheSweep) {
  const auto spec = small_spec();
  const auto rows = run_classification_experiment(spec);
  // local + global + nl chain + one danr chain per mu
  EXPECT_EQ(rows.size(), 2u + 4u + 2u * 4u);
  for (std::size_t n : {std::size_t{0}, std::size_t{2}, std::size_t{3}}) {
    const auto cell = run_cell(spec, 3, Mode::danr, n, 0.9);
    const auto match = select(rows, [&](const EvalRecord& r) {
      return r.mode == "danr" && r.mu == 0.9 && r.lambda == spec.lambdas[n];
    });
    ASSERT_EQ(match.size(), 1u);
    EXPECT_EQ(without_runtime(cell), without_runtime(match[0]));
  }
  const auto local = run_cell(spec, 3, Mode::local, 0, 1.0);
  EXPECT_EQ(local.mode, "local");
  EXPECT_EQ(local.lambda, 0.0);
}

TEST(Classification, DanrRunsAtTheScaledPenalty) {
  const auto spec = small_spec();
  const auto p = cell_params(spec, Mode::danr, 2.0, 0.5);
  EXPECT_EQ(p.lambda, 4.0);
  EXPECT_EQ(p.mu, 0.5);
  const auto q = cell_params(spec, Mode::network_lasso, 2.0, 0.5);
  EXPECT_EQ(q.lambda, 2.0);
  EXPECT_EQ(q.mu, 1.0);
  EXPECT_EQ(cell_params(spec, Mode::global, 2.0, 0.5).lambda, 0.0);
}

TEST(Classification, SharedModelIsEasy) {
  auto spec = small_spec();
  spec.gen.communities = 1;
  spec.gen.nodes_per_community = 20;
  spec.gen.dim = 2;
  spec.gen.noise_std = 0.0;
  spec.modes = {Mode::network_lasso, Mode::danr};
  const auto s = summarize(run_classification_experiment(spec), 3);
  EXPECT_GE(s.nl_peak, 0.95);
  EXPECT_GE(s.danr_peak, 0.95);
}

TEST(Summaries, PeakAndDrop) {
  std::vector<EvalRecord> rows = {accuracy_row("local", 0, 1, 0.6), accuracy_row("global", 0, 1, 0.5),
                                  accuracy_row("nl", 0.1, 1, 0.7),  accuracy_row("nl", 1, 1, 0.8),
                                  accuracy_row("nl", 10, 1, 0.75),  accuracy_row("nl", 100, 1, 0.55),
                                  accuracy_row("danr", 1, 0.5, 0.7), accuracy_row("danr", 1, 0.7, 0.85),
                                  accuracy_row("danr", 10, 0.5, 0.82)};
  const auto s = summarize(rows, 1);
  EXPECT_EQ(s.local, 0.6);
  EXPECT_EQ(s.global, 0.5);
  EXPECT_EQ(s.nl_peak, 0.8);
  EXPECT_EQ(s.nl_peak_lambda, 1.0);
  EXPECT_NEAR(s.nl_drop, 0.2, 1e-15);
  EXPECT_EQ(s.danr_peak, 0.85);
  EXPECT_EQ(s.danr_peak_lambda, 1.0);
  const auto curve = accuracy_curve(rows, 1, "danr");
  EXPECT_EQ(curve.at(1.0), 0.85);
  EXPECT_EQ(curve.at(10.0), 0.82);
}

TEST(Noise, ClippedLevelsWarn) {
  NoiseSpec spec;
  spec.base = small_spec();
  spec.base.gen.communities = 1;
  spec.base.gen.nodes_per_community = 6;
  spec.base.gen.p_intra = 1.0;
  spec.base.lambdas = {1.0};
  spec.base.mus = {0.8};
  spec.levels = {0.0, 0.6};
  std::vector<std::string> warnings;
  const auto rows = run_noise_sweep(spec, &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("clipped"), std::string::npos);
  // only nl and danr are swept
  for (const auto& r : rows) EXPECT_TRUE(r.mode == "nl" || r.mode == "danr");
  EXPECT_EQ(rows.size(), 4u);
  spec.levels = {0.7};
  EXPECT_THROW(run_noise_sweep(spec), InvalidInput);
}

TEST(Noise, TableAveragesTheBestCellPerSeed) {
  std::vector<EvalRecord> rows;
  for (std::uint64_t seed : {1u, 2u}) {
    for (double lam : {0.1, 1.0}) {
      EvalRecord r = accuracy_row("danr", lam, 0.8, seed == 1 ? (lam == 1.0 ? 0.9 : 0.7) : 0.7);
      r.experiment = "noise";
      r.seed = seed;
      r.noise = 0.2;
      rows.push_back(r);
    }
  }
  const auto t = noise_table(rows);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].seeds, 2);
  EXPECT_NEAR(t[0].mean, 0.8, 1e-12);
  EXPECT_GT(t[0].stddev, 0.0);
  EXPECT_NE(noise_table_csv(t).find(",danr,"), std::string::npos);
}

TEST(Scale, DuplicateSizesWarnAndSmallSizesThrow) {
  std::vector<std::string> warnings;
  EXPECT_EQ(normalize_sizes({500, 100, 100}, &warnings), (std::vector<int>{100, 500}));
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_THROW(normalize_sizes({5}, nullptr), InvalidInput);
  ScaleSpec spec;
  spec.sizes = {50, 50};
  spec.degree = 6.0;
  spec.solver.lambda = 0.5;
  spec.solver.mu = 0.8;
  warnings.clear();
  const auto rows = run_scalability(spec, &warnings);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].nodes, 50);
  EXPECT_EQ(rows[0].metric, "seconds");
  EXPECT_GT(rows[0].value, 0.0);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Temporal, TableShowsNaForTemporalVariantsAtTheFirstSnapshot) {
  std::vector<EvalRecord> rows;
  for (const std::string v : {"none", "st_danr"}) {
    for (int t = 0; t < 3; ++t) {
      if (t == 0 && v != "none") continue;
      EvalRecord r;
      r.experiment = "temporal";
      r.mode = v;
      r.snapshot = t;
      r.metric = "mse";
      r.value = 1.0 + t;
      rows.push_back(r);
    }
  }
  const auto csv = temporal_table_csv(rows, 3, {TemporalVariant::none, TemporalVariant::st_danr});
  EXPECT_EQ(csv, "variant,snapshot_1,snapshot_2,snapshot_3\nnone,1,2,3\nst_danr,N/A,2,3\n");
}

TEST(Temporal, NoneVariantEqualsPerSnapshotDanr) {
  TemporalSpec spec;
  spec.gen.snapshots = 3;
  spec.gen.change_point = 2;
  spec.base.lambda1 = 0.2;
  spec.base.mu1 = 0.8;
  const auto data = standardize(drift_data(spec.gen));
  StreamResult res;
  const auto rows = run_temporal_variant(spec, data, 1, TemporalVariant::none, &res);
  ASSERT_EQ(rows.size(), 3u);
  SolverParams sp;
  sp.lambda = 0.2;
  sp.mu = 0.8;
  for (int t = 0; t < 3; ++t) {
    const auto& g = data.train.snapshots[static_cast<std::size_t>(t)];
    std::vector<NodeObjective> objs;
    for (const auto& p : g.payloads) {
      objs.push_back(p.empty() ? NodeObjective::zero(g.feature_dim()) : NodeObjective::ridge(p, spec.ridge_c));
    }
    const auto rep = solve(g, objs, sp);
    EXPECT_LE((rep.x - res.x[static_cast<std::size_t>(t)]).cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_NEAR(rows[static_cast<std::size_t>(t)].value,
                test_mse(data.train_coords, rep.x, data.test_coords, data.test[static_cast<std::size_t>(t)], 5), 1e-6);
  }
  const auto st = run_temporal_variant(spec, data, 1, TemporalVariant::st_danr);
  EXPECT_EQ(st.size(), 2u);
  EXPECT_EQ(st.front().snapshot, 1);
}

TEST(Temporal, StandardizedTrainingFeaturesHaveUnitScale) {
  DriftParams dp;
  dp.seed = 4;
  const auto data = standardize(drift_data(dp));
  Eigen::Index d = 0;
  double n = 0.0;
  Vector sum, sq;
  for (const auto& g : data.train.snapshots) {
    for (const auto& p : g.payloads) {
      if (p.empty()) continue;
      if (d == 0) {
        d = p.features.cols();
        sum = sq = Vector::Zero(d);
      }
      sum += p.features.colwise().sum().transpose();
      sq += p.features.array().square().colwise().sum().matrix().transpose();
      n += static_cast<double>(p.size());
    }
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    EXPECT_NEAR(sum[i] / n, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(sq[i] / n - (sum[i] / n) * (sum[i] / n)), 1.0, 1e-9);
  }
}

TEST(Plots, SinglePointGivesOneMarker) {
  const std::vector<EvalRecord> rows = {accuracy_row("nl", 1.0, 1.0, 0.7)};
  const auto chart = plot::build_chart(rows, plot::PlotKind::accuracy_vs_lambda);
  ASSERT_EQ(chart.series.size(), 1u);
  const auto svg = plot::render_svg(chart);
  std::size_t circles = 0;
  for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
  EXPECT_EQ(circles, 1u);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
}

TEST(Plots, KindWithoutRowsThrows) {
  const std::vector<EvalRecord> rows = {accuracy_row("nl", 1.0, 1.0, 0.7)};
  EXPECT_THROW(plot::build_chart(rows, plot::PlotKind::mse_vs_snapshot), EmptyResults);
  EXPECT_THROW(plot::build_chart({}, plot::PlotKind::accuracy_vs_noise), EmptyResults);
  EXPECT_THROW(plot::parse_kind("histogram"), InvalidInput);
}

TEST(Plots, EmitWritesSvgAndCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "danr_plot_test";
  std::filesystem::remove_all(dir);
  std::vector<EvalRecord> rows;
  for (double mu : {0.5, 0.7, 0.9}) rows.push_back(accuracy_row("danr", 1.0, mu, mu));
  plot::emit_plot(rows, plot::PlotKind::accuracy_vs_mu, dir / "mu.svg");
  EXPECT_TRUE(std::filesystem::exists(dir / "mu.svg"));
  const auto csv = io::read_file(dir / "mu.csv");
  EXPECT_EQ(csv.substr(0, 11), "series,x,y\n");
  EXPECT_NE(csv.find("0.69999999999999996,0.69999999999999996"), std::string::npos);
}
