#include <danr/io.hpp>
#include <danr/solver.hpp>
#include <danr/synthetic.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace danr;
namespace fs = std::filesystem;
using io::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("danr_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void expect_same_graph(const Graph& a, const Graph& b) {
  EXPECT_EQ(a.node_count, b.node_count);
  EXPECT_EQ(a.edges, b.edges);
  ASSERT_EQ(a.payloads.size(), b.payloads.size());
  for (std::size_t j = 0; j < a.payloads.size(); ++j) {
    EXPECT_TRUE(a.payloads[j].features == b.payloads[j].features) << j;
    EXPECT_TRUE(a.payloads[j].targets == b.payloads[j].targets) << j;
  }
  EXPECT_TRUE(a.coords == b.coords);
}

}  // namespace

TEST(GraphJson, RoundTripIsBitExact) {
  SyntheticParams sp;
  sp.seed = 21;
  const auto net = gen_synthetic(sp);
  const auto back = io::graph_from_json(json::parse(io::graph_to_json(net.graph).dump()));
  expect_same_graph(net.graph, back);
}

TEST(GraphJson, RoundTripThroughAFile) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix pts(12, 2);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = n01(rng) * 1e-3;
  std::vector<NodePayload> payloads(12);
  for (auto& p : payloads) p = {Matrix::Constant(1, 2, n01(rng)), Vector::Constant(1, n01(rng))};
  payloads[4] = {Matrix(0, 2), Vector(0)};
  auto g = knn_graph(pts, 3, KnnWeighting::inverse_distance, payloads);
  const auto dir = scratch_dir("file");
  io::save_graph(dir / "g.json", g);
  expect_same_graph(g, io::load_graph(dir / "g.json"));
}

TEST(GraphJson, UnweightedEdgesDefaultToOne) {
  const auto g = io::graph_from_json(json::parse(R"({"nodes": 3, "edges": [[0, 1], [2, 1, 0.5]]})"));
  ASSERT_EQ(g.edge_count(), 2);
  EXPECT_EQ(g.edges[0], (Edge{0, 1, 1.0}));
  EXPECT_EQ(g.edges[1], (Edge{1, 2, 0.5}));
}

TEST(GraphJson, RejectsMalformedDocuments) {
  EXPECT_THROW(io::graph_from_json(json::parse(R"({"edges": []})")), InvalidInput);
  EXPECT_THROW(io::graph_from_json(json::parse(R"({"nodes": 2, "edges": [[0]]})")), InvalidEdge);
  EXPECT_THROW(io::graph_from_json(json::parse(R"({"nodes": 2, "edges": [[0, 0]]})")), InvalidEdge);
  EXPECT_THROW(io::graph_from_json(json::parse(R"({"nodes": 2, "edges": [], "payloads": {"5": {"W": [], "y": []}}})")),
               InvalidInput);
  const auto dir = scratch_dir("bad");
  io::write_file(dir / "bad.json", "{nodes: ");
  EXPECT_THROW(io::load_graph(dir / "bad.json"), InvalidInput);
  EXPECT_THROW(io::load_graph(dir / "missing.json"), InvalidInput);
}

TEST(TemporalDir, RoundTrip) {
  DriftParams dp;
  dp.seed = 2;
  dp.snapshots = 4;
  const auto seq = gen_drift_sequence(dp);
  const auto dir = scratch_dir("temporal");
  io::save_temporal(dir, seq.train);
  EXPECT_TRUE(fs::exists(dir / "snapshot_0001.json"));
  EXPECT_TRUE(fs::exists(dir / "snapshot_0003.json"));
  const auto back = io::load_temporal(dir);
  ASSERT_EQ(back.snapshot_count(), 4);
  for (int t = 0; t < 4; ++t) {
    expect_same_graph(seq.train.snapshots[static_cast<std::size_t>(t)], back.snapshots[static_cast<std::size_t>(t)]);
  }
  ASSERT_EQ(back.links.size(), seq.train.links.size());
  for (std::size_t i = 0; i < back.links.size(); ++i) {
    EXPECT_EQ(back.links[i].node, seq.train.links[i].node);
    EXPECT_EQ(back.links[i].t, seq.train.links[i].t);
    EXPECT_EQ(back.links[i].weight, seq.train.links[i].weight);
  }
}

TEST(TemporalDir, MissingLinksFileLinksEveryPresentNode) {
  const auto dir = scratch_dir("nolinks");
  NodePayload full{Matrix::Ones(1, 2), Vector::Ones(1)};
  io::save_graph(dir / io::snapshot_name(0), build_graph(2, {{0, 1, 1.0}}, {full, full}));
  io::save_graph(dir / io::snapshot_name(1), build_graph(2, {}, {full, NodePayload{Matrix(0, 2), Vector(0)}}));
  const auto tg = io::load_temporal(dir);
  ASSERT_EQ(tg.links.size(), 1u);
  EXPECT_EQ(tg.links[0].node, 0);
}

TEST(TemporalDir, RejectsNonConsecutiveLinks) {
  const auto dir = scratch_dir("badlinks");
  for (int t = 0; t < 3; ++t) io::save_graph(dir / io::snapshot_name(t), build_graph(1, {}));
  io::write_file(dir / "temporal_links.json", "[[0, 1, 3]]");
  EXPECT_THROW(io::load_temporal(dir), InvalidEdge);
  EXPECT_THROW(io::load_temporal(dir / "nowhere"), InvalidInput);
}

TEST(PointsCsv, ParsesCoordinatesFeaturesAndTargets) {
  const auto t = io::parse_points_csv("id,x1,x2,age,\"rooms, total\",target\na,0,1,30,4,2.5\nb,1,1,40,3,-1\n");
  ASSERT_EQ(t.size(), 2);
  EXPECT_EQ(t.ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.coords.cols(), 2);
  EXPECT_EQ(t.features.cols(), 2);
  EXPECT_EQ(t.feature_names, (std::vector<std::string>{"age", "rooms, total"}));
  EXPECT_EQ(t.coords(1, 0), 1.0);
  EXPECT_EQ(t.features(0, 1), 4.0);
  EXPECT_EQ(t.targets[1], -1.0);
  const auto p = t.payloads();
  EXPECT_EQ(p[1].features(0, 0), 40.0);
  EXPECT_EQ(p[1].targets[0], -1.0);
}

TEST(PointsCsv, RejectsBadFiles) {
  EXPECT_THROW(io::parse_points_csv(""), InvalidInput);
  EXPECT_THROW(io::parse_points_csv("x1,f,target\n"), InvalidInput);
  EXPECT_THROW(io::parse_points_csv("id,f,target\na,1,2\n"), InvalidInput);
  EXPECT_THROW(io::parse_points_csv("id,x1,target\na,1\n"), InvalidInput);
  EXPECT_THROW(io::parse_points_csv("id,x1,target\na,1,high\n"), InvalidInput);
}

TEST(CsvField, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(io::csv_field("plain"), "plain");
  EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(io::split_csv_line(io::csv_field("say \"hi\", ok") + ",2"),
            (std::vector<std::string>{"say \"hi\", ok", "2"}));
}

TEST(Config, ParsesTypedValues) {
  const auto cfg = io::Config::parse("# comment\nlambda = 0.5\nmu=0.25  # trailing\n\nthreads = 3\nstrict = yes\n"
                                     "grid = 1, 2 ,3\nloss = svm\n");
  EXPECT_EQ(cfg.get("lambda", 0.0), 0.5);
  EXPECT_EQ(cfg.get("mu", 0.0), 0.25);
  EXPECT_EQ(cfg.get("threads", 1), 3);
  EXPECT_TRUE(cfg.get("strict", false));
  EXPECT_EQ(cfg.get_list("grid", {}), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(cfg.get("loss", std::string("ridge")), "svm");
  EXPECT_EQ(cfg.get("absent", 7), 7);
  EXPECT_THROW(cfg.get("loss", 1.0), InvalidInput);
  EXPECT_THROW(cfg.get("lambda", 1), InvalidInput);
  EXPECT_THROW(cfg.get("mu", false), InvalidInput);
}

TEST(Config, RejectsUnknownKeysAndBadLines) {
  const auto cfg = io::Config::parse("lambda = 1\nlamda = 2\n");
  EXPECT_THROW(cfg.check_known(io::solver_keys()), InvalidInput);
  EXPECT_NO_THROW(io::Config::parse("lambda = 1\n").check_known(io::solver_keys()));
  EXPECT_THROW(io::Config::parse("lambda 1\n"), InvalidInput);
  EXPECT_THROW(io::Config::parse(" = 1\n"), InvalidInput);
}

TEST(Config, SolverParams) {
  const auto p = io::solver_params(io::Config::parse("lambda = 2\nmu = 0.3\nmode = network_lasso\ninner = alternating\n"));
  EXPECT_EQ(p.lambda, 2.0);
  EXPECT_EQ(p.mu, 0.3);
  EXPECT_EQ(p.mode, Mode::network_lasso);
  EXPECT_EQ(p.inner, engine::InnerMethod::alternating);
  EXPECT_THROW(io::solver_params(io::Config::parse("inner = newton\n")), InvalidInput);
  EXPECT_THROW(io::solver_params(io::Config::parse("mu = 1.5\n")), InvalidInput);
}

TEST(Report, JsonAndTraceCsv) {
  const auto g = build_graph(2, {{0, 1, 1.0}},
                             {{(Matrix(1, 1) << 1).finished(), (Vector(1) << 0).finished()},
                              {(Matrix(1, 1) << 1).finished(), (Vector(1) << 2).finished()}});
  std::vector<NodeObjective> objs;
  for (const auto& p : g.payloads) objs.push_back(NodeObjective::ridge(p, 0.0));
  SolverParams params;
  params.lambda = 10.0;
  params.mode = Mode::network_lasso;
  const auto rep = solve(g, objs, params);
  const auto doc = io::report_to_json(g, rep, params);
  EXPECT_EQ(doc.at("converged").get<bool>(), rep.converged);
  EXPECT_EQ(doc.at("models").size(), 2u);
  EXPECT_NEAR(doc.at("models")[0][0].get<double>(), 1.0, 1e-3);
  EXPECT_EQ(doc.at("clusters").get<int>(), 1);
  EXPECT_EQ(doc.at("alpha").size(), 1u);
  EXPECT_EQ(doc.at("trace").at("objective").size(), rep.objective.size());
  EXPECT_EQ(doc.at("params").at("mode").get<std::string>(), "nl");

  const auto csv = io::trace_csv(rep.objective, rep.r_norm, rep.s_norm);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iter,objective,r_norm,s_norm");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto f = io::split_csv_line(line);
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(std::stoul(f[0]), rows + 1);
    EXPECT_EQ(std::stod(f[1]), rep.objective[rows]);
    ++rows;
  }
  EXPECT_EQ(rows, rep.objective.size());
}
