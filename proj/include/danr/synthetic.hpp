#pragma once

// Synthetic benchmark networks: community graphs with per-community linear
// classifiers, noise rewiring, fixed-degree graphs for timing runs, and
// drifting regression sequences for the temporal experiments.

#include <danr/error.hpp>
#include <danr/graph.hpp>
#include <danr/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace danr {

using Rng = std::mt19937_64;

/// Independent stream derived from (seed, stream id).
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

struct SyntheticParams {
  int communities = 5;
  int nodes_per_community = 20;
  double p_intra = 0.5;
  double p_inter = 0.02;
  int dim = 10;
  int examples_per_node = 5;
  double noise_std = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (communities < 1 || nodes_per_community < 1) throw InvalidInput("need at least one node");
    if (!(p_intra >= 0.0 && p_intra <= 1.0) || !(p_inter >= 0.0 && p_inter <= 1.0)) {
      throw InvalidInput("edge probabilities must lie in [0, 1]");
    }
    if (dim < 1) throw InvalidInput("dim must be >= 1");
    if (examples_per_node < 0) throw InvalidInput("examples_per_node must be >= 0");
    if (!(noise_std >= 0.0)) throw InvalidInput("noise_std must be >= 0");
  }
};

struct SyntheticNetwork {
  Graph graph;
  std::vector<int> community;  // per node
  Matrix models;               // dim x communities
  double noise_std = 1.0;
  std::uint64_t seed = 0;
};

inline double sign_label(double v) { return v >= 0.0 ? 1.0 : -1.0; }

/// Labelled pairs y = sign(w . X_k + eta), w ~ N(0, I), eta ~ N(0, noise^2).
inline NodePayload draw_examples(const Vector& model, int count, double noise_std, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  NodePayload p;
  p.features.resize(count, model.size());
  p.targets.resize(count);
  for (int l = 0; l < count; ++l) {
    for (Eigen::Index i = 0; i < model.size(); ++i) p.features(l, i) = normal(rng);
    const double eta = noise_std * normal(rng);
    p.targets[l] = sign_label(p.features.row(l).dot(model) + eta);
  }
  return p;
}

/// Community graph: edges appear with probability p_intra inside a
/// community and p_inter across; nodes are numbered community by community.
inline SyntheticNetwork gen_synthetic(const SyntheticParams& sp) {
  sp.validate();
  Rng rng = make_rng(sp.seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SyntheticNetwork net;
  net.noise_std = sp.noise_std;
  net.seed = sp.seed;
  net.models.resize(sp.dim, sp.communities);
  for (int k = 0; k < sp.communities; ++k) {
    for (int i = 0; i < sp.dim; ++i) net.models(i, k) = normal(rng);
  }
  const int n = sp.communities * sp.nodes_per_community;
  net.community.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) net.community[static_cast<std::size_t>(j)] = j / sp.nodes_per_community;
  std::vector<Edge> edges;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const bool same = net.community[static_cast<std::size_t>(j)] == net.community[static_cast<std::size_t>(k)];
      if (unif(rng) < (same ? sp.p_intra : sp.p_inter)) edges.push_back({j, k, 1.0});
    }
  }
  std::vector<NodePayload> payloads;
  payloads.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    payloads.push_back(draw_examples(net.models.col(net.community[static_cast<std::size_t>(j)]),
                                     sp.examples_per_node, sp.noise_std, rng));
  }
  net.graph = build_graph(n, edges, std::move(payloads));
  return net;
}

/// Fresh test pairs per node from the same labelling process, on a stream
/// separate from the training draw.
inline std::vector<NodePayload> gen_test_pairs(const SyntheticNetwork& net, int per_node) {
  Rng rng = make_rng(net.seed, 1);
  std::vector<NodePayload> out;
  out.reserve(net.community.size());
  for (int c : net.community) out.push_back(draw_examples(net.models.col(c), per_node, net.noise_std, rng));
  return out;
}

inline bool is_inter(const SyntheticNetwork& net, const Edge& e) {
  return net.community[static_cast<std::size_t>(e.j)] != net.community[static_cast<std::size_t>(e.k)];
}

struct RewireResult {
  SyntheticNetwork net;
  double achieved_noise = 0.0;
  bool clipped = false;
  std::string warning;
};

/// Drops every inter-community edge, then adds random inter-community
/// ("malicious") edges until they make up `noise` of all edges. Requests
/// beyond the number of available pairs are clipped with a warning.
inline RewireResult rewire_noise(const SyntheticNetwork& base, double noise, std::uint64_t seed) {
  if (!(noise >= 0.0 && noise < 1.0)) throw InvalidInput("noise must lie in [0, 1)");
  RewireResult res;
  res.net = base;
  std::vector<Edge> intra;
  for (const auto& e : base.graph.edges) {
    if (!is_inter(base, e)) intra.push_back(e);
  }
  const auto n_intra = static_cast<double>(intra.size());
  auto wanted = static_cast<long>(std::llround(noise * n_intra / (1.0 - noise)));
  std::vector<std::pair<int, int>> pool;
  const int n = base.graph.node_count;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      if (base.community[static_cast<std::size_t>(j)] != base.community[static_cast<std::size_t>(k)]) {
        pool.emplace_back(j, k);
      }
    }
  }
  if (wanted > static_cast<long>(pool.size())) {
    res.clipped = true;
    res.warning = "noise " + std::to_string(noise) + " needs " + std::to_string(wanted) +
                  " inter-community edges but only " + std::to_string(pool.size()) +
                  " pairs exist; clipped";
    wanted = static_cast<long>(pool.size());
  }
  Rng rng = make_rng(seed, 2);
  for (std::size_t i = 0; i < static_cast<std::size_t>(wanted); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  std::vector<Edge> edges = intra;
  for (long i = 0; i < wanted; ++i) {
    edges.push_back({pool[static_cast<std::size_t>(i)].first, pool[static_cast<std::size_t>(i)].second, 1.0});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.j != b.j ? a.j < b.j : a.k < b.k;
  });
  res.net.graph = build_graph(n, edges, base.graph.payloads);
  const double total = static_cast<double>(edges.size());
  res.achieved_noise = total > 0.0 ? static_cast<double>(wanted) / total : 0.0;
  return res;
}

/// Five-community graph whose expected degree is `degree` at every size,
/// with 82% of each node's edges inside its community.
inline SyntheticParams scalability_params(int nodes, double degree, std::uint64_t seed,
                                          int communities = 5) {
  if (nodes < 2 * communities) throw InvalidInput("scalability graphs need >= 2 nodes per community");
  SyntheticParams sp;
  sp.communities = communities;
  sp.nodes_per_community = nodes / communities;
  const int per = sp.nodes_per_community;
  const int total = per * communities;
  sp.p_intra = std::min(1.0, 0.82 * degree / static_cast<double>(per - 1));
  sp.p_inter = std::min(1.0, 0.18 * degree / static_cast<double>(total - per));
  sp.seed = seed;
  return sp;
}

/// Regression sequence for the temporal experiments. Training and test
/// nodes are scattered in the unit square, which is split into regions
/// with their own linear model. Models drift slowly; at `change_point`
/// the models of the first `changed_regions` regions jump.
struct DriftParams {
  int train_nodes = 60;
  int test_nodes = 30;
  int regions = 4;           // a regions_x x regions_y grid, regions_x = 2
  int snapshots = 5;
  int change_point = 3;      // first snapshot with the new models
  int changed_regions = 2;
  int dim = 3;
  int examples_per_node = 3;
  int test_examples_per_node = 10;
  double drift_std = 0.05;   // per-step model jitter
  double jump_std = 1.5;     // size of the change
  double noise_std = 0.5;
  int knn = 5;
  std::uint64_t seed = 1;
};

struct DriftSequence {
  TemporalGraph train;                   // one kNN snapshot per time step
  std::vector<std::vector<NodePayload>> test;  // [t][test node]
  Matrix train_coords;
  Matrix test_coords;
  std::vector<int> train_region;
  std::vector<int> test_region;
  std::vector<Matrix> models;            // [t] dim x regions
};

inline int region_of(double x, double y, int regions) {
  const int cols = 2;
  const int rows = std::max(1, regions / cols);
  const int cx = std::min(cols - 1, static_cast<int>(x * cols));
  const int cy = std::min(rows - 1, static_cast<int>(y * rows));
  return std::min(regions - 1, cy * cols + cx);
}

inline NodePayload draw_regression(const Vector& model, int count, double noise_std, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  NodePayload p;
  p.features.resize(count, model.size());
  p.targets.resize(count);
  for (int l = 0; l < count; ++l) {
    for (Eigen::Index i = 0; i < model.size(); ++i) p.features(l, i) = normal(rng);
    p.targets[l] = p.features.row(l).dot(model) + noise_std * normal(rng);
  }
  return p;
}

inline DriftSequence gen_drift_sequence(const DriftParams& dp) {
  if (dp.train_nodes < dp.knn + 1) throw TooFewPoints("drift sequence needs more training nodes than knn");
  if (dp.snapshots < 1 || dp.regions < 1 || dp.dim < 1) throw InvalidInput("invalid drift parameters");
  Rng rng = make_rng(dp.seed, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DriftSequence seq;
  auto place = [&](int count, Matrix& coords, std::vector<int>& region) {
    coords.resize(count, 2);
    region.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      coords(i, 0) = unif(rng);
      coords(i, 1) = unif(rng);
      region[static_cast<std::size_t>(i)] = region_of(coords(i, 0), coords(i, 1), dp.regions);
    }
  };
  place(dp.train_nodes, seq.train_coords, seq.train_region);
  place(dp.test_nodes, seq.test_coords, seq.test_region);
  Matrix current(dp.dim, dp.regions);
  for (int r = 0; r < dp.regions; ++r) {
    for (int i = 0; i < dp.dim; ++i) current(i, r) = normal(rng);
  }
  std::vector<Graph> snaps;
  for (int t = 0; t < dp.snapshots; ++t) {
    if (t > 0) {
      for (int r = 0; r < dp.regions; ++r) {
        const double step = (t == dp.change_point && r < dp.changed_regions) ? dp.jump_std : dp.drift_std;
        for (int i = 0; i < dp.dim; ++i) current(i, r) += step * normal(rng);
      }
    }
    seq.models.push_back(current);
    std::vector<NodePayload> train;
    for (int j = 0; j < dp.train_nodes; ++j) {
      train.push_back(draw_regression(current.col(seq.train_region[static_cast<std::size_t>(j)]),
                                      dp.examples_per_node, dp.noise_std, rng));
    }
    std::vector<NodePayload> test;
    for (int j = 0; j < dp.test_nodes; ++j) {
      test.push_back(draw_regression(current.col(seq.test_region[static_cast<std::size_t>(j)]),
                                     dp.test_examples_per_node, dp.noise_std, rng));
    }
    snaps.push_back(knn_graph(seq.train_coords, dp.knn, KnnWeighting::uniform, std::move(train)));
    seq.test.push_back(std::move(test));
  }
  auto links = default_temporal_links(snaps);
  seq.train = build_temporal_graph(std::move(snaps), std::move(links));
  return seq;
}

}  // namespace danr
