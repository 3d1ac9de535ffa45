#pragma once

#include <danr/error.hpp>
#include <danr/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace danr {

using NodeId = int;

/// Observations held by one node: rows of `features` are the w vectors,
/// `targets` the matching y values (real targets or +/-1 labels).
struct NodePayload {
  Matrix features;
  Vector targets;

  Eigen::Index size() const { return targets.size(); }
  bool empty() const { return targets.size() == 0; }
};

struct Edge {
  NodeId j = 0;
  NodeId k = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected weighted graph with dense 0-based node ids. Edges are stored
/// once per unordered pair with j < k.
struct Graph {
  int node_count = 0;
  std::vector<Edge> edges;
  std::vector<NodePayload> payloads;  // empty, or one entry per node
  Matrix coords;                      // optional, one row per node

  int edge_count() const { return static_cast<int>(edges.size()); }
  bool has_payloads() const { return !payloads.empty(); }
  bool has_coords() const { return coords.rows() == node_count && coords.cols() > 0; }

  /// Dimension shared by all payload feature rows (0 if no observations).
  Eigen::Index feature_dim() const {
    for (const auto& p : payloads) {
      if (!p.empty()) return p.features.cols();
    }
    return 0;
  }

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(node_count), 0);
    for (const auto& e : edges) {
      ++deg[static_cast<std::size_t>(e.j)];
      ++deg[static_cast<std::size_t>(e.k)];
    }
    return deg;
  }
};

/// Validates and canonicalizes an edge list into a Graph.
/// Throws InvalidEdge on out-of-range ids, self-loops, negative or
/// non-finite weights and duplicate undirected pairs.
inline Graph build_graph(int node_count, const std::vector<Edge>& edge_list,
                         std::vector<NodePayload> payloads = {}) {
  if (node_count <= 0) throw InvalidInput("node_count must be positive");
  Graph g;
  g.node_count = node_count;
  g.edges.reserve(edge_list.size());
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& e : edge_list) {
    if (e.j < 0 || e.k < 0 || e.j >= node_count || e.k >= node_count) {
      throw InvalidEdge("edge (" + std::to_string(e.j) + "," + std::to_string(e.k) +
                        ") references a node outside [0," + std::to_string(node_count) + ")");
    }
    if (e.j == e.k) throw InvalidEdge("self-loop on node " + std::to_string(e.j));
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw InvalidEdge("edge (" + std::to_string(e.j) + "," + std::to_string(e.k) +
                        ") has invalid weight");
    }
    const Edge canon{std::min(e.j, e.k), std::max(e.j, e.k), e.weight};
    if (!seen.emplace(canon.j, canon.k).second) {
      throw InvalidEdge("duplicate undirected edge (" + std::to_string(canon.j) + "," +
                        std::to_string(canon.k) + ")");
    }
    g.edges.push_back(canon);
  }
  if (!payloads.empty()) {
    if (static_cast<int>(payloads.size()) != node_count) {
      throw InvalidInput("payload count does not match node_count");
    }
    Eigen::Index dim = -1;
    for (const auto& p : payloads) {
      if (p.empty()) continue;
      if (p.features.rows() != p.targets.size()) {
        throw DimensionMismatch("payload has mismatched feature/target counts");
      }
      if (dim < 0) dim = p.features.cols();
      if (p.features.cols() != dim) {
        throw DimensionMismatch("payload observation dimensions differ between nodes");
      }
    }
    g.payloads = std::move(payloads);
  }
  return g;
}

enum class KnnWeighting { uniform, inverse_distance };

/// Indices of the k nearest rows of `points` to row i (excluding i),
/// Euclidean distance, ties broken by lower index.
inline std::vector<int> nearest_neighbors(const Matrix& points, const Eigen::RowVectorXd& query,
                                          int k, int exclude = -1) {
  const int n = static_cast<int>(points.rows());
  std::vector<std::pair<double, int>> dist;
  dist.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (j == exclude) continue;
    dist.emplace_back((points.row(j) - query).squaredNorm(), j);
  }
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  std::vector<int> out(kk);
  for (std::size_t i = 0; i < kk; ++i) out[i] = dist[i].second;
  return out;
}

/// Symmetric k-nearest-neighbour graph: (i,j) is an edge iff one of the
/// two is among the other's k nearest neighbours.
inline Graph knn_graph(const Matrix& points, int k, KnnWeighting weighting = KnnWeighting::uniform,
                       std::vector<NodePayload> payloads = {}) {
  const int n = static_cast<int>(points.rows());
  if (k < 1) throw InvalidInput("k must be positive");
  if (n < k + 1) {
    throw TooFewPoints("knn_graph needs at least k+1 = " + std::to_string(k + 1) +
                       " points, got " + std::to_string(n));
  }
  std::set<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j : nearest_neighbors(points, points.row(i), k, i)) {
      pairs.emplace(std::min(i, j), std::max(i, j));
    }
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    double w = 1.0;
    if (weighting == KnnWeighting::inverse_distance) {
      const double dist = (points.row(i) - points.row(j)).norm();
      if (!(dist > 0.0)) {
        throw InvalidEdge("coincident points " + std::to_string(i) + " and " + std::to_string(j));
      }
      w = 1.0 / dist;
    }
    edges.push_back({i, j, w});
  }
  Graph g = build_graph(n, edges, std::move(payloads));
  g.coords = points;
  return g;
}

/// Link between node j in snapshot t and the same node in snapshot t+1
/// (t is 0-based in memory).
struct TemporalLink {
  NodeId node = 0;
  int t = 0;
  double weight = 1.0;
};

struct TemporalGraph {
  std::vector<Graph> snapshots;
  std::vector<TemporalLink> links;

  int snapshot_count() const { return static_cast<int>(snapshots.size()); }
  int node_count() const { return snapshots.empty() ? 0 : snapshots.front().node_count; }
};

/// True when node j carries observations in the given snapshot.
inline bool node_present(const Graph& g, NodeId j) {
  return !g.has_payloads() || !g.payloads[static_cast<std::size_t>(j)].empty();
}

/// Validates snapshot alignment and temporal links.
inline TemporalGraph build_temporal_graph(std::vector<Graph> snapshots,
                                          std::vector<TemporalLink> links) {
  if (snapshots.empty()) throw InvalidInput("temporal graph needs at least one snapshot");
  const int n = snapshots.front().node_count;
  for (const auto& s : snapshots) {
    if (s.node_count != n) throw InvalidInput("snapshots must share one node id space");
  }
  const int m = static_cast<int>(snapshots.size());
  std::set<std::pair<int, int>> seen;
  for (const auto& l : links) {
    if (l.node < 0 || l.node >= n) throw InvalidEdge("temporal link references unknown node");
    if (l.t < 0 || l.t + 1 >= m) {
      throw InvalidEdge("temporal link must join consecutive snapshots inside the sequence");
    }
    if (!std::isfinite(l.weight) || l.weight < 0.0) {
      throw InvalidEdge("temporal link has invalid weight");
    }
    if (!seen.emplace(l.node, l.t).second) throw InvalidEdge("duplicate temporal link");
  }
  return TemporalGraph{std::move(snapshots), std::move(links)};
}

/// Unit-weight temporal links for every node present in two consecutive
/// snapshots. A node missing from a snapshot breaks its chain there.
inline std::vector<TemporalLink> default_temporal_links(const std::vector<Graph>& snapshots,
                                                        double weight = 1.0) {
  std::vector<TemporalLink> links;
  for (int t = 0; t + 1 < static_cast<int>(snapshots.size()); ++t) {
    const auto& a = snapshots[static_cast<std::size_t>(t)];
    const auto& b = snapshots[static_cast<std::size_t>(t) + 1];
    for (NodeId j = 0; j < a.node_count; ++j) {
      if (node_present(a, j) && node_present(b, j)) links.push_back({j, t, weight});
    }
  }
  return links;
}

}  // namespace danr
