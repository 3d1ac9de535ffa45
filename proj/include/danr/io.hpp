#pragma once

// File formats: graph JSON, temporal directories, points CSV, key = value
// configs and solve reports.

#include <danr/error.hpp>
#include <danr/graph.hpp>
#include <danr/solver.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace danr::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

inline json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Matrix rows_matrix(const json& rows, Eigen::Index cols_if_empty = 0) {
  if (!rows.is_array()) throw InvalidInput("expected an array of rows");
  if (rows.empty()) return Matrix(0, cols_if_empty);
  const auto cols = static_cast<Eigen::Index>(rows.front().size());
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || static_cast<Eigen::Index>(rows[r].size()) != cols) {
      throw DimensionMismatch("ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline Vector json_vector(const json& arr) {
  if (!arr.is_array()) throw InvalidInput("expected an array");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

inline json graph_to_json(const Graph& g) {
  json doc;
  doc["nodes"] = g.node_count;
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back(json::array({e.j, e.k, e.weight}));
  doc["edges"] = std::move(edges);
  if (g.has_payloads()) {
    json payloads = json::object();
    for (int j = 0; j < g.node_count; ++j) {
      const auto& p = g.payloads[static_cast<std::size_t>(j)];
      if (p.empty()) continue;
      payloads[std::to_string(j)] = {{"W", matrix_rows(p.features)}, {"y", vector_json(p.targets)}};
    }
    doc["payloads"] = std::move(payloads);
  }
  if (g.has_coords()) doc["coords"] = matrix_rows(g.coords);
  return doc;
}

inline Graph graph_from_json(const json& doc) {
  try {
    const int n = doc.at("nodes").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) throw InvalidEdge("edges must be [j, k] or [j, k, w]");
      edges.push_back({e[0].get<int>(), e[1].get<int>(), e.size() == 3 ? e[2].get<double>() : 1.0});
    }
    std::vector<NodePayload> payloads;
    if (doc.contains("payloads")) {
      payloads.resize(static_cast<std::size_t>(std::max(0, n)));
      Eigen::Index dim = 0;
      for (const auto& [key, val] : doc.at("payloads").items()) {
        std::size_t pos = 0;
        const int id = std::stoi(key, &pos);
        if (pos != key.size() || id < 0 || id >= n) throw InvalidInput("payload id '" + key + "' out of range");
        auto& p = payloads[static_cast<std::size_t>(id)];
        p.features = rows_matrix(val.at("W"));
        p.targets = json_vector(val.at("y"));
        if (p.features.rows() > 0) dim = p.features.cols();
      }
      for (auto& p : payloads) {
        if (p.features.rows() == 0) p.features.resize(0, dim);
      }
    }
    Graph g = build_graph(n, edges, std::move(payloads));
    if (doc.contains("coords")) {
      g.coords = rows_matrix(doc.at("coords"));
      if (g.coords.rows() != n) throw DimensionMismatch("coords need one row per node");
    }
    return g;
  } catch (const json::exception& ex) {
    throw InvalidInput(std::string("malformed graph document: ") + ex.what());
  }
}

inline void save_graph(const fs::path& path, const Graph& g) { write_file(path, graph_to_json(g).dump()); }

inline Graph load_graph(const fs::path& path) {
  try {
    return graph_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& ex) {
    throw InvalidInput(path.string() + ": " + ex.what());
  }
}

inline std::string snapshot_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%04d.json", t + 1);
  return buf;
}

/// Writes snapshot_0001.json ... and temporal_links.json, whose entries
/// are [node, t, t + 1, weight] with 1-based snapshot indices.
inline void save_temporal(const fs::path& dir, const TemporalGraph& tg) {
  fs::create_directories(dir);
  for (int t = 0; t < tg.snapshot_count(); ++t) {
    save_graph(dir / snapshot_name(t), tg.snapshots[static_cast<std::size_t>(t)]);
  }
  json links = json::array();
  for (const auto& l : tg.links) links.push_back(json::array({l.node, l.t + 1, l.t + 2, l.weight}));
  write_file(dir / "temporal_links.json", links.dump());
}

/// Reads a temporal directory. Without temporal_links.json every node
/// present in two consecutive snapshots is linked with weight 1.
inline TemporalGraph load_temporal(const fs::path& dir) {
  std::vector<Graph> snaps;
  for (int t = 0;; ++t) {
    const auto path = dir / snapshot_name(t);
    if (!fs::exists(path)) break;
    snaps.push_back(load_graph(path));
  }
  if (snaps.empty()) throw InvalidInput("no snapshot_0001.json in " + dir.string());
  std::vector<TemporalLink> links;
  const auto link_path = dir / "temporal_links.json";
  if (!fs::exists(link_path)) {
    links = default_temporal_links(snaps);
  } else {
    try {
      for (const auto& l : json::parse(read_file(link_path))) {
        if (!l.is_array() || l.size() < 3 || l.size() > 4) {
          throw InvalidEdge("temporal links must be [node, t, t+1(, weight)]");
        }
        const int t = l[1].get<int>();
        if (l[2].get<int>() != t + 1) throw InvalidEdge("temporal links must join consecutive snapshots");
        links.push_back({l[0].get<int>(), t - 1, l.size() == 4 ? l[3].get<double>() : 1.0});
      }
    } catch (const json::exception& ex) {
      throw InvalidInput(std::string("malformed temporal_links.json: ") + ex.what());
    }
  }
  return build_temporal_graph(std::move(snaps), std::move(links));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("cannot parse " + what + " '" + s + "' as a number");
  }
}

/// Rows of a points file: id, coordinate columns x1, x2, ..., feature
/// columns, target. Coordinate columns are those named x<digits>.
struct PointsTable {
  std::vector<std::string> ids;
  Matrix coords;
  Matrix features;
  Vector targets;
  std::vector<std::string> feature_names;

  Eigen::Index size() const { return targets.size(); }

  /// One single-observation payload per point.
  std::vector<NodePayload> payloads() const {
    std::vector<NodePayload> out(static_cast<std::size_t>(size()));
    for (Eigen::Index i = 0; i < size(); ++i) {
      out[static_cast<std::size_t>(i)].features = features.row(i);
      out[static_cast<std::size_t>(i)].targets = Vector::Constant(1, targets[i]);
    }
    return out;
  }
};

inline bool is_coord_column(const std::string& name) {
  if (name.size() < 2 || name[0] != 'x') return false;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return false;
  }
  return true;
}

inline PointsTable parse_points_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("points file is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header.front() != "id" || header.back() != "target") {
    throw InvalidInput("points header must be id,x1,...,features...,target");
  }
  std::vector<std::size_t> coord_cols;
  std::vector<std::size_t> feat_cols;
  PointsTable t;
  for (std::size_t c = 1; c + 1 < header.size(); ++c) {
    if (is_coord_column(header[c])) {
      coord_cols.push_back(c);
    } else {
      feat_cols.push_back(c);
      t.feature_names.push_back(header[c]);
    }
  }
  if (coord_cols.empty()) throw InvalidInput("points file has no coordinate columns (x1, x2, ...)");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw InvalidInput("row " + std::to_string(rows.size() + 2) + " has " + std::to_string(f.size()) +
                         " fields, header has " + std::to_string(header.size()));
    }
    rows.push_back(std::move(f));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  t.coords.resize(n, static_cast<Eigen::Index>(coord_cols.size()));
  t.features.resize(n, static_cast<Eigen::Index>(feat_cols.size()));
  t.targets.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& f = rows[static_cast<std::size_t>(r)];
    t.ids.push_back(f.front());
    for (std::size_t c = 0; c < coord_cols.size(); ++c) {
      t.coords(r, static_cast<Eigen::Index>(c)) = parse_double(f[coord_cols[c]], header[coord_cols[c]]);
    }
    for (std::size_t c = 0; c < feat_cols.size(); ++c) {
      t.features(r, static_cast<Eigen::Index>(c)) = parse_double(f[feat_cols[c]], header[feat_cols[c]]);
    }
    t.targets[r] = parse_double(f.back(), "target");
  }
  return t;
}

inline PointsTable load_points(const fs::path& path) { return parse_points_csv(read_file(path)); }

/// key = value lines; '#' starts a comment.
class Config {
 public:
  static Config parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
      }
      const auto key = trim(line.substr(0, eq));
      if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static Config load(const fs::path& path) { return parse(read_file(path)); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  double get(const std::string& key, double fallback) const {
    return has(key) ? parse_double(values_.at(key), key) : fallback;
  }
  int get(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = parse_double(values_.at(key), key);
    if (v != std::floor(v)) throw InvalidInput(key + " must be an integer");
    return static_cast<int>(v);
  }
  bool get(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = values_.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidInput(key + " must be true or false");
  }
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::istringstream in(values_.at(key));
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      out.push_back(parse_double(item.substr(b, item.find_last_not_of(" \t") - b + 1), key));
    }
    return out;
  }

  /// Rejects keys outside `known`, so typos do not pass silently.
  void check_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      if (!known.count(k)) throw InvalidInput("unknown config key '" + k + "'");
    }
  }

 private:
  std::map<std::string, std::string> values_;
};

/// Solver keys shared by every command.
inline const std::set<std::string>& solver_keys() {
  static const std::set<std::string> keys = {
      "lambda", "mu", "p", "rho1", "eps_primal", "eps_dual", "eps_inner", "max_outer_iters",
      "max_inner_iters", "mode", "balance_rho", "threads", "inner"};
  return keys;
}

inline SolverParams solver_params(const Config& cfg, SolverParams p = {}) {
  p.lambda = cfg.get("lambda", p.lambda);
  p.mu = cfg.get("mu", p.mu);
  p.p = cfg.get("p", p.p);
  p.rho1 = cfg.get("rho1", p.rho1);
  p.eps_primal = cfg.get("eps_primal", p.eps_primal);
  p.eps_dual = cfg.get("eps_dual", p.eps_dual);
  p.eps_inner = cfg.get("eps_inner", p.eps_inner);
  p.max_outer_iters = cfg.get("max_outer_iters", p.max_outer_iters);
  p.max_inner_iters = cfg.get("max_inner_iters", p.max_inner_iters);
  if (cfg.has("mode")) p.mode = parse_mode(cfg.get("mode", std::string("danr")));
  p.balance_rho = cfg.get("balance_rho", p.balance_rho);
  p.threads = cfg.get("threads", p.threads);
  if (cfg.has("inner")) {
    const auto s = cfg.get("inner", std::string("joint"));
    if (s == "joint") {
      p.inner = engine::InnerMethod::joint;
    } else if (s == "alternating") {
      p.inner = engine::InnerMethod::alternating;
    } else {
      throw InvalidInput("inner must be joint or alternating");
    }
  }
  p.validate();
  return p;
}

inline json report_to_json(const Graph& g, const SolveReport& rep, const SolverParams& params) {
  json doc;
  doc["params"] = {{"lambda", params.lambda}, {"mu", params.mu},       {"p", params.p},
                   {"rho1", params.rho1},     {"mode", to_string(params.mode)}};
  doc["converged"] = rep.converged;
  doc["iterations"] = rep.iterations;
  doc["objective"] = rep.final_objective();
  doc["eps_primal"] = rep.eps_primal;
  doc["eps_dual"] = rep.eps_dual;
  doc["seconds"] = {{"x_update", rep.seconds_x}, {"edge_update", rep.seconds_edge}, {"dual_update", rep.seconds_dual}};
  doc["inner_iterations"] = rep.inner_iterations;
  json models = json::array();
  for (Eigen::Index j = 0; j < rep.x.cols(); ++j) models.push_back(vector_json(rep.x.col(j)));
  doc["models"] = std::move(models);
  json alpha = json::array();
  for (Eigen::Index e = 0; e < rep.alpha.cols(); ++e) {
    const auto& ed = g.edges[static_cast<std::size_t>(e)];
    alpha.push_back({{"j", ed.j}, {"k", ed.k}, {"norm", rep.alpha.col(e).norm()}});
  }
  doc["alpha"] = std::move(alpha);
  const auto labels = extract_clusters(g, rep.x, default_cluster_tolerance(rep.x));
  doc["clusters"] = cluster_count(labels);
  doc["cluster_labels"] = labels;
  doc["trace"] = {{"objective", rep.objective}, {"r_norm", rep.r_norm}, {"s_norm", rep.s_norm}};
  return doc;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// iter,objective,r_norm,s_norm (iterations counted from 1).
inline std::string trace_csv(const std::vector<double>& objective, const std::vector<double>& r,
                             const std::vector<double>& s) {
  std::string out = "iter,objective,r_norm,s_norm\n";
  for (std::size_t i = 0; i < objective.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(objective[i]) + "," + format_double(r[i]) + "," +
           format_double(s[i]) + "\n";
  }
  return out;
}

}  // namespace danr::io
