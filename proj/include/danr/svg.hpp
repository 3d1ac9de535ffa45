#pragma once

// Static SVG line charts of harness results.

#include <danr/error.hpp>
#include <danr/harness.hpp>
#include <danr/io.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace danr::plot {

enum class PlotKind { accuracy_vs_lambda, accuracy_vs_mu, accuracy_vs_noise, mse_vs_snapshot };

inline std::string to_string(PlotKind k) {
  switch (k) {
    case PlotKind::accuracy_vs_lambda: return "accuracy_vs_lambda";
    case PlotKind::accuracy_vs_mu: return "accuracy_vs_mu";
    case PlotKind::accuracy_vs_noise: return "accuracy_vs_noise";
    case PlotKind::mse_vs_snapshot: return "mse_vs_snapshot";
  }
  return "";
}

inline PlotKind parse_kind(const std::string& s) {
  for (auto k : {PlotKind::accuracy_vs_lambda, PlotKind::accuracy_vs_mu, PlotKind::accuracy_vs_noise,
                 PlotKind::mse_vs_snapshot}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidInput("unknown plot kind '" + s + "'");
}

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // sorted by x
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<Series> series;
};

namespace detail {

// Mean over seeds of f(seed's rows) keyed by x.
inline Series mean_series(const std::string& name, const std::map<double, std::vector<double>>& by_x) {
  Series s{name, {}};
  for (const auto& [x, vals] : by_x) {
    double m = 0.0;
    for (double v : vals) m += v;
    s.points.emplace_back(x, m / static_cast<double>(vals.size()));
  }
  return s;
}

// Per-seed best value over the rows sharing (seed, x), then the mean over seeds.
template <class Key>
Series best_then_mean(const std::string& name, const std::vector<harness::EvalRecord>& rows, Key&& key) {
  std::map<double, std::map<std::uint64_t, double>> best;
  for (const auto& r : rows) {
    auto& slot = best[key(r)];
    auto [it, fresh] = slot.emplace(r.seed, r.value);
    if (!fresh) it->second = std::max(it->second, r.value);
  }
  std::map<double, std::vector<double>> by_x;
  for (const auto& [x, per_seed] : best) {
    for (const auto& [s, v] : per_seed) by_x[x].push_back(v);
  }
  return mean_series(name, by_x);
}

inline double nearest(const std::vector<double>& values, double target) {
  double best = values.front();
  for (double v : values) {
    if (std::abs(std::log(v) - std::log(target)) < std::abs(std::log(best) - std::log(target))) best = v;
  }
  return best;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace detail

/// Builds the chart for `kind` from harness rows. Throws EmptyResults
/// when no row fits the requested kind.
inline Chart build_chart(const std::vector<harness::EvalRecord>& rows, PlotKind kind) {
  using harness::EvalRecord;
  Chart c;
  auto of = [&](const std::string& experiment, const std::string& mode) {
    return harness::select(rows, [&](const EvalRecord& r) {
      return r.experiment == experiment && r.mode == mode && r.error.empty();
    });
  };
  switch (kind) {
    case PlotKind::accuracy_vs_lambda: {
      c = {"Test accuracy vs lambda", "lambda", "accuracy", true, {}};
      const auto nl = of("classification", "nl");
      const auto danr = of("classification", "danr");
      if (!nl.empty()) c.series.push_back(detail::best_then_mean("network lasso", nl, [](auto& r) { return r.lambda; }));
      if (!danr.empty()) c.series.push_back(detail::best_then_mean("danr (best mu)", danr, [](auto& r) { return r.lambda; }));
      std::vector<double> xs;
      for (const auto& s : c.series) {
        for (const auto& p : s.points) xs.push_back(p.first);
      }
      for (const std::string mode : {"local", "global"}) {
        const auto flat = of("classification", mode);
        if (flat.empty()) continue;
        double m = 0.0;
        for (const auto& r : flat) m += r.value;
        m /= static_cast<double>(flat.size());
        Series s{mode, {}};
        if (xs.empty()) {
          s.points.emplace_back(1.0, m);
        } else {
          s.points.emplace_back(*std::min_element(xs.begin(), xs.end()), m);
          s.points.emplace_back(*std::max_element(xs.begin(), xs.end()), m);
        }
        c.series.push_back(std::move(s));
      }
      break;
    }
    case PlotKind::accuracy_vs_mu: {
      c = {"Test accuracy vs mu", "mu", "accuracy", false, {}};
      const auto danr = of("classification", "danr");
      if (danr.empty()) break;
      std::vector<double> lambdas;
      for (const auto& r : danr) lambdas.push_back(r.lambda);
      std::sort(lambdas.begin(), lambdas.end());
      lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
      std::vector<double> picks = {detail::nearest(lambdas, 1.0), detail::nearest(lambdas, 10.0)};
      picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
      for (double lam : picks) {
        const auto at = harness::select(danr, [&](const EvalRecord& r) { return r.lambda == lam; });
        c.series.push_back(detail::best_then_mean("lambda = " + detail::num(lam), at, [](auto& r) { return r.mu; }));
      }
      break;
    }
    case PlotKind::accuracy_vs_noise: {
      c = {"Best test accuracy vs noise", "fraction of malicious edges", "accuracy", false, {}};
      for (const std::string mode : {"nl", "danr"}) {
        const auto sel = of("noise", mode);
        if (sel.empty()) continue;
        c.series.push_back(detail::best_then_mean(mode == "nl" ? "network lasso" : "danr", sel,
                                                  [](auto& r) { return r.noise; }));
      }
      break;
    }
    case PlotKind::mse_vs_snapshot: {
      c = {"Test MSE per snapshot", "snapshot", "mse", false, {}};
      for (const std::string mode : {"none", "t_son", "t_sos", "st_danr"}) {
        const auto sel = of("temporal", mode);
        if (sel.empty()) continue;
        std::map<double, std::vector<double>> by_x;
        for (const auto& r : sel) by_x[r.snapshot + 1.0].push_back(r.value);
        c.series.push_back(detail::mean_series(mode, by_x));
      }
      break;
    }
  }
  if (c.series.empty()) throw EmptyResults("no results for plot kind " + to_string(kind));
  return c;
}

inline std::string chart_csv(const Chart& c) {
  std::string out = "series,x,y\n";
  for (const auto& s : c.series) {
    for (const auto& [x, y] : s.points) out += io::csv_field(s.name) + "," + io::format_double(x) + "," + io::format_double(y) + "\n";
  }
  return out;
}

inline std::string render_svg(const Chart& c) {
  const double W = 640.0, H = 420.0, L = 70.0, R = 170.0, T = 40.0, B = 55.0;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  auto tx = [&](double x) { return c.log_x ? std::log10(x) : x; };
  for (const auto& s : c.series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.05;
    y1 += 0.05;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(W) + "\" height=\"" +
                    detail::num(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::num(W / 2 - R / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         detail::escape(c.title) + "</text>\n";
  svg += "<line x1=\"" + detail::num(L) + "\" y1=\"" + detail::num(H - B) + "\" x2=\"" + detail::num(W - R) +
         "\" y2=\"" + detail::num(H - B) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + detail::num(L) + "\" y1=\"" + detail::num(T) + "\" x2=\"" + detail::num(L) + "\" y2=\"" +
         detail::num(H - B) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double xv = c.log_x ? std::pow(10.0, fx) : fx;
    const double gx = L + (W - L - R) * i / 4.0;
    svg += "<text x=\"" + detail::num(gx) + "\" y=\"" + detail::num(H - B + 16) + "\" text-anchor=\"middle\">" +
           detail::num(xv) + "</text>\n";
    const double yv = y0 + (y1 - y0) * i / 4.0;
    svg += "<text x=\"" + detail::num(L - 6) + "\" y=\"" + detail::num(py(yv) + 4) + "\" text-anchor=\"end\">" +
           detail::num(yv) + "</text>\n";
  }
  svg += "<text x=\"" + detail::num(L + (W - L - R) / 2) + "\" y=\"" + detail::num(H - 12) +
         "\" text-anchor=\"middle\">" + detail::escape(c.x_label + (c.log_x ? " (log scale)" : "")) + "</text>\n";
  svg += "<text transform=\"translate(18," + detail::num(T + (H - T - B) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + detail::escape(c.y_label) + "</text>\n";
  for (std::size_t i = 0; i < c.series.size(); ++i) {
    const auto& s = c.series[i];
    const std::string col = colors[i % 6];
    if (s.points.size() > 1) {
      svg += "<polyline fill=\"none\" stroke=\"" + col + "\" stroke-width=\"1.8\" points=\"";
      for (const auto& [x, y] : s.points) svg += detail::num(px(x)) + "," + detail::num(py(y)) + " ";
      svg += "\"/>\n";
    }
    for (const auto& [x, y] : s.points) {
      svg += "<circle cx=\"" + detail::num(px(x)) + "\" cy=\"" + detail::num(py(y)) + "\" r=\"2.5\" fill=\"" + col +
             "\"/>\n";
    }
    const double ly = T + 10 + 18.0 * static_cast<double>(i);
    svg += "<line x1=\"" + detail::num(W - R + 12) + "\" y1=\"" + detail::num(ly) + "\" x2=\"" +
           detail::num(W - R + 32) + "\" y2=\"" + detail::num(ly) + "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::num(W - R + 38) + "\" y=\"" + detail::num(ly + 4) + "\">" + detail::escape(s.name) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

/// Writes `<path>` (SVG) and the same path with extension .csv holding
/// the plotted points.
inline Chart emit_plot(const std::vector<harness::EvalRecord>& rows, PlotKind kind,
                       const std::filesystem::path& svg_path) {
  const auto chart = build_chart(rows, kind);
  io::write_file(svg_path, render_svg(chart));
  auto csv_path = svg_path;
  csv_path.replace_extension(".csv");
  io::write_file(csv_path, chart_csv(chart));
  return chart;
}

}  // namespace danr::plot
