#pragma once

// Monte Carlo experiments: repeated noisy observations of a catalog signal,
// estimation, certification, tail and moment tables, a sub-Gaussian fit and
// deterministic CSV / JSON / SVG reports.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "phest/bottleneck.hpp"
#include "phest/errors.hpp"
#include "phest/estimator.hpp"
#include "phest/observation.hpp"
#include "phest/signal.hpp"

namespace phest {

struct ExperimentConfig {
  std::string signal = "stripes";
  nlohmann::json signal_params = nlohmann::json::object();
  std::optional<RegularityParams> regularity;  ///< defaults to the signal's claim
  std::vector<double> theta_grid{0.1};
  int reps = 10;
  std::uint64_t seed = 0;
  std::optional<int> n_override;
  std::vector<double> t_grid;  ///< empty: chosen from the data
  int max_n = kDefaultMaxN;
  std::string output_dir = "bench_out";

  void validate() const {
    if (reps < 1) throw ValidationError("config: reps must be >= 1");
    if (theta_grid.empty()) throw ValidationError("config: theta_grid must not be empty");
    for (double t : theta_grid) {
      if (!(t >= 0.0) || std::isinf(t)) throw ValidationError("config: theta values must be finite and >= 0");
    }
    for (double t : t_grid) {
      if (!(t >= 0.0) || std::isinf(t)) throw ValidationError("config: t values must be finite and >= 0");
    }
    if (n_override && *n_override < 1) throw ValidationError("config: n_override must be positive");
    if (regularity) regularity->validate();
  }
};

/// Strict parse: unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  static const std::vector<std::string> keys = {"signal",  "regularity", "theta_grid", "reps",  "seed",
                                                "n_override", "t_grid", "max_n",      "output_dir"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  ExperimentConfig c;
  try {
    if (j.contains("signal")) {
      const auto& s = j["signal"];
      if (s.is_string()) {
        c.signal = s.get<std::string>();
      } else {
        for (const auto& [key, _] : s.items()) {
          if (key != "name" && key != "params") throw ValidationError("config: unknown key 'signal." + key + "'");
        }
        c.signal = s.at("name").get<std::string>();
        if (s.contains("params")) c.signal_params = s["params"];
      }
    }
    if (j.contains("regularity")) {
      const auto& r = j["regularity"];
      for (const auto& [key, _] : r.items()) {
        if (key != "mu" && key != "r_mu") throw ValidationError("config: unknown key 'regularity." + key + "'");
      }
      // Dimension is taken from the signal when the experiment runs.
      c.regularity = RegularityParams{r.at("mu").get<double>(), r.at("r_mu").get<double>(), 1};
    }
    if (j.contains("theta_grid")) c.theta_grid = j["theta_grid"].get<std::vector<double>>();
    if (j.contains("reps")) c.reps = j["reps"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n_override") && !j["n_override"].is_null()) c.n_override = j["n_override"].get<int>();
    if (j.contains("t_grid")) c.t_grid = j["t_grid"].get<std::vector<double>>();
    if (j.contains("max_n")) c.max_n = j["max_n"].get<int>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

struct RunRecord {
  double theta = 0.0;
  int replicate = 0;
  bool ok = false;
  std::string error;  ///< set when the run failed
  Certificate certificate;
};

struct TailRow {
  double theta = 0.0;
  double t = 0.0;
  int runs = 0;            ///< successful runs at this theta
  double empirical = 0.0;  ///< P(d_b >= t theta) over those runs
  double envelope = 0.0;   ///< 2 h^{-d} exp(-h^d t^2 / 8), from d_b <= 2 theta ||W||_h
};

struct MomentRow {
  double theta = 0.0;
  int runs = 0;
  double mean = 0.0;
  double median = 0.0;
  double mean_square = 0.0;
  double pass_rate = 0.0;
  double mean_noise_norm = 0.0;
};

struct SubGaussianFit {
  bool available = false;
  double c0 = 0.0;
  double c1 = 0.0;
  std::size_t points = 0;
  std::string reason;
};

struct MonteCarloResult {
  ExperimentConfig config;
  EstimatorParams params;
  PersistenceDiagram truth;
  std::vector<RunRecord> runs;  ///< theta-major, replicate-minor
  std::vector<TailRow> tail;
  std::vector<MomentRow> moments;
};

/// Worker count from PHEST_THREADS, else the hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("PHEST_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// Parameters an experiment runs with (derived values or the n override).
inline EstimatorParams experiment_params(const ExperimentConfig& cfg, const SignalSpec& sig) {
  RegularityParams reg = cfg.regularity.value_or(sig.regularity);
  reg.d = sig.d;
  EstimatorParams p;
  if (cfg.n_override) {
    // Thickenings never depend on R_mu; only the step does.
    p = compute_params({reg.mu, 1.0, reg.d}, 0.0, std::max(cfg.max_n, 1 << 20));
    p.regularity = reg;
    p = with_n_override(p, *cfg.n_override);
  } else {
    p = compute_params(reg, 0.0, cfg.max_n);
  }
  return p;
}

/// Tail rows P(d_b >= t theta) per theta over the given t grid.
inline std::vector<TailRow> tail_table(const std::vector<RunRecord>& runs, const std::vector<double>& thetas,
                                       const std::vector<double>& t_grid, const GridSpec& grid) {
  std::vector<TailRow> out;
  const double hd = grid.cube_volume();
  for (double theta : thetas) {
    if (theta <= 0.0) continue;
    std::vector<double> ratios;
    for (const auto& r : runs) {
      if (r.ok && r.theta == theta) ratios.push_back(r.certificate.distance / theta);
    }
    if (ratios.empty()) continue;
    for (double t : t_grid) {
      const auto hits = std::count_if(ratios.begin(), ratios.end(), [t](double v) { return v >= t; });
      out.push_back({theta, t, static_cast<int>(ratios.size()), static_cast<double>(hits) / ratios.size(),
                     std::min(1.0, 2.0 / hd * std::exp(-hd * t * t / 8.0))});
    }
  }
  return out;
}

inline std::vector<MomentRow> moment_table(const std::vector<RunRecord>& runs, const std::vector<double>& thetas) {
  std::vector<MomentRow> out;
  for (double theta : thetas) {
    MomentRow m;
    m.theta = theta;
    std::vector<double> d;
    int passed = 0;
    for (const auto& r : runs) {
      if (r.theta != theta || !r.ok) continue;
      d.push_back(r.certificate.distance);
      m.mean_square += r.certificate.distance * r.certificate.distance;
      m.mean_noise_norm += r.certificate.noise_norm;
      passed += r.certificate.passed();
    }
    m.runs = static_cast<int>(d.size());
    if (!d.empty()) {
      for (double v : d) m.mean += v;
      m.mean /= d.size();
      m.mean_square /= d.size();
      m.mean_noise_norm /= d.size();
      m.median = detail::median(d);
      m.pass_rate = static_cast<double>(passed) / d.size();
    }
    out.push_back(m);
  }
  return out;
}

/// Default t grid: 41 points from 0 to 1.1 times the largest observed d_b / theta.
inline std::vector<double> default_t_grid(const std::vector<RunRecord>& runs) {
  double top = 0.0;
  for (const auto& r : runs) {
    if (r.ok && r.theta > 0.0) top = std::max(top, r.certificate.distance / r.theta);
  }
  if (top == 0.0) top = 1.0;
  std::vector<double> t;
  for (int i = 0; i <= 40; ++i) t.push_back(1.1 * top * i / 40.0);
  return t;
}

/// `points` values from the q-quantile of d_b / theta at `theta` to its maximum.
inline std::vector<double> quantile_t_grid(const std::vector<RunRecord>& runs, double theta, double q, int points) {
  if (!(theta > 0.0) || !(q >= 0.0 && q < 1.0) || points < 2) throw DomainError("quantile_t_grid: bad arguments");
  std::vector<double> v;
  for (const auto& r : runs) {
    if (r.ok && r.theta == theta) v.push_back(r.certificate.distance / theta);
  }
  if (v.empty()) throw DomainError("quantile_t_grid: no successful runs at this theta");
  std::sort(v.begin(), v.end());
  const double lo = v[static_cast<std::size_t>(q * (v.size() - 1))], hi = v.back();
  std::vector<double> t;
  for (int i = 0; i < points; ++i) t.push_back(lo + (hi - lo) * i / (points - 1));
  return t;
}

inline MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg) {
  cfg.validate();
  MonteCarloResult res;
  res.config = cfg;
  const auto sig = make_signal(cfg.signal, cfg.signal_params);
  res.params = experiment_params(cfg, sig);
  const auto grid = res.params.grid();
  if (grid.size() > (std::size_t{1} << 26)) throw ResourceError("run_monte_carlo: grid too large");
  res.truth = true_diagram(sig);
  const auto tables = cube_tables(sig, grid);

  const std::size_t total = cfg.theta_grid.size() * static_cast<std::size_t>(cfg.reps);
  res.runs.resize(total);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      RunRecord& r = res.runs[i];
      r.theta = cfg.theta_grid[i / cfg.reps];
      r.replicate = static_cast<int>(i % cfg.reps);
      try {
        auto params = res.params;
        params.theta = r.theta;
        // Replicate stream is shared across theta so runs differ only in noise level.
        const auto obs = sample_observation(tables.integral, r.theta, cfg.seed, r.replicate);
        const auto est = estimate_diagram(obs, params);
        r.certificate = certify_run(obs, params, est, res.truth, tables);
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const int nthreads = std::min<int>(thread_count(), static_cast<int>(std::max<std::size_t>(total, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const auto t_grid = cfg.t_grid.empty() ? default_t_grid(res.runs) : cfg.t_grid;
  res.tail = tail_table(res.runs, cfg.theta_grid, t_grid, grid);
  res.moments = moment_table(res.runs, cfg.theta_grid);
  return res;
}

/// Least squares of log P against t^2 over rows with 0 < P < 1: P ~ c0 exp(-c1 t^2).
/// Each row is weighted by the inverse delta-method variance of log P, runs P / (1 - P);
/// rows without a run count get unit weight.
inline SubGaussianFit fit_subgaussian(const std::vector<TailRow>& rows) {
  SubGaussianFit fit;
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    if (!(r.empirical > 0.0 && r.empirical < 1.0)) continue;
    const double w = r.runs > 0 ? r.runs * r.empirical / (1.0 - r.empirical) : 1.0;
    const double x = r.t * r.t, y = std::log(r.empirical);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
    ++fit.points;
  }
  if (fit.points < 3) {
    fit.reason = "fewer than 3 tail points strictly between 0 and 1";
    return fit;
  }
  const double den = sw * sxx - sx * sx;
  if (den <= 1e-12 * sw * sxx) {
    fit.reason = "degenerate t grid";
    return fit;
  }
  const double slope = (sw * sxy - sx * sy) / den;
  fit.c1 = -slope;
  fit.c0 = std::exp((sy - slope * sx) / sw);
  if (!(fit.c1 > 0.0)) {
    fit.reason = "fitted decay rate is not positive";
    return fit;
  }
  fit.available = true;
  return fit;
}

/// Slope of log(mean d_b) against log(theta) over rows with theta > 0 and mean > 0.
inline std::optional<double> loglog_slope(const std::vector<MomentRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (!(r.theta > 0.0 && r.mean > 0.0)) continue;
    const double x = std::log(r.theta), y = std::log(r.mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2 || n * sxx - sx * sx <= 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- reports ---------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) { return format_real(v); }

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::string color;
  bool markers = true;
};

// Line/scatter plot with linear or log axes. Non-finite or non-positive (log) points are skipped.
inline std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                            const std::vector<Series>& series, bool logx, bool logy) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 60;
  const auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  const auto ty = [&](double v) { return logy ? std::log10(v) : v; };
  const auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!logx || x > 0) && (!logy || y > 0);
  };
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (!usable(x, y)) continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
    }
  }
  if (x0 == kInf) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };
  std::ostringstream o;
  char buf[128];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double gx = x0 + (x1 - x0) * i / 4, gy = y0 + (y1 - y0) * i / 4;
    const double sx = L + (W - L - R) * i / 4, sy = H - B - (H - T - B) * i / 4;
    std::snprintf(buf, sizeof buf, "%.3g", logx ? std::pow(10.0, gx) : gx);
    o << "<text x=\"" << num(sx) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-size=\"11\">" << buf
      << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", logy ? std::pow(10.0, gy) : gy);
    o << "<text x=\"" << L - 6 << "\" y=\"" << num(sy + 4) << "\" text-anchor=\"end\" font-size=\"11\">" << buf
      << "</text>\n";
  }
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " << H / 2
    << ")\">" << ylabel << "</text>\n";
  int legend = 0;
  for (const auto& s : series) {
    std::string path;
    for (auto [x, y] : s.points) {
      if (!usable(x, y)) continue;
      path += (path.empty() ? "" : " ") + num(px(x)) + "," + num(py(y));
    }
    if (!path.empty()) {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"" << path << "\"/>\n";
    }
    if (s.markers) {
      for (auto [x, y] : s.points) {
        if (!usable(x, y)) continue;
        o << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    }
    o << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (legend++ + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
      << s.color << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace detail

inline std::string tail_csv(const std::vector<TailRow>& rows) {
  std::ostringstream o;
  o << "theta,t,empirical_prob,envelope\n";
  for (const auto& r : rows) {
    o << detail::fmt(r.theta) << ',' << detail::fmt(r.t) << ',' << detail::fmt(r.empirical) << ','
      << detail::fmt(r.envelope) << '\n';
  }
  return o.str();
}

inline std::string moments_csv(const std::vector<MomentRow>& rows) {
  std::ostringstream o;
  o << "theta,runs,mean_db,median_db,mean_db_sq,pass_rate,mean_noise_norm\n";
  for (const auto& r : rows) {
    o << detail::fmt(r.theta) << ',' << r.runs << ',' << detail::fmt(r.mean) << ',' << detail::fmt(r.median) << ','
      << detail::fmt(r.mean_square) << ',' << detail::fmt(r.pass_rate) << ',' << detail::fmt(r.mean_noise_norm) << '\n';
  }
  return o.str();
}

inline nlohmann::json report_json(const MonteCarloResult& res) {
  nlohmann::json runs = nlohmann::json::array();
  std::size_t failures = 0, cert_failures = 0;
  for (const auto& r : res.runs) {
    nlohmann::json j = {{"theta", r.theta}, {"replicate", r.replicate}, {"ok", r.ok}};
    if (r.ok) {
      j["certificate"] = to_json(r.certificate);
      cert_failures += !r.certificate.passed();
    } else {
      j["error"] = r.error;
      ++failures;
    }
    runs.push_back(std::move(j));
  }
  const auto fit = fit_subgaussian(res.tail);
  const auto slope = loglog_slope(res.moments);
  std::ostringstream truth;
  write_diagram_csv(truth, res.truth);
  return {{"signal", res.config.signal},
          {"signal_params", res.config.signal_params},
          {"seed", res.config.seed},
          {"reps", res.config.reps},
          {"params", to_json(res.params)},
          {"truth_csv", truth.str()},
          {"failed_runs", failures},
          {"failed_certificates", cert_failures},
          {"subgaussian_fit",
           {{"available", fit.available}, {"c0", fit.c0}, {"c1", fit.c1}, {"points", fit.points}, {"reason", fit.reason}}},
          {"loglog_slope", slope ? nlohmann::json(*slope) : nlohmann::json(nullptr)},
          {"runs", runs}};
}

/// Writes tail.csv, moments.csv, certificates.json, tail.svg and moments.svg.
inline void emit_report(const MonteCarloResult& res, const std::string& output_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir)) throw std::runtime_error("cannot create output directory " + output_dir);
  const fs::path dir(output_dir);
  detail::write_file(dir / "tail.csv", tail_csv(res.tail));
  detail::write_file(dir / "moments.csv", moments_csv(res.moments));
  detail::write_file(dir / "certificates.json", report_json(res).dump(2) + "\n");

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::vector<detail::Series> tail;
  std::vector<double> thetas;
  for (const auto& r : res.tail) {
    if (std::find(thetas.begin(), thetas.end(), r.theta) == thetas.end()) thetas.push_back(r.theta);
  }
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    detail::Series s{"theta = " + detail::fmt(thetas[i]), {}, colors[i % 6], true};
    for (const auto& r : res.tail) {
      if (r.theta == thetas[i]) s.points.emplace_back(r.t, r.empirical);
    }
    tail.push_back(std::move(s));
  }
  if (!thetas.empty()) {
    detail::Series env{"envelope from 2 theta ||W||_h", {}, "black", false};
    for (const auto& r : res.tail) {
      if (r.theta == thetas.front()) env.points.emplace_back(r.t, r.envelope);
    }
    tail.push_back(std::move(env));
  }
  const auto fit = fit_subgaussian(res.tail);
  if (fit.available && !thetas.empty()) {
    detail::Series f{"fit c0 exp(-c1 t^2)", {}, "gray", false};
    for (const auto& r : res.tail) {
      if (r.theta == thetas.front()) f.points.emplace_back(r.t, std::min(1.0, fit.c0 * std::exp(-fit.c1 * r.t * r.t)));
    }
    tail.push_back(std::move(f));
  }
  detail::write_file(dir / "tail.svg",
                     detail::svg_plot("P(d_b >= t theta)", "t", "empirical probability", tail, false, true));

  detail::Series mean{"mean d_b", {}, colors[0], true};
  detail::Series ref{"slope 1 reference", {}, "gray", false};
  for (const auto& m : res.moments) mean.points.emplace_back(m.theta, m.mean);
  for (const auto& m : res.moments) {
    if (!res.moments.empty() && res.moments.back().theta > 0 && res.moments.back().mean > 0) {
      ref.points.emplace_back(m.theta, res.moments.back().mean * m.theta / res.moments.back().theta);
    }
  }
  detail::write_file(dir / "moments.svg",
                     detail::svg_plot("mean d_b against theta", "theta", "mean d_b", {mean, ref}, true, true));
}

}  // namespace phest
