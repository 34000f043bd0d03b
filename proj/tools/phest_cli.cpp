// phest: command-line front end.
//
//   phest estimate   --signal NAME [--params JSON] --theta T --seed S [--n-override N] --out DIR
//   phest truth      --signal NAME [--params JSON] [--oracle-n N] [--out FILE]
//   phest bench      [--config FILE] --seed S [--signal NAME] [--thetas ...] [--reps R] [--out DIR]
//   phest bottleneck A.csv B.csv [--degree S]
//   phest mu-reach   (--signal NAME [--params JSON] | --points FILE) --mu MU [--resolution N] [--sample-n N]
//   phest validate   --signal NAME [--params JSON] [--sample-n N]
//
// --params takes inline JSON, or @path to read it from a file.
// PHEST_THREADS sets the worker count of `bench`.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "phest/phest.hpp"

using namespace phest;
namespace fs = std::filesystem;

namespace {

nlohmann::json parse_params(const std::string& text) {
  if (text.empty()) return nlohmann::json::object();
  std::string body = text;
  if (text.front() == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw ValidationError("cannot open parameter file " + text.substr(1));
    std::stringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("--params: ") + e.what());
  }
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

std::string diagram_csv(const PersistenceDiagram& d) {
  std::ostringstream o;
  write_diagram_csv(o, d);
  return o.str();
}

PointCloudSet read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open point file " + path);
  std::vector<Point> pts;
  std::string line;
  int d = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ls(line);
    Point p;
    for (double v; ls >> v;) p.push_back(v);
    if (p.empty()) continue;  // header
    if (d == 0) d = static_cast<int>(p.size());
    if (static_cast<int>(p.size()) != d) throw ValidationError("point file: inconsistent dimension");
    pts.push_back(std::move(p));
  }
  if (pts.empty()) throw ValidationError("point file: no points");
  return PointCloudSet(d, std::move(pts));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistence diagram estimation from white-noise observations"};
  app.require_subcommand(1);

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate the diagram of a catalog signal from one noisy observation");
  std::string signal, params_text, out;
  double theta = 0.0;
  std::uint64_t seed = 0, rep = 0;
  int n_override = 0, max_n = kDefaultMaxN;
  est->add_option("--signal", signal, "Catalog signal name")->required();
  est->add_option("--params", params_text, "Signal parameters as JSON (or @file)");
  est->add_option("--theta", theta, "Noise level")->required()->check(CLI::NonNegativeNumber);
  est->add_option("--seed", seed, "Master seed")->required();
  est->add_option("--rep", rep, "Replicate index");
  est->add_option("--n-override", n_override, "Cubes per axis instead of the derived value");
  est->add_option("--max-n", max_n, "Cap on the derived cubes per axis");
  est->add_option("--out", out, "Output directory")->required();

  // truth
  auto* tru = app.add_subcommand("truth", "Ground-truth diagram of a catalog signal");
  int oracle_n = 0;
  std::string truth_out;
  tru->add_option("--signal", signal, "Catalog signal name")->required();
  tru->add_option("--params", params_text, "Signal parameters as JSON (or @file)");
  tru->add_option("--oracle-n", oracle_n, "Oracle resolution (default: the signal's)");
  tru->add_option("--out", truth_out, "CSV file (default: stdout)");

  // bench
  auto* ben = app.add_subcommand("bench", "Monte Carlo experiment with tail, moment and certificate reports");
  std::string config_path, bench_out;
  std::vector<double> thetas;
  int reps = 0;
  ben->add_option("--config", config_path, "Experiment config JSON");
  ben->add_option("--seed", seed, "Master seed")->required();
  ben->add_option("--signal", signal, "Catalog signal name (overrides the config)");
  ben->add_option("--params", params_text, "Signal parameters as JSON (or @file)");
  ben->add_option("--thetas", thetas, "Noise levels (overrides the config)");
  ben->add_option("--reps", reps, "Replicates per noise level (overrides the config)");
  ben->add_option("--n-override", n_override, "Cubes per axis instead of the derived value");
  ben->add_option("--out", bench_out, "Output directory (overrides the config)");

  // bottleneck
  auto* bot = app.add_subcommand("bottleneck", "Bottleneck distance between two diagram CSV files");
  std::string csv_a, csv_b;
  int degree = -1;
  bot->add_option("first", csv_a, "First diagram CSV")->required()->check(CLI::ExistingFile);
  bot->add_option("second", csv_b, "Second diagram CSV")->required()->check(CLI::ExistingFile);
  bot->add_option("--degree", degree, "Single homology degree (default: max over degrees)");

  // mu-reach
  auto* mur = app.add_subcommand("mu-reach", "Probe-grid estimate of the mu-reach of a boundary set");
  std::string points_path;
  double mu = 1.0;
  int resolution = 101, sample_n = 200;  // odd resolution keeps a probe on the centre lines
  mur->add_option("--signal", signal, "Use the region boundaries of this catalog signal");
  mur->add_option("--params", params_text, "Signal parameters as JSON (or @file)");
  mur->add_option("--points", points_path, "Point file, one point per line")->check(CLI::ExistingFile);
  mur->add_option("--mu", mu, "mu in (0,1]")->required();
  mur->add_option("--resolution", resolution, "Probe lattice resolution per axis");
  mur->add_option("--sample-n", sample_n, "Boundary sampling resolution for --signal");

  // validate
  auto* val = app.add_subcommand("validate", "Check the regularity assumptions of a catalog signal");
  val->add_option("--signal", signal, "Catalog signal name")->required();
  val->add_option("--params", params_text, "Signal parameters as JSON (or @file)");
  val->add_option("--sample-n", sample_n, "Sampling resolution (even, >= 4)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*est) {
      const auto sig = make_signal(signal, parse_params(params_text));
      auto params = compute_params(sig.regularity, theta, n_override > 0 ? std::max(max_n, 1 << 20) : max_n);
      if (n_override > 0) params = with_n_override(params, n_override);
      const auto tables = cube_tables(sig, params.grid());
      const auto obs = sample_observation(tables.integral, theta, seed, rep);
      const auto estimate = estimate_diagram(obs, params);
      const auto truth = true_diagram(sig);
      const auto plugin = plugin_diagram(obs);
      const auto cert = certify_run(obs, params, estimate, truth, tables);
      fs::create_directories(out);
      write_text(fs::path(out) / "estimate.csv", diagram_csv(estimate));
      write_text(fs::path(out) / "truth.csv", diagram_csv(truth));
      write_text(fs::path(out) / "plugin.csv", diagram_csv(plugin));
      nlohmann::json j = to_json(cert);
      j["params"] = to_json(params);
      j["signal"] = signal;
      j["plugin_distance"] = bottleneck_distance(plugin, truth);
      write_text(fs::path(out) / "certificate.json", j.dump(2) + "\n");
      std::cout << "n " << params.n << (params.on_theorem ? "" : " (outside guaranteed range)") << "\n"
                << "d_b(estimate, truth) " << format_real(cert.distance) << "\n"
                << "bound 2 theta ||W||_h " << format_real(cert.bound) << "\n"
                << "d_b(plugin, truth) " << format_real(j["plugin_distance"].get<double>()) << "\n"
                << "certificate " << (cert.passed() ? "passed" : "FAILED") << (params.on_theorem ? "" : " (advisory)")
                << "\n";
      return cert.passed() || !params.on_theorem ? 0 : 3;
    }
    if (*tru) {
      const auto sig = make_signal(signal, parse_params(params_text));
      const auto d = true_diagram(sig, oracle_n > 0 ? oracle_n : sig.oracle_n);
      if (truth_out.empty()) {
        std::cout << diagram_csv(d);
      } else {
        write_text(truth_out, diagram_csv(d));
      }
      return 0;
    }
    if (*ben) {
      ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : read_config(config_path);
      cfg.seed = seed;
      if (!signal.empty()) cfg.signal = signal;
      if (!params_text.empty()) cfg.signal_params = parse_params(params_text);
      if (!thetas.empty()) cfg.theta_grid = thetas;
      if (reps > 0) cfg.reps = reps;
      if (n_override > 0) cfg.n_override = n_override;
      if (!bench_out.empty()) cfg.output_dir = bench_out;
      cfg.validate();
      const auto res = run_monte_carlo(cfg);
      emit_report(res, cfg.output_dir);
      std::cout << moments_csv(res.moments);
      const auto fit = fit_subgaussian(res.tail);
      if (fit.available) {
        std::cout << "sub-Gaussian fit c0 " << format_real(fit.c0) << " c1 " << format_real(fit.c1) << "\n";
      } else {
        std::cout << "sub-Gaussian fit unavailable: " << fit.reason << "\n";
      }
      for (const auto& r : res.runs) {
        if (!r.ok) {
          std::cout << "run theta " << format_real(r.theta) << " rep " << r.replicate << " failed: " << r.error << "\n";
        } else if (!r.certificate.passed()) {
          std::cout << "certificate failed: theta " << format_real(r.theta) << " seed " << cfg.seed << " rep "
                    << r.replicate << (r.certificate.on_theorem ? "" : " (advisory)") << "\n";
        }
      }
      std::cout << "reports written to " << cfg.output_dir << "\n";
      return 0;
    }
    if (*bot) {
      const auto a = read_diagram_csv(csv_a), b = read_diagram_csv(csv_b);
      std::cout << format_real(degree >= 0 ? bottleneck_distance(a, b, degree) : bottleneck_distance(a, b)) << "\n";
      return 0;
    }
    if (*mur) {
      PointCloudSet k;
      double min_offset = 0.0;
      if (!points_path.empty()) {
        k = read_points(points_path);
      } else if (!signal.empty()) {
        const auto sig = make_signal(signal, parse_params(params_text));
        k = sample_boundary(sig, sample_n, (1u << sig.regions.size()) - 1);
        min_offset = 2.0 / sample_n;
      } else {
        throw ValidationError("mu-reach: give --signal or --points");
      }
      const auto r = estimate_mu_reach(k, mu, resolution, {.min_offset = min_offset});
      if (r.found) {
        std::cout << format_real(r.value) << "\n";
      } else {
        std::cout << "inf (no probe with gradient norm below mu)\n";
      }
      return 0;
    }
    if (*val) {
      const auto sig = make_signal(signal, parse_params(params_text));
      const auto rep_ = validate_assumptions(sig, sample_n);
      std::cout << to_json(rep_).dump(2) << "\n";
      return rep_.ok() ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
