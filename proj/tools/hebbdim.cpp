// hebbdim: command-line front end for the experiments.

#include "CLI11.hpp"

#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hebbdim/error.hpp"
#include "hebbdim/harness.hpp"
#include "hebbdim/landscape.hpp"
#include "hebbdim/reduced.hpp"

namespace {

using namespace hebbdim;

constexpr int kExitUsage = 1;
constexpr int kExitFailedTrials = 2;

struct Globals {
  std::uint64_t seed = 0;
  std::string out = ".";
  int workers = 0;
};

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty() || text == "default") return default_grid();
  std::vector<double> values;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    // lo:hi:count, log-spaced
    double lo = 0.0, hi = 0.0;
    int count = 0;
    char sep1 = 0, sep2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> sep1 >> hi >> sep2 >> count) || sep1 != ':' || sep2 != ':') {
      throw InvalidArgument("grid must be 'default', lo:hi:count or a comma list");
    }
    return log_grid(lo, hi, count);
  }
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad grid value: " + cell);
    }
  }
  return values;
}

std::vector<DistributionKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<DistributionKind> kinds;
  for (const auto& n : names) kinds.push_back(DistributionKind::parse(n));
  return kinds;
}

int finish(const ExperimentResult& result, const ExperimentConfig& config) {
  for (const auto& f : result.files) {
    std::cout << (config.out_dir / f.name).string();
    if (f.name != "manifest.json") std::cout << " (" << f.rows << " rows)";
    std::cout << "\n";
  }
  if (!result.failures.empty()) {
    std::cerr << result.failures.size() << " failed trial(s), see manifest.json\n";
  }
  if (result.exceeded_failure_cap()) {
    std::cerr << result.invalid_points.size()
              << " grid point(s) exceeded the failure cap and are invalid\n";
    return kExitFailedTrials;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimensionality scaling of nonlinear Hebbian feature learning"};
  app.set_version_flag("--version", std::string(HEBBDIM_VERSION));
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Base seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  // census
  int census_n = 3;
  bool census_verify = false;
  auto* census_cmd = app.add_subcommand("census", "Count critical points for K = N");
  census_cmd->add_option("--n", census_n, "Input dimension")->required()->check(CLI::PositiveNumber);
  census_cmd->add_flag("--verify", census_verify, "Cross-check by enumeration (n <= 12)");

  // geometry
  std::vector<int> geo_n{10, 100, 1000, 10000};
  std::vector<int> geo_k{10};
  int geo_trials = 10000;
  auto* geo_cmd = app.add_subcommand("geometry", "Mean max overlap of random weights");
  geo_cmd->add_option("--n", geo_n, "Input dimensions")->delimiter(',')->capture_default_str();
  geo_cmd->add_option("--k", geo_k, "Feature counts")->delimiter(',')->capture_default_str();
  geo_cmd->add_option("--trials", geo_trials, "Trials per point")->capture_default_str();

  // landscape3d
  std::string land_dist = "laplace";
  int land_resolution = 91;
  std::int64_t land_samples = 100000;
  double land_theta = kDefaultThreshold;
  auto* land_cmd = app.add_subcommand("landscape3d", "Gradient magnitude on the N = 3 sphere");
  land_cmd->add_option("--dist", land_dist, "Latent distribution")->capture_default_str();
  land_cmd->add_option("--resolution", land_resolution, "Theta rows")->capture_default_str();
  land_cmd->add_option("--samples", land_samples, "Input samples")->capture_default_str();
  land_cmd->add_option("--theta", land_theta, "Rectifier threshold")->capture_default_str();

  // gradstats
  std::vector<std::string> gs_dist{"laplace"};
  double gs_theta = kDefaultThreshold;
  std::string gs_grid = "default";
  std::int64_t gs_samples = 1000000;
  auto* gs_cmd = app.add_subcommand("gradstats", "Gradient mean, spread and SNR versus overlap");
  gs_cmd->add_option("--dist", gs_dist, "Latent distributions")->delimiter(',')->capture_default_str();
  gs_cmd->add_option("--theta", gs_theta, "Rectifier threshold")->capture_default_str();
  gs_cmd->add_option("--grid", gs_grid, "'default', lo:hi:count (log) or comma list")
      ->capture_default_str();
  gs_cmd->add_option("--samples", gs_samples, "Samples per grid point")->capture_default_str();

  // simulate / scaling share the learning options
  struct LearnFlags {
    std::vector<int> n;
    std::vector<int> k;
    std::vector<std::string> dist;
    int trials = 1;
    double eta = 0.0;
    bool adaptive = false;
    double target = 0.7;
    double theta = kDefaultThreshold;
    std::int64_t max_steps = 10'000'000;
    std::int64_t record_every = 100;
    double overshoot = 0.0;
    std::string grid = "default";
    std::int64_t stats_samples = 1000000;
  };
  auto add_learn = [](CLI::App* cmd, LearnFlags& f) {
    cmd->add_option("--n", f.n, "Input dimensions")->delimiter(',')->capture_default_str();
    cmd->add_option("--k", f.k, "Feature counts (default K = N)")->delimiter(',');
    cmd->add_option("--dist", f.dist, "Latent distributions")->delimiter(',')->capture_default_str();
    cmd->add_option("--trials", f.trials, "Trials per point")->capture_default_str();
    auto* eta = cmd->add_option("--eta", f.eta, "Fixed learning rate (default 0.05 / N)");
    auto* adaptive = cmd->add_flag("--adaptive", f.adaptive, "Follow the optimal-rate schedule");
    eta->excludes(adaptive);
    cmd->add_option("--target", f.target, "Target overlap")->capture_default_str();
    cmd->add_option("--theta", f.theta, "Rectifier threshold")->capture_default_str();
    cmd->add_option("--max-steps", f.max_steps, "Step budget per trial")->capture_default_str();
    cmd->add_option("--record-every", f.record_every, "Recording interval")->capture_default_str();
    cmd->add_option("--overshoot", f.overshoot, "Keep running this fraction past the crossing");
    cmd->add_option("--grid", f.grid, "Gradient-stats grid for --adaptive")->capture_default_str();
    cmd->add_option("--stats-samples", f.stats_samples, "Gradient-stats samples per grid point")
        ->capture_default_str();
  };

  LearnFlags sim;
  sim.n = {10};
  sim.dist = {"laplace"};
  auto* sim_cmd = app.add_subcommand("simulate", "Full online learning trajectories");
  add_learn(sim_cmd, sim);

  LearnFlags scal;
  scal.n = {10, 20, 40, 80, 160};
  scal.dist = {"chi2"};
  scal.trials = 20;
  scal.adaptive = true;
  auto* scal_cmd = app.add_subcommand("scaling", "Learning time versus N");
  add_learn(scal_cmd, scal);
  bool scal_fixed = false;
  scal_cmd->add_flag("--fixed", scal_fixed, "Use the fixed rate instead of the adaptive schedule");
  double scal_cap = 0.05;
  scal_cmd->add_option("--failure-cap", scal_cap, "Failed-trial fraction that invalidates a point")
      ->capture_default_str();

  // predict-time
  int pt_n = 1000;
  int pt_k = 10;
  std::string pt_dist = "laplace";
  double pt_theta = kDefaultThreshold;
  double pt_d0 = 0.0;
  double pt_target = 0.7;
  std::int64_t pt_samples = 1000000;
  std::string pt_grid = "default";
  auto* pt_cmd = app.add_subcommand("predict-time", "Learning time from the optimal-rate drift");
  pt_cmd->add_option("--n", pt_n, "Input dimension")->capture_default_str();
  pt_cmd->add_option("--k", pt_k, "Feature count")->capture_default_str();
  pt_cmd->add_option("--dist", pt_dist, "Latent distribution")->capture_default_str();
  pt_cmd->add_option("--theta", pt_theta, "Rectifier threshold")->capture_default_str();
  pt_cmd->add_option("--d0", pt_d0, "Initial overlap (default sqrt(ln K / N))");
  pt_cmd->add_option("--target", pt_target, "Target overlap")->capture_default_str();
  pt_cmd->add_option("--samples", pt_samples, "Gradient-stats samples per grid point")
      ->capture_default_str();
  pt_cmd->add_option("--grid", pt_grid, "Gradient-stats grid")->capture_default_str();

  // fit
  std::string fit_input;
  std::string fit_model = "log";
  double fit_p = 1.0;
  auto* fit_cmd = app.add_subcommand("fit", "Power-law fit of a scaling.csv");
  fit_cmd->add_option("--input", fit_input, "scaling.csv (default <out>/scaling.csv)");
  fit_cmd->add_option("--model", fit_model, "pure or log")
      ->check(CLI::IsMember({"pure", "log"}))
      ->capture_default_str();
  fit_cmd->add_option("--p", fit_p, "Power of ln K in the log-corrected model")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    ExperimentConfig config;
    config.seed = g.seed;
    config.out_dir = g.out;
    config.workers = g.workers;

    auto apply_learn = [&](const LearnFlags& f, bool adaptive) {
      config.n_values = f.n;
      config.k_values = f.k;
      config.kinds = parse_kinds(f.dist);
      config.trials = f.trials;
      if (f.eta > 0.0) config.learn.eta = f.eta;
      config.learn.adaptive = adaptive;
      config.learn.target_overlap = f.target;
      config.learn.threshold = f.theta;
      config.learn.max_steps = f.max_steps;
      config.learn.record_every = f.record_every;
      config.learn.overshoot = f.overshoot;
      config.grid = parse_grid(f.grid);
      config.stats_samples = f.stats_samples;
    };

    if (census_cmd->parsed()) {
      const CriticalCensus c = census(census_n);
      std::cout << "n,minima,maxima,saddles\n"
                << c.n << "," << c.minima << "," << c.maxima << "," << c.saddles << "\n";
      if (census_verify) {
        if (census_n > kMaxEnumerationDim) throw InvalidArgument("--verify needs n <= 12");
        CriticalCensus counted;
        for (const auto& p : enumerate_critical_points(census_n)) {
          if (p.kind == PointKind::Minimum) ++counted.minima;
          if (p.kind == PointKind::Maximum) ++counted.maxima;
          if (p.kind == PointKind::Saddle) ++counted.saddles;
        }
        const bool ok = counted.minima == c.minima && counted.maxima == c.maxima &&
                        counted.saddles == c.saddles;
        std::cout << "enumeration: " << (ok ? "match" : "MISMATCH") << "\n";
        if (!ok) return kExitFailedTrials;
      }
      return 0;
    }
    if (geo_cmd->parsed()) {
      config.kind = ExperimentKind::OverlapGeometry;
      config.n_values = geo_n;
      config.k_values = geo_k;
      config.trials = geo_trials;
      return finish(run_experiment(config), config);
    }
    if (land_cmd->parsed()) {
      config.kind = ExperimentKind::Landscape3d;
      config.kinds = {DistributionKind::parse(land_dist)};
      config.resolution = land_resolution;
      config.field_samples = land_samples;
      config.learn.threshold = land_theta;
      return finish(run_experiment(config), config);
    }
    if (gs_cmd->parsed()) {
      config.kind = ExperimentKind::GradStats;
      config.kinds = parse_kinds(gs_dist);
      config.learn.threshold = gs_theta;
      config.grid = parse_grid(gs_grid);
      config.stats_samples = gs_samples;
      return finish(run_experiment(config), config);
    }
    if (sim_cmd->parsed()) {
      config.kind = ExperimentKind::Trajectories;
      apply_learn(sim, sim.adaptive);
      return finish(run_experiment(config), config);
    }
    if (scal_cmd->parsed()) {
      config.kind = ExperimentKind::Scaling;
      apply_learn(scal, !scal_fixed && !(scal.eta > 0.0));
      config.failure_cap = scal_cap;
      const ExperimentResult result = run_experiment(config);
      const int code = finish(result, config);
      for (const auto& r : result.records) {
        std::cout << "n=" << r.n << " k=" << r.k << " mean_T=" << format_number(r.mean_T)
                  << " failed=" << r.n_failed << "/" << r.n_trials << "\n";
      }
      return code;
    }
    if (pt_cmd->parsed()) {
      const DistributionKind kind = DistributionKind::parse(pt_dist);
      const double d0 = pt_d0 > 0.0 ? pt_d0 : std::sqrt(std::log(static_cast<double>(pt_k)) / pt_n);
      Rng rng(derive_seed(g.seed, 0));
      const auto grid = parse_grid(pt_grid);
      const GradientStats stats = gradient_stats(kind, pt_theta, grid, pt_samples, rng);
      const double t = predict_learning_time(stats, pt_n, d0, pt_target);
      std::cout << "n,k,dist,d0,target,predicted_T\n"
                << pt_n << "," << pt_k << "," << kind.name() << "," << format_number(d0) << ","
                << format_number(pt_target) << "," << format_number(t) << "\n";
      return 0;
    }
    if (fit_cmd->parsed()) {
      const std::string path =
          fit_input.empty() ? (std::filesystem::path(g.out) / "scaling.csv").string() : fit_input;
      const auto records = read_scaling_csv(path);
      const ScalingModel model =
          fit_model == "pure" ? ScalingModel::pure_power() : ScalingModel::log_corrected(fit_p);
      const PowerLawFit fit = fit_scaling(records, model);
      std::cout << "model,exponent,log_intercept,r_squared,points\n"
                << fit_model << "," << format_number(fit.exponent) << ","
                << format_number(fit.log_intercept) << "," << format_number(fit.r_squared) << ","
                << fit.points << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
