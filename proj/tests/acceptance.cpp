// Acceptance run: one PASS/FAIL line per criterion. Optional arguments
// select a subset, e.g. `hebbdim_acceptance 1 4 11`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hebbdim/geometry.hpp"
#include "hebbdim/harness.hpp"
#include "hebbdim/landscape.hpp"
#include "hebbdim/reduced.hpp"
#include "hebbdim/stats.hpp"

using namespace hebbdim;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hebbdim_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict census_matches_enumeration() {
  std::string first_bad;
  for (int n = 2; n <= 10; ++n) {
    std::map<PointKind, long long> counts;
    for (const auto& p : enumerate_critical_points(n)) ++counts[p.kind];
    const auto c = census(n);
    if (BigCount(counts[PointKind::Minimum]) != c.minima ||
        BigCount(counts[PointKind::Maximum]) != c.maxima ||
        BigCount(counts[PointKind::Saddle]) != c.saddles) {
      if (first_bad.empty()) first_bad = std::to_string(n);
    }
  }
  const auto c3 = census(3);
  const bool three = c3.minima == 6 && c3.maxima == 8 && c3.saddles == 12;
  return {first_bad.empty() && three,
          fmt("N=2..10 %s; N=3 -> (%s, %s, %s)", first_bad.empty() ? "all match" : "mismatch",
              c3.minima.str().c_str(), c3.maxima.str().c_str(), c3.saddles.str().c_str())};
}

Verdict overlap_decay() {
  Rng rng(derive_seed(kSeed, 2));
  std::vector<double> ns, means;
  for (int n : {10, 100, 1000, 10000}) {
    ns.push_back(n);
    means.push_back(measured_max_overlap(n, 10, 10000, rng).mean);
  }
  const PowerLawFit fit = fit_power_law(ns, means, {1.0, 1e9});
  return {fit.exponent >= -0.55 && fit.exponent <= -0.45,
          fmt("slope %.4f (target [-0.55, -0.45])", fit.exponent)};
}

Verdict log_k_dependence() {
  Rng rng(derive_seed(kSeed, 3));
  std::vector<double> lnk, sq;
  for (int k : {10, 100, 1000, 10000}) {
    lnk.push_back(std::log(static_cast<double>(k)));
    const double m = measured_max_overlap(1000, k, 10000, rng).mean;
    sq.push_back(m * m);
  }
  const LineFit fit = fit_line(lnk, sq);
  return {fit.r_squared > 0.95, fmt("R^2 %.5f, slope %.3g (R^2 > 0.95)", fit.r_squared, fit.slope)};
}

std::vector<double> stats_grid() {
  std::vector<double> g = default_grid();
  g.push_back(0.02);
  g.push_back(0.5);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

const GradientStats& shared_stats(const DistributionKind& kind) {
  static std::map<std::string, GradientStats> cache;
  auto it = cache.find(kind.name());
  if (it == cache.end()) {
    Rng rng(derive_seed(kSeed, 4, cache.size()));
    it = cache.emplace(kind.name(), gradient_stats(kind, kDefaultThreshold, stats_grid(), 1'000'000, rng))
             .first;
  }
  return it->second;
}

Verdict gradient_power_law() {
  const PowerLawFit sym = fit_power_law(shared_stats(DistributionKind::laplace()), {0.05, 0.3});
  const PowerLawFit asym = fit_power_law(shared_stats(DistributionKind::chi_square()), {0.05, 0.3});
  const bool pass = std::abs(sym.exponent - 3.0) <= 0.3 && std::abs(asym.exponent - 2.0) <= 0.3;
  return {pass, fmt("laplace %.3f (3 +- 0.3), chi2 %.3f (2 +- 0.3)", sym.exponent, asym.exponent)};
}

Verdict snr_profile() {
  bool pass = true;
  std::string detail;
  for (const auto& kind : {DistributionKind::laplace(), DistributionKind::chi_square()}) {
    const GradientStats& st = shared_stats(kind);
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < st.grid.size(); ++i) {
      if (st.grid[i] > 0.2) continue;
      lo = std::min(lo, st.sigma[i]);
      hi = std::max(hi, st.sigma[i]);
    }
    auto snr = [&](double d) {
      const auto i = std::find(st.grid.begin(), st.grid.end(), d) - st.grid.begin();
      return st.snr[i];
    };
    const double ratio = hi / lo;
    const double snr_ratio = snr(0.02) / snr(0.5);
    pass = pass && ratio < 1.5 && snr_ratio < 0.01;
    detail += fmt("%s sigma max/min %.3f, SNR(0.02)/SNR(0.5) %.2e; ", kind.name().c_str(), ratio,
                  snr_ratio);
  }
  detail += "(ratio < 1.5, SNR ratio < 0.01)";
  return {pass, detail};
}

Verdict cumulant_homogeneity() {
  Rng rng(derive_seed(kSeed, 6));
  bool pass = true;
  std::string detail;
  for (double d : {0.25, 0.5, 0.75}) {
    const Summary s = summarize(sample_u(d, DistributionKind::laplace(), 10'000'000, rng));
    const double expected = 3.0 * std::pow(d, 4);
    const double z = (s.kappa4 - expected) / s.se_kappa4;
    pass = pass && std::abs(z) <= 3.0;
    detail += fmt("d=%.2f k4 %.5f vs %.5f (z %.2f); ", d, s.kappa4, expected, z);
  }
  return {pass, detail + "(|z| <= 3)"};
}

Verdict optimal_rate() {
  const double d = 0.2;
  const int n = 100;
  bool pass = true;
  std::string detail;
  int idx = 0;
  for (const auto& kind : {DistributionKind::laplace(), DistributionKind::chi_square()}) {
    const GradientStats& st = shared_stats(kind);
    const double sigma = st.sigma_at(d);
    const double best = optimal_eta(st.mu_at(d), sigma * sigma, n, d);
    const std::vector<double> etas{0.5 * best, best, 2.0 * best};
    Rng rng(derive_seed(kSeed, 7, idx++));
    const DriftComparison cmp = one_step_drift(kind, kDefaultThreshold, n, d, etas, 1, 100'000, rng);
    const double z_half = -cmp.diff_vs_reference[0] / cmp.diff_se[0];
    const double z_double = -cmp.diff_vs_reference[2] / cmp.diff_se[2];
    pass = pass && z_half >= 3.0 && z_double >= 3.0;
    detail += fmt("%s eta* %.3g: margin vs 0.5eta* %.1f se, vs 2eta* %.1f se; ", kind.name().c_str(),
                  best, z_half, z_double);
  }
  return {pass, detail + "(>= 3 se)"};
}

struct Path {
  std::vector<double> step;
  std::vector<double> overlap;

  double at(double s) const {
    const auto it = std::lower_bound(step.begin(), step.end(), s);
    if (it == step.begin()) return overlap.front();
    if (it == step.end()) return overlap.back();
    const std::size_t j = static_cast<std::size_t>(it - step.begin());
    const double t = (s - step[j - 1]) / (step[j] - step[j - 1]);
    return overlap[j - 1] + t * (overlap[j] - overlap[j - 1]);
  }

  double crossing(double target) const {
    for (std::size_t i = 0; i < overlap.size(); ++i) {
      if (overlap[i] >= target) return step[i];
    }
    return NAN;
  }
};

// Each N contributes the mean of its runs, each aligned at its own crossing.
// Single runs scatter too much for a fixed 0.1 band to be seed-independent.
Verdict trajectory_collapse() {
  const double target = 0.75;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Trajectories;
  cfg.n_values = {10, 20, 40, 80, 160};
  cfg.kinds = {DistributionKind::laplace()};
  cfg.trials = 8;
  cfg.seed = kSeed;
  cfg.out_dir = scratch("collapse");
  cfg.learn.eta = 3.125e-4;
  cfg.learn.target_overlap = target;
  cfg.learn.overshoot = 0.25;
  cfg.learn.record_every = 10;
  cfg.learn.max_steps = 100'000'000;
  const ExperimentResult res = run_experiment(cfg);
  if (!res.failures.empty()) return {false, "a trajectory did not reach the target"};

  std::map<int, std::map<int, Path>> runs;  // n -> trial -> path
  std::ifstream in(cfg.out_dir / "trajectory.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> c;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    Path& p = runs[std::stoi(c[1])][std::stoi(c[0])];
    p.step.push_back(std::stod(c[3]));
    p.overlap.push_back(std::stod(c[4]));
  }

  auto median_crossing = [&](int n) {
    std::vector<double> t;
    for (const auto& [trial, p] : runs[n]) t.push_back(p.crossing(target));
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
  };
  auto aligned_mean = [&](int n, double offset) {
    double sum = 0.0;
    for (const auto& [trial, p] : runs[n]) sum += p.at(p.crossing(target) + offset);
    return sum / static_cast<double>(runs[n].size());
  };

  double worst = 0.0;
  std::string worst_pair;
  for (auto a = runs.begin(); a != runs.end(); ++a) {
    for (auto b = std::next(a); b != runs.end(); ++b) {
      const double half = 0.2 * std::min(median_crossing(a->first), median_crossing(b->first));
      for (int i = -50; i <= 50; ++i) {
        const double off = half * i / 50.0;
        const double dev = std::abs(aligned_mean(a->first, off) - aligned_mean(b->first, off));
        if (dev > worst) {
          worst = dev;
          worst_pair = fmt("N=%d vs N=%d", a->first, b->first);
        }
      }
    }
  }
  return {worst < 0.1, fmt("max pairwise deviation %.4f at %s over %d runs per N (< 0.1)", worst,
                           worst_pair.c_str(), cfg.trials)};
}

Verdict learning_time_scaling() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Scaling;
  cfg.n_values = {10, 20, 40, 80, 160};
  cfg.kinds = {DistributionKind::chi_square()};
  cfg.trials = 20;
  cfg.seed = kSeed;
  cfg.out_dir = scratch("scaling");
  cfg.learn.adaptive = true;
  cfg.learn.target_overlap = 0.7;
  cfg.learn.max_steps = 100'000'000;
  const ExperimentResult res = run_experiment(cfg);
  const PowerLawFit fit = fit_scaling(res.records, ScalingModel::log_corrected(1.0));
  std::string times;
  for (const auto& r : res.records) times += fmt("%d:%.0f ", r.n, r.mean_T);
  const bool pass = std::abs(fit.exponent - 2.0) <= 0.3 && fit.r_squared > 0.9 &&
                    !res.exceeded_failure_cap();
  return {pass, fmt("alpha %.3f, R^2 %.4f, failed %zu (2 +- 0.3, R^2 > 0.9); mean_T %s",
                    fit.exponent, fit.r_squared, res.failures.size(), times.c_str())};
}

Verdict symmetric_ratio() {
  Rng rng(derive_seed(kSeed, 10));
  const GradientStats st =
      gradient_stats(DistributionKind::laplace(), kDefaultThreshold, log_grid(0.02, 0.8, 30), 1'000'000, rng);
  const int k = 10;
  auto time = [&](int n) {
    return predict_learning_time(st, n, std::sqrt(std::log(double(k)) / n), 0.7);
  };
  const double ratio = time(2000) / time(1000);
  return {std::abs(ratio - 8.0) <= 2.0, fmt("T(2000)/T(1000) = %.3f (8 +- 25%%)", ratio)};
}

Verdict determinism() {
  std::vector<ExperimentConfig> configs;
  ExperimentConfig geo;
  geo.kind = ExperimentKind::OverlapGeometry;
  geo.n_values = {10, 100};
  geo.k_values = {10, 1000};
  geo.trials = 500;
  configs.push_back(geo);
  ExperimentConfig gs;
  gs.kind = ExperimentKind::GradStats;
  gs.kinds = {DistributionKind::laplace(), DistributionKind::chi_square()};
  gs.grid = log_grid(0.05, 0.8, 6);
  gs.stats_samples = 20000;
  configs.push_back(gs);
  ExperimentConfig land;
  land.kind = ExperimentKind::Landscape3d;
  land.kinds = {DistributionKind::laplace()};
  land.resolution = 13;
  land.field_samples = 5000;
  configs.push_back(land);
  ExperimentConfig sc;
  sc.kind = ExperimentKind::Scaling;
  sc.n_values = {8, 16};
  sc.trials = 4;
  sc.learn.adaptive = true;
  sc.stats_samples = 20000;
  configs.push_back(sc);
  ExperimentConfig tr = sc;
  tr.kind = ExperimentKind::Trajectories;
  tr.learn.record_every = 25;
  configs.push_back(tr);

  int compared = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    ExperimentConfig c = configs[i];
    c.seed = kSeed + i;
    c.out_dir = scratch("det_a");
    const ExperimentResult a = run_experiment(c);
    const fs::path first = c.out_dir;
    c.out_dir = scratch("det_b");
    run_experiment(c);
    for (const auto& f : a.files) {
      ++compared;
      if (slurp(first / f.name) != slurp(c.out_dir / f.name)) {
        return {false, "differs: " + to_string(c.kind) + "/" + f.name};
      }
    }
  }
  return {true, fmt("%d files byte-identical across reruns", compared)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "critical-point census", 1.0, census_matches_enumeration},
      {2, "overlap decay exponent", 60.0, overlap_decay},
      {3, "logarithmic K dependence", 60.0, log_k_dependence},
      {4, "gradient power law", 300.0, gradient_power_law},
      {5, "SNR profile", 300.0, snr_profile},
      {6, "cumulant homogeneity", 60.0, cumulant_homogeneity},
      {7, "optimal rate", 60.0, optimal_rate},
      {8, "trajectory collapse", 1800.0, trajectory_collapse},
      {9, "learning-time scaling", 7200.0, learning_time_scaling},
      {10, "symmetric scaling ratio", 300.0, symmetric_ratio},
      {11, "determinism", 600.0, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("%s criterion %d (%s): %s [%.1f s of %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
