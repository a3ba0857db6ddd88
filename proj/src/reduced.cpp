#include "hebbdim/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hebbdim/error.hpp"
#include "hebbdim/stats.hpp"

namespace hebbdim {

namespace {

void check_overlap(double d, const char* where) {
  if (!(d >= 0.0 && d <= 1.0)) {
    throw InvalidArgument(std::string(where) + ": overlap must lie in [0, 1]");
  }
}

void check_interior(double d, const char* where) {
  if (!(d > 0.0 && d <= kMaxReducedOverlap)) {
    throw InvalidArgument(std::string(where) + ": overlap must lie in (0, 1 - 1e-6]");
  }
}

struct Bracket {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double t = 0.0;  // position in log d between grid[lo] and grid[hi]
};

Bracket bracket(const std::vector<double>& grid, double d) {
  if (d <= grid.front()) return {0, 0, 0.0};
  if (d >= grid.back()) return {grid.size() - 1, grid.size() - 1, 0.0};
  const auto it = std::upper_bound(grid.begin(), grid.end(), d);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  const double t = std::log(d / grid[lo]) / std::log(grid[hi] / grid[lo]);
  return {lo, hi, t};
}

double interpolate(const std::vector<double>& grid, const std::vector<double>& ys, double d) {
  if (grid.empty()) throw InvalidArgument("gradient stats are empty");
  const Bracket b = bracket(grid, d);
  if (b.lo == b.hi) return ys[b.lo];
  const double a = ys[b.lo];
  const double c = ys[b.hi];
  if (a > 0.0 && c > 0.0) return a * std::pow(c / a, b.t);
  return a + b.t * (c - a);
}

}  // namespace

std::vector<double> sample_u(double d, const DistributionKind& kind, std::int64_t n_samples,
                             Rng& rng) {
  check_overlap(d, "sample_u");
  if (n_samples < 1) throw InvalidArgument("sample_u: n_samples must be >= 1");
  const double s = std::sqrt(std::max(0.0, 1.0 - d * d));
  std::vector<double> u(static_cast<std::size_t>(n_samples));
  for (auto& x : u) {
    const double l = kind.draw(rng);
    x = d * l + s * rng.normal();
  }
  return u;
}

double reduced_gradient(double d, double l, double g, double threshold) {
  const double s = std::sqrt(1.0 - d * d);
  const double u = d * l + s * g;
  const double f = rectifier(u, threshold);
  return f == 0.0 ? 0.0 : f * (l - d * g / s);
}

double reduced_gradient_sample(double d, const DistributionKind& kind, double threshold,
                               Rng& rng) {
  check_interior(d, "reduced_gradient_sample");
  const double l = kind.draw(rng);
  const double g = rng.normal();
  return reduced_gradient(d, l, g, threshold);
}

ConditionalMoments conditional_moments(double d, double l, double threshold) {
  // u = y + theta with y ~ N(d l - theta, 1 - d^2) given l, and
  // dF/dd = f(u) (l - d u) / (1 - d^2).
  const double s2 = 1.0 - d * d;
  const auto j = positive_part_moments(d * l - threshold, std::sqrt(s2));
  const double th = threshold;
  const double ef = j[1];
  const double euf = j[2] + th * j[1];
  const double ef2 = j[2];
  const double ef2u = j[3] + th * j[2];
  const double ef2u2 = j[4] + 2.0 * th * j[3] + th * th * j[2];

  ConditionalMoments m;
  m.gradient = (l * ef - d * euf) / s2;
  m.gradient_sq = (l * l * ef2 - 2.0 * d * l * ef2u + d * d * ef2u2) / (s2 * s2);
  m.objective = 0.5 * ef2;
  return m;
}

double gaussian_objective(double threshold) {
  return 0.5 * positive_part_moments(-threshold, 1.0)[2];
}

double GradientStats::mu_at(double d) const { return interpolate(grid, mu, d); }
double GradientStats::sigma_at(double d) const { return interpolate(grid, sigma, d); }
double GradientStats::mu_se_at(double d) const { return interpolate(grid, mu_se, d); }

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) {
    throw InvalidArgument("log_grid: need 0 < lo < hi and count >= 2");
  }
  std::vector<double> g(count);
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) g[i] = lo * std::exp(step * i);
  g.back() = hi;
  return g;
}

std::vector<double> default_grid() { return log_grid(0.01, 0.9, 40); }

GradientStats gradient_stats(const DistributionKind& kind, double threshold,
                             std::span<const double> grid, std::int64_t n_samples, Rng& rng) {
  if (grid.empty()) throw InvalidArgument("gradient_stats: empty grid");
  if (n_samples < 16) throw InvalidArgument("gradient_stats: n_samples must be >= 16");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check_interior(grid[i], "gradient_stats");
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw InvalidArgument("gradient_stats: grid must be strictly increasing");
    }
  }

  GradientStats st;
  st.kind = kind;
  st.threshold = threshold;
  st.grid.assign(grid.begin(), grid.end());
  const auto moments = kind.raw_moments();
  for (double d : grid) {
    ControlVariateMean cv(moments);
    double raw_sum = 0.0, raw_sq = 0.0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
      const double l = kind.draw(rng);
      const double g = rng.normal();
      const double raw = reduced_gradient(d, l, g, threshold);
      raw_sum += raw;
      raw_sq += raw * raw;
      cv.add(conditional_moments(d, l, threshold).gradient, l);
    }
    const double n = static_cast<double>(n_samples);
    const double raw_mean = raw_sum / n;
    const double raw_var = std::max(0.0, (raw_sq / n - raw_mean * raw_mean) * n / (n - 1.0));
    const double mu = cv.mean();
    const double sigma = std::sqrt(raw_var);
    st.mu.push_back(mu);
    st.mu_se.push_back(cv.se());
    st.sigma.push_back(sigma);
    st.snr.push_back(sigma > 0.0 ? mu * mu / (sigma * sigma) : 0.0);
    st.n_samples.push_back(n_samples);
  }
  return st;
}

ObjectiveProfile objective_gain(const DistributionKind& kind, double threshold,
                                std::span<const double> grid, std::int64_t n_samples, Rng& rng) {
  if (n_samples < 16) throw InvalidArgument("objective_gain: n_samples must be >= 16");
  ObjectiveProfile out;
  const double base = gaussian_objective(threshold);
  const auto moments = kind.raw_moments();
  for (double d : grid) {
    check_interior(d, "objective_gain");
    ControlVariateMean cv(moments);
    for (std::int64_t i = 0; i < n_samples; ++i) {
      const double l = kind.draw(rng);
      cv.add(conditional_moments(d, l, threshold).objective, l);
    }
    out.grid.push_back(d);
    out.gain.push_back(cv.mean() - base);
    out.gain_se.push_back(cv.se());
  }
  return out;
}

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys,
                          std::pair<double, double> range) {
  if (xs.size() != ys.size()) throw InvalidArgument("fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] >= range.first && xs[i] <= range.second && xs[i] > 0.0 && ys[i] > 0.0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  if (lx.size() < 2) throw InsufficientSignal("fit_power_law: fewer than 2 positive points");
  const LineFit line = fit_line(lx, ly);
  return {line.slope, line.intercept, line.r_squared, range, static_cast<int>(lx.size())};
}

PowerLawFit fit_power_law(const GradientStats& stats, std::pair<double, double> range) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < stats.grid.size(); ++i) {
    const double d = stats.grid[i];
    if (d < range.first || d > range.second) continue;
    if (stats.mu[i] > 3.0 * stats.mu_se[i]) {
      xs.push_back(d);
      ys.push_back(stats.mu[i]);
    }
  }
  if (xs.size() < 4) {
    throw InsufficientSignal("fit_power_law: fewer than 4 significant grid points in range");
  }
  return fit_power_law(xs, ys, range);
}

double optimal_eta(double mu, double sigma2, int n, double d) {
  if (n < 1 || !(sigma2 > 0.0) || !(d > 0.0)) {
    throw InvalidArgument("optimal_eta: need n >= 1, sigma^2 > 0, d > 0");
  }
  return mu / (n * sigma2 * d);
}

double optimal_drift(double mu, double sigma2, int n, double d) {
  return mu * mu / (2.0 * n * sigma2 * d);
}

double predict_learning_time(const GradientStats& stats, int n, double d0, double d_target) {
  if (n < 1) throw InvalidArgument("predict_learning_time: n must be >= 1");
  if (stats.grid.empty()) throw InvalidArgument("predict_learning_time: empty stats");
  if (d0 == d_target) return 0.0;
  if (!(d0 < d_target)) throw InvalidArgument("predict_learning_time: need d0 < d_target");
  const double lo = stats.grid.front();
  const double hi = stats.grid.back();
  if (d0 < lo * (1.0 - 1e-12) || d_target > hi * (1.0 + 1e-12)) {
    throw InvalidArgument("predict_learning_time: [d0, d_target] must lie inside the stats grid");
  }

  std::vector<double> nodes{d0};
  for (std::size_t i = 0; i < stats.grid.size(); ++i) {
    const double d = stats.grid[i];
    // Grid points bracketing the range count too: they carry the interpolant.
    const bool touches = (d > d0 && d < d_target) ||
                         (i + 1 < stats.grid.size() && d <= d0 && stats.grid[i + 1] > d0) ||
                         (i > 0 && d >= d_target && stats.grid[i - 1] < d_target);
    if (touches && !(stats.mu[i] > 3.0 * stats.mu_se[i])) {
      throw InsufficientSignal("predict_learning_time: gradient statistically zero at d = " +
                               std::to_string(d));
    }
    if (d > d0 && d < d_target) nodes.push_back(d);
  }
  nodes.push_back(d_target);

  constexpr int kSub = 16;
  auto integrand = [&](double d) {
    const double mu = stats.mu_at(d);
    const double sigma = stats.sigma_at(d);
    return 2.0 * n * d * sigma * sigma / (mu * mu);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = std::log(nodes[i]);
    const double b = std::log(nodes[i + 1]);
    const double h = (b - a) / kSub;
    double prev = integrand(nodes[i]) * nodes[i];
    for (int j = 1; j <= kSub; ++j) {
      const double d = std::exp(a + h * j);
      const double cur = integrand(d) * d;
      total += 0.5 * h * (prev + cur);
      prev = cur;
    }
  }
  return total;
}

Trajectory reduced_run(const DistributionKind& kind, double threshold, int n, double d0,
                       double d_target, const GradientStats& stats, Rng& rng,
                       const ReducedRunOptions& options) {
  if (!(d0 > 0.0 && d0 <= d_target && d_target < 1.0)) {
    throw InvalidArgument("reduced_run: need 0 < d0 <= d_target < 1");
  }
  if (options.record_every < 1 || options.max_steps < 0) {
    throw InvalidArgument("reduced_run: invalid options");
  }
  Trajectory tr;
  tr.n = n;
  tr.k = 1;
  tr.target = d_target;
  tr.best_feature = 0;
  tr.best_sign = 1;

  double d = d0;
  auto eta_at = [&](double x) {
    const double sig = stats.sigma_at(x);
    const double ref = std::clamp(x, stats.grid.front(), stats.grid.back());
    const double eta = optimal_eta(stats.mu_at(x), sig * sig, n, ref);
    return std::clamp(eta, options.eta_min, options.eta_max);
  };

  tr.samples.push_back({0, d, eta_at(d)});
  if (d >= d_target) {
    tr.crossing = 0;
    tr.converged = true;
    return tr;
  }

  std::int64_t step = 0;
  while (step < options.max_steps) {
    const double eta = eta_at(d);
    double delta;
    if (options.noise) {
      const double s = reduced_gradient(std::min(d, kMaxReducedOverlap), kind.draw(rng),
                                        rng.normal(), threshold);
      delta = eta * s - 0.5 * eta * eta * n * s * s * d;
    } else {
      const double sig = stats.sigma_at(d);
      delta = eta * stats.mu_at(d) - 0.5 * eta * eta * n * sig * sig * d;
    }
    d = std::min(std::abs(d + delta), kMaxReducedOverlap);
    d = std::max(d, 1e-12);
    ++step;
    const bool crossed = d >= d_target;
    if (crossed || step % options.record_every == 0) tr.samples.push_back({step, d, eta});
    if (crossed) {
      tr.crossing = step;
      tr.converged = true;
      break;
    }
  }
  tr.steps = step;
  return tr;
}

DriftComparison one_step_drift(const DistributionKind& kind, double threshold, int n, double d,
                               std::span<const double> etas, int reference,
                               std::int64_t n_samples, Rng& rng) {
  check_interior(d, "one_step_drift");
  if (etas.empty() || reference < 0 || reference >= static_cast<int>(etas.size())) {
    throw InvalidArgument("one_step_drift: invalid eta list or reference index");
  }
  const auto moments = kind.raw_moments();
  std::vector<ControlVariateMean> level(etas.size(), ControlVariateMean(moments));
  std::vector<ControlVariateMean> diff(etas.size(), ControlVariateMean(moments));
  std::vector<double> y(etas.size());
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const double l = kind.draw(rng);
    const auto m = conditional_moments(d, l, threshold);
    for (std::size_t e = 0; e < etas.size(); ++e) {
      const double eta = etas[e];
      y[e] = eta * m.gradient - 0.5 * eta * eta * n * d * m.gradient_sq;
    }
    for (std::size_t e = 0; e < etas.size(); ++e) {
      level[e].add(y[e], l);
      diff[e].add(y[e] - y[reference], l);
    }
  }
  DriftComparison out;
  out.etas.assign(etas.begin(), etas.end());
  out.reference = reference;
  for (std::size_t e = 0; e < etas.size(); ++e) {
    out.mean.push_back(level[e].mean());
    out.se.push_back(level[e].se());
    out.diff_vs_reference.push_back(diff[e].mean());
    out.diff_se.push_back(diff[e].se());
  }
  return out;
}

}  // namespace hebbdim
