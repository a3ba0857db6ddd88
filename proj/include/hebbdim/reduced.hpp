#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hebbdim/rng.hpp"
#include "hebbdim/sources.hpp"
#include "hebbdim/trajectory.hpp"

namespace hebbdim {

inline constexpr double kDefaultThreshold = 2.0;
inline constexpr double kMaxReducedOverlap = 1.0 - 1e-6;

/// Rectifier f(u) = (u - theta)_+ and its antiderivative F(u) = (u - theta)_+^2 / 2.
inline double rectifier(double u, double threshold) { return u > threshold ? u - threshold : 0.0; }
inline double rectifier_objective(double u, double threshold) {
  const double r = rectifier(u, threshold);
  return 0.5 * r * r;
}

/// Draws of u = d l + sqrt(1 - d^2) g.
std::vector<double> sample_u(double d, const DistributionKind& kind, std::int64_t n_samples,
                             Rng& rng);

/// Pathwise derivative of F(u) with respect to d, f(u) (l - d g / sqrt(1 - d^2)),
/// for a given latent draw l and Gaussian draw g.
double reduced_gradient(double d, double l, double g, double threshold);

/// One sample of the pathwise derivative.
double reduced_gradient_sample(double d, const DistributionKind& kind, double threshold,
                               Rng& rng);

/// Moments of the pathwise derivative conditional on the latent l,
/// with the Gaussian part integrated analytically.
struct ConditionalMoments {
  double gradient = 0.0;         // E[dF/dd | l]
  double gradient_sq = 0.0;      // E[(dF/dd)^2 | l]
  double objective = 0.0;        // E[F(u) | l]
};
ConditionalMoments conditional_moments(double d, double l, double threshold);

/// Expected objective of a standard-normal input, E[F(g)].
double gaussian_objective(double threshold);

/// Gradient statistics over a grid of overlaps.
struct GradientStats {
  DistributionKind kind;
  double threshold = kDefaultThreshold;
  std::vector<double> grid;
  std::vector<double> mu;
  std::vector<double> mu_se;
  std::vector<double> sigma;
  std::vector<double> snr;  // mu^2 / sigma^2
  std::vector<std::int64_t> n_samples;

  /// Power-law (log-log) interpolation inside the grid, clamped to the
  /// end points outside it. Falls back to linear where mu <= 0.
  double mu_at(double d) const;
  double sigma_at(double d) const;
  double mu_se_at(double d) const;
};

std::vector<double> log_grid(double lo, double hi, int count);
/// 40 log-spaced points on [0.01, 0.9].
std::vector<double> default_grid();

/// mu is the sample mean of dF/dd, evaluated by conditional Monte Carlo
/// over the latent draws with control variates l^k - E[l^k] (k = 1..4);
/// sigma is the standard deviation of the raw pathwise samples drawn
/// alongside.
GradientStats gradient_stats(const DistributionKind& kind, double threshold,
                             std::span<const double> grid, std::int64_t n_samples, Rng& rng);

/// <F(u(d))> - <F(u(0))> on a grid, same estimator as gradient_stats.
struct ObjectiveProfile {
  std::vector<double> grid;
  std::vector<double> gain;
  std::vector<double> gain_se;
};
ObjectiveProfile objective_gain(const DistributionKind& kind, double threshold,
                                std::span<const double> grid, std::int64_t n_samples, Rng& rng);

struct PowerLawFit {
  double exponent = 0.0;
  double log_intercept = 0.0;
  double r_squared = 0.0;
  std::pair<double, double> fit_range{0.0, 0.0};
  int points = 0;
};

/// Least squares on (ln x, ln y) for all points with x inside `range`.
PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys,
                          std::pair<double, double> range);

/// Fits ln mu against ln d for grid points inside `range` whose mu exceeds
/// 3 standard errors. Throws InsufficientSignal with fewer than 4 such points.
PowerLawFit fit_power_law(const GradientStats& stats, std::pair<double, double> range);

/// Learning rate maximizing <Delta d> = eta mu - eta^2 n sigma^2 d / 2.
double optimal_eta(double mu, double sigma2, int n, double d);

/// Expected progress per step at the optimal rate, mu^2 / (2 n sigma^2 d).
double optimal_drift(double mu, double sigma2, int n, double d);

/// Quadrature (trapezoid on log d) of 1 / optimal_drift over [d0, d_target].
double predict_learning_time(const GradientStats& stats, int n, double d0, double d_target);

struct ReducedRunOptions {
  bool noise = true;
  std::int64_t max_steps = 100'000'000;
  std::int64_t record_every = 100;
  double eta_min = 1e-9;
  double eta_max = 1.0;
};

/// Iterates d <- d + eta s - eta^2 n s^2 d / 2 with eta = eta*(d) from the
/// stats and s a fresh pathwise sample (or mu, with s^2 -> sigma^2, when
/// noise is off).
Trajectory reduced_run(const DistributionKind& kind, double threshold, int n, double d0,
                       double d_target, const GradientStats& stats, Rng& rng,
                       const ReducedRunOptions& options = {});

/// Expected one-step change of the overlap under the reduced recurrence,
/// for several learning rates on common random numbers.
struct DriftComparison {
  std::vector<double> etas;
  std::vector<double> mean;
  std::vector<double> se;
  /// mean[i] - mean[reference] and its standard error (paired).
  std::vector<double> diff_vs_reference;
  std::vector<double> diff_se;
  int reference = 0;
};
DriftComparison one_step_drift(const DistributionKind& kind, double threshold, int n, double d,
                               std::span<const double> etas, int reference,
                               std::int64_t n_samples, Rng& rng);

}  // namespace hebbdim
