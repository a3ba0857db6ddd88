#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace hebbdim {

/// Sample summary with delta-method standard errors for the shape
/// statistics.
struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double sd = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
  double skewness = 0.0;
  double se_skewness = 0.0;
  double excess_kurtosis = 0.0;
  double se_excess_kurtosis = 0.0;
  double kappa3 = 0.0;  // third cumulant (central moment m3)
  double se_kappa3 = 0.0;
  double kappa4 = 0.0;  // fourth cumulant m4 - 3 m2^2
  double se_kappa4 = 0.0;
};

Summary summarize(std::span<const double> xs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

double normal_pdf(double x);
double normal_cdf(double x);

/// E[y^k 1{y > 0}] for y ~ Normal(mean, sd^2), k = 0..4.
std::array<double, 5> positive_part_moments(double mean, double sd);

/// Mean estimator with control variates c_k = l^k - E[l^k], k = 1..4,
/// whose expectations are known exactly. Accumulates one (y, l) pair
/// at a time; the regression coefficients are fitted in-sample.
class ControlVariateMean {
 public:
  explicit ControlVariateMean(const std::array<double, 4>& latent_moments)
      : moments_(latent_moments) {}

  void add(double y, double l);

  std::int64_t count() const { return count_; }
  double mean() const;
  double se() const;
  double plain_mean() const;
  double plain_se() const;

 private:
  void solve() const;

  std::array<double, 4> moments_;
  std::int64_t count_ = 0;
  double sum_y_ = 0.0;
  double sum_yy_ = 0.0;
  std::array<double, 4> sum_c_{};
  std::array<double, 4> sum_cy_{};
  std::array<std::array<double, 4>, 4> sum_cc_{};

  mutable bool solved_ = false;
  mutable double mean_ = 0.0;
  mutable double se_ = 0.0;
};

}  // namespace hebbdim
