#include "hebbdim/stats.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "hebbdim/error.hpp"

namespace hebbdim {

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.size() < 2) {
    throw InvalidArgument("summarize: need at least two samples");
  }
  const double n = static_cast<double>(xs.size());

  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double c = x - mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  // Influence functions of the moment-based estimators; their sample
  // standard deviations give the delta-method standard errors.
  double v_m2 = 0.0, v_k3 = 0.0, v_k4 = 0.0, v_skew = 0.0, v_kurt = 0.0;
  const double m2_15 = std::pow(m2, 1.5);
  const double m2_25 = std::pow(m2, 2.5);
  for (double x : xs) {
    const double c = x - mean;
    const double c2 = c * c;
    const double d2 = c2 - m2;
    const double d3 = c2 * c - m3 - 3.0 * m2 * c;
    const double d4_raw = c2 * c2 - m4 - 4.0 * m3 * c;
    const double k4 = d4_raw - 6.0 * m2 * d2;
    const double skew = d3 / m2_15 - 1.5 * m3 / m2_25 * d2;
    const double kurt = d4_raw / (m2 * m2) - 2.0 * m4 / (m2 * m2 * m2) * d2;
    v_m2 += d2 * d2;
    v_k3 += d3 * d3;
    v_k4 += k4 * k4;
    v_skew += skew * skew;
    v_kurt += kurt * kurt;
  }

  s.mean = mean;
  s.variance = m2 * n / (n - 1.0);
  s.sd = std::sqrt(s.variance);
  s.se_mean = s.sd / std::sqrt(n);
  s.se_variance = std::sqrt(v_m2 / n) / std::sqrt(n);
  s.kappa3 = m3;
  s.se_kappa3 = std::sqrt(v_k3 / n) / std::sqrt(n);
  s.kappa4 = m4 - 3.0 * m2 * m2;
  s.se_kappa4 = std::sqrt(v_k4 / n) / std::sqrt(n);
  s.skewness = m3 / m2_15;
  s.se_skewness = std::sqrt(v_skew / n) / std::sqrt(n);
  s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  s.se_excess_kurtosis = std::sqrt(v_kurt / n) / std::sqrt(n);
  return s;
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw InvalidArgument("fit_line: need matching inputs with >= 2 points");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) {
    throw InvalidArgument("fit_line: abscissae are all equal");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::array<double, 5> positive_part_moments(double mean, double sd) {
  std::array<double, 5> out{};
  if (sd <= 0.0) {
    if (mean > 0.0) {
      double p = 1.0;
      for (double& o : out) {
        o = p;
        p *= mean;
      }
    }
    return out;
  }
  // Truncated standard-normal moments M_j = int_c^inf z^j phi(z) dz.
  const double c = -mean / sd;
  const double phi = normal_pdf(c);
  std::array<double, 5> m{};
  m[0] = normal_cdf(-c);
  m[1] = phi;
  double c_pow = c;  // c^(j-1)
  for (int j = 2; j <= 4; ++j) {
    m[j] = c_pow * phi + (j - 1) * m[j - 2];
    c_pow *= c;
  }
  static constexpr int binom[5][5] = {
      {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
  std::array<double, 5> mean_pow{1.0, mean, mean * mean, 0.0, 0.0};
  mean_pow[3] = mean_pow[2] * mean;
  mean_pow[4] = mean_pow[2] * mean_pow[2];
  const double sd2 = sd * sd;
  const std::array<double, 5> sd_m{m[0], sd * m[1], sd2 * m[2], sd2 * sd * m[3],
                                   sd2 * sd2 * m[4]};
  for (int k = 0; k <= 4; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += binom[k][j] * mean_pow[k - j] * sd_m[j];
    out[k] = acc;
  }
  return out;
}

void ControlVariateMean::add(double y, double l) {
  std::array<double, 4> c;
  double p = 1.0;
  for (int k = 0; k < 4; ++k) {
    p *= l;
    c[k] = p - moments_[k];
  }
  ++count_;
  sum_y_ += y;
  sum_yy_ += y * y;
  for (int a = 0; a < 4; ++a) {
    sum_c_[a] += c[a];
    sum_cy_[a] += c[a] * y;
    for (int b = a; b < 4; ++b) sum_cc_[a][b] += c[a] * c[b];
  }
  solved_ = false;
}

void ControlVariateMean::solve() const {
  if (solved_) return;
  const double n = static_cast<double>(count_);
  if (count_ < 8) {
    mean_ = plain_mean();
    se_ = plain_se();
    solved_ = true;
    return;
  }
  const double ybar = sum_y_ / n;
  Eigen::Matrix4d cov;
  Eigen::Vector4d cov_cy;
  Eigen::Vector4d cbar;
  for (int a = 0; a < 4; ++a) cbar[a] = sum_c_[a] / n;
  for (int a = 0; a < 4; ++a) {
    cov_cy[a] = sum_cy_[a] / n - cbar[a] * ybar;
    for (int b = a; b < 4; ++b) {
      cov(a, b) = sum_cc_[a][b] / n - cbar[a] * cbar[b];
      cov(b, a) = cov(a, b);
    }
  }
  const Eigen::Vector4d beta = cov.ldlt().solve(cov_cy);
  const double var_y = sum_yy_ / n - ybar * ybar;
  const double var_res = std::max(0.0, var_y - beta.dot(cov_cy));
  mean_ = ybar - beta.dot(cbar);
  se_ = std::sqrt(var_res / (n - 5.0));
  solved_ = true;
}

double ControlVariateMean::mean() const {
  solve();
  return mean_;
}

double ControlVariateMean::se() const {
  solve();
  return se_;
}

double ControlVariateMean::plain_mean() const {
  return count_ > 0 ? sum_y_ / static_cast<double>(count_) : 0.0;
}

double ControlVariateMean::plain_se() const {
  if (count_ < 2) return 0.0;
  const double n = static_cast<double>(count_);
  const double m = sum_y_ / n;
  const double var = std::max(0.0, (sum_yy_ / n - m * m) * n / (n - 1.0));
  return std::sqrt(var / n);
}

}  // namespace hebbdim
