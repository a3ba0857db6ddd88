#include "hebbdim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hebbdim/error.hpp"

namespace hebbdim {

Eigen::VectorXd random_unit_vector(int n, Rng& rng) {
  if (n < 1) throw InvalidArgument("random_unit_vector: n must be >= 1");
  Eigen::VectorXd w(n);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < n; ++i) w[i] = rng.normal();
    norm2 = w.squaredNorm();
  } while (norm2 == 0.0);
  w /= std::sqrt(norm2);
  return w;
}

double mean_single_overlap(int n) {
  if (n < 1) throw InvalidArgument("mean_single_overlap: n must be >= 1");
  if (n == 1) return 1.0;
  return std::exp(std::lgamma(0.5 * n) - std::lgamma(0.5 * (n + 1))) /
         std::sqrt(std::numbers::pi);
}

double predicted_max_overlap(int n, int k) {
  if (n < 1 || k < 1) throw InvalidArgument("predicted_max_overlap: n, k must be >= 1");
  if (k == 1) return mean_single_overlap(n);
  const double d = std::sqrt(2.0 * std::log(static_cast<double>(k)) / n);
  return std::clamp(d, 0.0, 1.0);
}

double corner_overlap(int n) {
  if (n < 1) throw InvalidArgument("corner_overlap: n must be >= 1");
  return 1.0 / std::sqrt(static_cast<double>(n));
}

double OverlapStats::se() const {
  return trials > 0 ? std / std::sqrt(static_cast<double>(trials)) : 0.0;
}

double max_abs_overlap(const Eigen::VectorXd& w, const Eigen::MatrixXd& features,
                       int* best_index) {
  const Eigen::VectorXd dots = features.transpose() * w;
  Eigen::Index idx = 0;
  const double best = dots.cwiseAbs().maxCoeff(&idx);
  if (best_index) *best_index = static_cast<int>(idx);
  return std::min(best, 1.0);
}

OverlapSample sample_max_overlap(int n, int k, Rng& rng) {
  if (n < 1 || k < 1) throw InvalidArgument("sample_max_overlap: n, k must be >= 1");
  OverlapSample s{n, k, 0.0};
  if (k <= n) {
    thread_local std::vector<double> z;
    z.resize(k);
    double norm2 = 0.0;
    double best = 0.0;
    for (int i = 0; i < k; ++i) {
      z[i] = rng.normal();
      norm2 += z[i] * z[i];
      best = std::max(best, std::abs(z[i]));
    }
    if (k < n) norm2 += rng.chi_square(n - k);
    s.max_overlap = norm2 > 0.0 ? std::min(1.0, best / std::sqrt(norm2)) : 1.0;
    return s;
  }
  double best = 0.0;
  for (int i = 0; i < k; ++i) {
    const double z = rng.normal();
    const double rest = n > 1 ? rng.chi_square(n - 1) : 0.0;
    const double norm2 = z * z + rest;
    const double d = norm2 > 0.0 ? std::abs(z) / std::sqrt(norm2) : 1.0;
    best = std::max(best, d);
  }
  s.max_overlap = std::min(best, 1.0);
  return s;
}

namespace {

OverlapStats finish(int n, int k, const std::vector<double>& xs) {
  OverlapStats st{n, k, static_cast<int>(xs.size()), 0.0, 0.0};
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.std = std::sqrt(ss / (xs.size() - 1));
  }
  return st;
}

}  // namespace

OverlapStats measured_max_overlap(int n, int k, int trials, Rng& rng) {
  if (trials < 1) throw InvalidArgument("measured_max_overlap: trials must be >= 1");
  std::vector<double> xs(trials);
  for (int t = 0; t < trials; ++t) xs[t] = sample_max_overlap(n, k, rng).max_overlap;
  return finish(n, k, xs);
}

OverlapStats measured_max_overlap(const Eigen::MatrixXd& references, int trials, Rng& rng) {
  if (trials < 1) throw InvalidArgument("measured_max_overlap: trials must be >= 1");
  const int n = static_cast<int>(references.rows());
  std::vector<double> xs(trials);
  for (int t = 0; t < trials; ++t) {
    xs[t] = max_abs_overlap(random_unit_vector(n, rng), references);
  }
  return finish(n, static_cast<int>(references.cols()), xs);
}

Eigen::MatrixXd random_orthonormal_set(int n, int k, Rng& rng) {
  if (k < 1 || k > n) throw InvalidArgument("random_orthonormal_set: need 1 <= k <= n");
  Eigen::MatrixXd g(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
}

}  // namespace hebbdim
