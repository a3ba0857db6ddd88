#pragma once

#include <Eigen/Dense>

#include "hebbdim/rng.hpp"

namespace hebbdim {

/// Uniform direction on the unit sphere in R^n (normalized Gaussian vector).
Eigen::VectorXd random_unit_vector(int n, Rng& rng);

/// Extreme-value prediction sqrt(2 ln k / n) for the largest overlap
/// between a random direction and k features, clamped to [0, 1].
/// For k = 1 the exact mean |w_1| of a uniform unit vector is returned.
double predicted_max_overlap(int n, int k);

/// Exact E|w_1| for w uniform on the sphere in R^n.
double mean_single_overlap(int n);

/// Overlap between a maximum (all components +-1/sqrt(n)) and a cardinal minimum.
double corner_overlap(int n);

struct OverlapSample {
  int n_inputs = 0;
  int n_features = 0;
  double max_overlap = 0.0;
};

struct OverlapStats {
  int n_inputs = 0;
  int n_features = 0;
  int trials = 0;
  double mean = 0.0;
  double std = 0.0;
  double se() const;
};

/// Largest |w . f_i| over the columns of `features`, with its index.
double max_abs_overlap(const Eigen::VectorXd& w, const Eigen::MatrixXd& features,
                       int* best_index = nullptr);

/// One draw of the largest overlap between a random direction and k
/// reference features (the cardinal axes for k <= n, k random unit
/// vectors otherwise). Only the joint law of the k overlaps is sampled:
/// for k <= n these are z_i / |z| with |z|^2 = sum z_i^2 + chi2(n - k);
/// for k > n rotate the direction onto e_1, making each overlap an
/// independent z / sqrt(z^2 + chi2(n - 1)).
OverlapSample sample_max_overlap(int n, int k, Rng& rng);

OverlapStats measured_max_overlap(int n, int k, int trials, Rng& rng);

/// Brute-force counterpart: explicit random direction per trial against a
/// fixed reference set (columns of `references`).
OverlapStats measured_max_overlap(const Eigen::MatrixXd& references, int trials, Rng& rng);

/// Orthonormal set of k <= n random directions (columns), via QR.
Eigen::MatrixXd random_orthonormal_set(int n, int k, Rng& rng);

}  // namespace hebbdim
