#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "hebbdim/reduced.hpp"
#include "hebbdim/rng.hpp"
#include "hebbdim/sources.hpp"

namespace hebbdim {

using BigCount = boost::multiprecision::cpp_int;

/// Critical points of <F(w . x)> on the sphere for K = N cardinal
/// features with a symmetric latent distribution.
struct CriticalCensus {
  int n = 0;
  BigCount minima;
  BigCount maxima;
  BigCount saddles;

  BigCount total() const { return minima + maxima + saddles; }
};

/// 2n minima, 2^n maxima, 3^n - 2^n - 2n - 1 saddles. For n = 1 the two
/// points +-1 are both minima.
CriticalCensus census(int n);

/// Points are labelled on the loss -<F>, so hidden features are minima and
/// the all-equal-magnitude corners are maxima.
enum class PointKind { Minimum, Maximum, Saddle, Indeterminate };

std::string to_string(PointKind kind);

/// Counts of negative, zero and positive tangent curvatures.
struct CurvatureSignature {
  int negative = 0;
  int zero = 0;
  int positive = 0;

  friend bool operator==(const CurvatureSignature&, const CurvatureSignature&) = default;
};

struct CriticalPoint {
  Eigen::VectorXd direction;
  PointKind kind = PointKind::Indeterminate;
  CurvatureSignature signature;
  Eigen::VectorXd curvatures;     // loss curvatures, ascending
  Eigen::VectorXd curvature_se;
};

inline constexpr int kMaxEnumerationDim = 12;

/// Every s / sqrt(|s|_0) for s in {-1, 0, 1}^n \ {0}, with its structural
/// label and signature.
std::vector<CriticalPoint> enumerate_critical_points(int n);

struct ObjectiveEstimate {
  double value = 0.0;
  double value_se = 0.0;
  Eigen::VectorXd gradient;     // tangent-projected gradient of <F>
  Eigen::VectorXd gradient_se;  // per component
  double gradient_norm = 0.0;
  /// sqrt(sum gradient_se^2): the norm expected from noise alone.
  double gradient_norm_se = 0.0;
};

/// Monte-Carlo <F(w . x)> and its tangent gradient <x f(w . x)> projected
/// onto the tangent space at w, evaluated on a fixed batch of inputs.
ObjectiveEstimate objective_and_gradient(const RowMatrix& inputs, const Eigen::VectorXd& w,
                                         double threshold = kDefaultThreshold);

ObjectiveEstimate objective_and_gradient(const SourceSpec& spec, const Eigen::VectorXd& w,
                                         std::int64_t n_samples, Rng& rng,
                                         double threshold = kDefaultThreshold);

/// Per-sample objective values F(w . x) on a batch.
Eigen::VectorXd objective_samples(const RowMatrix& inputs, const Eigen::VectorXd& w,
                                  double threshold = kDefaultThreshold);

/// (w + v) / |w + v|.
Eigen::VectorXd retract(const Eigen::VectorXd& w, const Eigen::VectorXd& v);

/// Orthonormal basis of the tangent space at unit w, as columns.
Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& w);

inline constexpr double kDefaultCurvatureStep = 1e-2;
inline constexpr std::int64_t kDefaultClassifySamples = 1'000'000;

/// Finite-difference tangent Hessian of the loss on common random numbers,
/// eigendecomposed; eigenvalues within 3 standard errors of zero make the
/// point Indeterminate.
CriticalPoint classify_point(const SourceSpec& spec, const Eigen::VectorXd& w,
                             std::int64_t n_samples, double step, Rng& rng,
                             double threshold = kDefaultThreshold);

struct FieldCell {
  double theta = 0.0;
  double phi = 0.0;
  double grad_magnitude = 0.0;
};

Eigen::Vector3d sphere_point(double theta, double phi);

/// Tangent-gradient magnitude on a theta x phi grid over the unit sphere
/// (N = 3 only). `resolution` theta rows including both poles, with
/// 2 (resolution - 1) phi columns at the same angular spacing; each pole
/// appears once, at phi = 0.
std::vector<FieldCell> sphere_gradient_field(const SourceSpec& spec, int resolution,
                                             std::int64_t n_samples, Rng& rng,
                                             double threshold = kDefaultThreshold);

}  // namespace hebbdim
