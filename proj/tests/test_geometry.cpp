#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hebbdim/error.hpp"
#include "hebbdim/geometry.hpp"
#include "oracles.hpp"

using namespace hebbdim;

TEST(RandomUnitVector, NormAndDegenerateDimension) {
  Rng rng(1);
  for (int n : {1, 2, 7, 300}) {
    for (int t = 0; t < 50; ++t) EXPECT_NEAR(random_unit_vector(n, rng).norm(), 1.0, 1e-12);
  }
  int plus = 0;
  for (int t = 0; t < 2000; ++t) {
    const double v = random_unit_vector(1, rng)[0];
    ASSERT_EQ(std::abs(v), 1.0);
    plus += v > 0;
  }
  EXPECT_NEAR(plus, 1000, 3.0 * std::sqrt(500.0));
  EXPECT_THROW(random_unit_vector(0, rng), InvalidArgument);
}

TEST(RandomUnitVector, ComponentSpreadInHighDimension) {
  Rng rng(2);
  std::vector<double> first(100000);
  for (auto& v : first) v = random_unit_vector(1000, rng)[0];
  const auto m = oracle::sample_moments(first);
  const double sd = std::sqrt(m.variance);
  // se of a sample sd is about sd / sqrt(2 n)
  EXPECT_NEAR(sd, 1.0 / std::sqrt(1000.0), 3.0 * sd / std::sqrt(2.0 * first.size()));
}

TEST(RandomUnitVector, ThreeDimensionalMarginalIsUniform) {
  Rng rng(3);
  std::vector<double> a(100000);
  for (auto& v : a) v = std::abs(random_unit_vector(3, rng)[0]);
  EXPECT_NEAR(oracle::mean_of(a), 0.5, 3.0 * oracle::se_of(a));
}

TEST(PredictedMaxOverlap, FormulaAndMonotonicity) {
  EXPECT_NEAR(predicted_max_overlap(1000, 10), std::sqrt(2.0 * std::log(10.0) / 1000.0), 1e-15);
  EXPECT_NEAR(predicted_max_overlap(1000, 10), 0.0679, 1e-4);
  EXPECT_EQ(predicted_max_overlap(2, 1000), 1.0);
  for (int n = 10; n < 10000; n *= 3) {
    EXPECT_GT(predicted_max_overlap(n, 50), predicted_max_overlap(3 * n, 50));
  }
  for (int k = 2; k < 10000; k *= 3) {
    EXPECT_LT(predicted_max_overlap(5000, k), predicted_max_overlap(5000, 3 * k));
  }
  EXPECT_THROW(predicted_max_overlap(0, 3), InvalidArgument);
}

TEST(PredictedMaxOverlap, SingleFeatureMatchesMonteCarlo) {
  Rng rng(4);
  for (int n : {3, 20, 200}) {
    std::vector<double> xs(200000);
    for (auto& v : xs) v = std::abs(random_unit_vector(n, rng)[0]);
    EXPECT_NEAR(predicted_max_overlap(n, 1), oracle::mean_of(xs), 3.0 * oracle::se_of(xs)) << n;
  }
  EXPECT_NEAR(mean_single_overlap(3), 0.5, 1e-14);
}

TEST(CornerOverlap, Values) {
  EXPECT_NEAR(corner_overlap(3), 0.5773502691896258, 1e-15);
  EXPECT_NEAR(std::acos(corner_overlap(3)) * 180.0 / std::numbers::pi, 54.7356, 1e-4);
  EXPECT_EQ(corner_overlap(1), 1.0);
  EXPECT_NEAR(corner_overlap(100), 0.1, 1e-15);
  EXPECT_NEAR(corner_overlap(4), 0.5, 1e-15);
}

// E max(|x|, |y|, |z|) over the unit sphere by 2-D quadrature in spherical
// coordinates; one octant suffices by symmetry.
double sphere_mean_max_coordinate() {
  const double half_pi = std::numbers::pi / 2.0;
  const double total = oracle::simpson(
      [&](double theta) {
        return std::sin(theta) * oracle::simpson(
                                     [&](double phi) {
                                       const double x = std::sin(theta) * std::cos(phi);
                                       const double y = std::sin(theta) * std::sin(phi);
                                       return std::max({x, y, std::cos(theta)});
                                     },
                                     0.0, half_pi, 2000);
      },
      0.0, half_pi, 2000);
  return total / half_pi;
}

TEST(MeasuredMaxOverlap, ThreeDimensions) {
  Rng rng(5);
  const OverlapStats st = measured_max_overlap(3, 3, 100000, rng);
  EXPECT_EQ(st.trials, 100000);
  const double ref = sphere_mean_max_coordinate();
  EXPECT_NEAR(ref, 0.8312, 2e-4);
  EXPECT_NEAR(st.mean, ref, 3.0 * st.se());
}

TEST(MeasuredMaxOverlap, NearPredictionAtModerateK) {
  Rng rng(6);
  const OverlapStats st = measured_max_overlap(1000, 10, 20000, rng);
  EXPECT_NEAR(st.mean / predicted_max_overlap(1000, 10), 1.0, 0.2);
}

TEST(MeasuredMaxOverlap, BoundedInUnitInterval) {
  Rng rng(7);
  for (auto [n, k] : std::vector<std::pair<int, int>>{{1, 1}, {2, 5}, {4, 4}, {30, 3}, {5, 40}}) {
    for (int t = 0; t < 500; ++t) {
      const double d = sample_max_overlap(n, k, rng).max_overlap;
      ASSERT_GE(d, 0.0);
      ASSERT_LE(d, 1.0);
      // With K = N cardinal references the corner is the farthest point.
      if (k == n) ASSERT_GE(d, corner_overlap(n) - 1e-12);
    }
  }
}

// The fast sampler and the explicit construction (draw w, dot it with the
// reference vectors) describe the same distribution.
TEST(MeasuredMaxOverlap, FastSamplerMatchesExplicitConstruction) {
  Rng rng(8);
  for (auto [n, k] : std::vector<std::pair<int, int>>{{20, 5}, {12, 12}, {10, 30}}) {
    Eigen::MatrixXd refs;
    if (k <= n) {
      refs = Eigen::MatrixXd::Identity(n, k);
    } else {
      refs.resize(n, k);
      for (int i = 0; i < k; ++i) refs.col(i) = random_unit_vector(n, rng);
    }
    const int trials = 40000;
    const OverlapStats fast = measured_max_overlap(n, k, trials, rng);
    const OverlapStats slow = measured_max_overlap(refs, trials, rng);
    const double se = std::hypot(fast.se(), slow.se());
    if (k <= n) {
      EXPECT_NEAR(fast.mean, slow.mean, 3.0 * se) << n << "," << k;
      EXPECT_NEAR(fast.std, slow.std, 0.05 * slow.std) << n << "," << k;
    } else {
      // One fixed reference draw versus fresh references per trial agree
      // on average up to the spread across reference sets.
      EXPECT_NEAR(fast.mean, slow.mean, 0.03 * slow.mean) << n << "," << k;
    }
  }
}

TEST(MeasuredMaxOverlap, RotationalSymmetry) {
  Rng rng(9);
  const int n = 16, k = 6, trials = 40000;
  const OverlapStats cardinal = measured_max_overlap(Eigen::MatrixXd::Identity(n, k), trials, rng);
  const Eigen::MatrixXd rotated_refs = random_orthonormal_set(n, k, rng);
  EXPECT_LT((rotated_refs.transpose() * rotated_refs - Eigen::MatrixXd::Identity(k, k)).norm(), 1e-12);
  const OverlapStats rotated = measured_max_overlap(rotated_refs, trials, rng);
  EXPECT_NEAR(cardinal.mean, rotated.mean, 3.0 * std::hypot(cardinal.se(), rotated.se()));
}

TEST(MeasuredMaxOverlap, ExtremeValueConsistency) {
  Rng rng(10);
  for (int k : {1000, 4000}) {
    const int n = 20000;
    const OverlapStats st = measured_max_overlap(n, k, 2000, rng);
    const double ratio = st.mean / predicted_max_overlap(n, k);
    EXPECT_GE(ratio, 0.8) << k;
    EXPECT_LE(ratio, 1.2) << k;
  }
}

TEST(MaxAbsOverlap, PicksLargestMagnitude) {
  Eigen::MatrixXd refs = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd w(3);
  w << 0.3, -0.9, 0.316227766016838;
  int idx = -1;
  EXPECT_NEAR(max_abs_overlap(w, refs, &idx), 0.9, 1e-15);
  EXPECT_EQ(idx, 1);
}
