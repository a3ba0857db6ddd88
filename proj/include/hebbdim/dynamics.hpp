#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>

#include "hebbdim/reduced.hpp"
#include "hebbdim/rng.hpp"
#include "hebbdim/sources.hpp"
#include "hebbdim/trajectory.hpp"

namespace hebbdim {

/// Ground-truth directions used for overlap bookkeeping. Cardinal sets
/// (identity whitener, K <= N) are stored implicitly.
class FeatureSet {
 public:
  FeatureSet() = default;
  explicit FeatureSet(const SourceSpec& spec);
  explicit FeatureSet(Eigen::MatrixXd columns);
  static FeatureSet cardinal(int n, int k);

  struct Overlap {
    double value = 0.0;  // max |w . f_i|
    int index = 0;
    int sign = 1;
  };
  Overlap overlap(const Eigen::VectorXd& w) const;

  int dims() const { return n_; }
  int size() const { return k_; }
  bool is_cardinal() const { return cardinal_; }
  Eigen::MatrixXd matrix() const;

 private:
  int n_ = 0;
  int k_ = 0;
  bool cardinal_ = true;
  Eigen::MatrixXd columns_;
};

struct WeightState {
  Eigen::VectorXd w;
  std::int64_t step = 0;
  double overlap = 0.0;
  int best_feature = 0;
  int best_sign = 1;
};

/// Learning-rate schedule following eta*(d) from precomputed gradient
/// statistics, clipped to [eta_min, eta_max].
struct AdaptiveEta {
  std::shared_ptr<const GradientStats> stats;
  double eta_min = 1e-9;
  double eta_max = 1.0;
};

struct LearnConfig {
  std::variant<double, AdaptiveEta> eta = 0.005;
  double threshold = kDefaultThreshold;
  std::int64_t max_steps = 10'000'000;
  std::int64_t record_every = 100;
  double target_overlap = 0.7;
  /// After reaching the target keep running for overshoot * crossing steps.
  double overshoot = 0.0;

  bool adaptive() const { return std::holds_alternative<AdaptiveEta>(eta); }
  void validate() const;
};

/// Default fixed rate for pilot runs, 0.005 * 10 / n.
double default_fixed_eta(int n);

/// eta*(d) = mu(d) / (n sigma^2(d) d) at the state's overlap, clipped.
/// Overlaps below the stats grid use the lowest grid point.
double adaptive_eta(const WeightState& state, const GradientStats& stats, int n,
                    double eta_min = 1e-9, double eta_max = 1.0);

WeightState init_weights(int n, const FeatureSet& features, Rng& rng);

/// Stateful single-neuron learner: owns the sampling scratch space.
class Learner {
 public:
  Learner(const SourceSpec& spec, LearnConfig config);

  const SourceSpec& spec() const { return spec_; }
  const LearnConfig& config() const { return config_; }
  const FeatureSet& features() const { return features_; }

  /// Rate used for the next update from `state`.
  double eta_for(const WeightState& state) const;

  /// One online update w <- normalize(w + eta x f(w . x)). Returns the
  /// rate used. The overlap is refreshed every step for cardinal features
  /// and every record_every steps otherwise.
  double step(WeightState& state, Rng& rng);

  void refresh_overlap(WeightState& state) const;

  std::int64_t redraws() const { return redraws_; }

  /// Iterates until the target overlap is reached (plus overshoot) or
  /// max_steps. The crossing step is exact in both overlap modes.
  Trajectory run(WeightState state, Rng& rng);

 private:
  double update(WeightState& state, Rng& rng, double eta);

  SourceSpec spec_;
  LearnConfig config_;
  FeatureSet features_;
  Eigen::VectorXd x_;
  Eigen::VectorXd latent_;
  Eigen::VectorXd candidate_;
  std::int64_t redraws_ = 0;
};

/// Functional forms of Learner::step and Learner::run.
WeightState step(WeightState state, const SourceSpec& spec, const LearnConfig& config, Rng& rng);
Trajectory run(const SourceSpec& spec, const LearnConfig& config, Rng& rng);

/// Excess kurtosis of u = w . x over n_samples inputs.
double projected_input_normality(const SourceSpec& spec, const Eigen::VectorXd& w,
                                 std::int64_t n_samples, Rng& rng);

/// Unit vector with component `d` on axis `feature` and the remaining mass
/// spread evenly with random signs over the other axes.
Eigen::VectorXd weights_with_overlap(int n, int feature, double d, Rng& rng);

}  // namespace hebbdim
