#include "hebbdim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hebbdim/error.hpp"
#include "hebbdim/geometry.hpp"
#include "hebbdim/stats.hpp"

namespace hebbdim {

FeatureSet::FeatureSet(const SourceSpec& spec)
    : n_(spec.n_inputs), k_(spec.n_features), cardinal_(spec.cardinal()) {
  if (!cardinal_) columns_ = hidden_features(spec);
}

FeatureSet::FeatureSet(Eigen::MatrixXd columns)
    : n_(static_cast<int>(columns.rows())),
      k_(static_cast<int>(columns.cols())),
      cardinal_(false),
      columns_(std::move(columns)) {}

FeatureSet FeatureSet::cardinal(int n, int k) {
  FeatureSet f;
  f.n_ = n;
  f.k_ = std::min(n, k);
  f.cardinal_ = true;
  return f;
}

FeatureSet::Overlap FeatureSet::overlap(const Eigen::VectorXd& w) const {
  Overlap o;
  double best = -1.0;
  if (cardinal_) {
    for (int i = 0; i < k_; ++i) {
      const double a = std::abs(w[i]);
      if (a > best) {
        best = a;
        o.index = i;
      }
    }
    o.sign = w[o.index] >= 0.0 ? 1 : -1;
  } else {
    const Eigen::VectorXd dots = columns_.transpose() * w;
    for (int i = 0; i < k_; ++i) {
      const double a = std::abs(dots[i]);
      if (a > best) {
        best = a;
        o.index = i;
      }
    }
    o.sign = dots[o.index] >= 0.0 ? 1 : -1;
  }
  o.value = std::min(best, 1.0);
  return o;
}

Eigen::MatrixXd FeatureSet::matrix() const {
  if (!cardinal_) return columns_;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, k_);
  for (int i = 0; i < k_; ++i) m(i, i) = 1.0;
  return m;
}

void LearnConfig::validate() const {
  if (const auto* fixed = std::get_if<double>(&eta)) {
    if (!(*fixed >= 0.0)) throw InvalidArgument("LearnConfig: eta must be >= 0");
  } else {
    const auto& a = std::get<AdaptiveEta>(eta);
    if (!a.stats || a.stats->grid.empty()) {
      throw InvalidArgument("LearnConfig: adaptive eta needs gradient stats");
    }
    if (!(a.eta_min > 0.0 && a.eta_max >= a.eta_min)) {
      throw InvalidArgument("LearnConfig: invalid adaptive eta clip range");
    }
  }
  if (max_steps < 0 || record_every < 1) {
    throw InvalidArgument("LearnConfig: max_steps >= 0 and record_every >= 1 required");
  }
  if (!(target_overlap >= 0.0 && target_overlap < 1.0)) {
    throw InvalidArgument("LearnConfig: target_overlap must lie in [0, 1)");
  }
  if (overshoot < 0.0) throw InvalidArgument("LearnConfig: overshoot must be >= 0");
}

double default_fixed_eta(int n) { return 0.005 * 10.0 / n; }

double adaptive_eta(const WeightState& state, const GradientStats& stats, int n,
                    double eta_min, double eta_max) {
  if (stats.grid.empty()) throw InvalidArgument("adaptive_eta: empty stats");
  const double d = std::clamp(state.overlap, stats.grid.front(), stats.grid.back());
  const double sigma = stats.sigma_at(d);
  const double eta = optimal_eta(stats.mu_at(d), sigma * sigma, n, d);
  return std::clamp(eta, eta_min, eta_max);
}

WeightState init_weights(int n, const FeatureSet& features, Rng& rng) {
  WeightState s;
  s.w = random_unit_vector(n, rng);
  const auto o = features.overlap(s.w);
  s.overlap = o.value;
  s.best_feature = o.index;
  s.best_sign = o.sign;
  return s;
}

Learner::Learner(const SourceSpec& spec, LearnConfig config)
    : spec_(spec),
      config_(std::move(config)),
      features_(spec),
      x_(spec.n_inputs),
      latent_(spec.n_features),
      candidate_(spec.n_inputs) {
  config_.validate();
}

double Learner::eta_for(const WeightState& state) const {
  if (const auto* fixed = std::get_if<double>(&config_.eta)) return *fixed;
  const auto& a = std::get<AdaptiveEta>(config_.eta);
  return adaptive_eta(state, *a.stats, spec_.n_inputs, a.eta_min, a.eta_max);
}

void Learner::refresh_overlap(WeightState& state) const {
  const auto o = features_.overlap(state.w);
  state.overlap = o.value;
  state.best_feature = o.index;
  state.best_sign = o.sign;
}

double Learner::update(WeightState& state, Rng& rng, double eta) {
  for (;;) {
    sample_into(spec_, rng, x_, latent_);
    const double u = state.w.dot(x_);
    const double f = rectifier(u, config_.threshold);
    if (f == 0.0 || eta == 0.0) break;
    candidate_ = state.w + (eta * f) * x_;
    const double norm = candidate_.norm();
    if (norm < 1e-12) {
      ++redraws_;
      continue;
    }
    state.w = candidate_ / norm;
    break;
  }
  ++state.step;
  return eta;
}

double Learner::step(WeightState& state, Rng& rng) {
  const double eta = eta_for(state);
  update(state, rng, eta);
  if (features_.is_cardinal() || state.step % config_.record_every == 0) refresh_overlap(state);
  return eta;
}

Trajectory Learner::run(WeightState state, Rng& rng) {
  Trajectory tr;
  tr.n = spec_.n_inputs;
  tr.k = spec_.n_features;
  tr.target = config_.target_overlap;
  refresh_overlap(state);

  const std::int64_t every = config_.record_every;
  const std::int64_t start = state.step;
  const bool per_step = features_.is_cardinal();
  double eta = eta_for(state);
  tr.samples.push_back({state.step, state.overlap, eta});

  std::int64_t stop_at = start + config_.max_steps;
  if (state.overlap >= config_.target_overlap) {
    tr.crossing = state.step;
    tr.converged = true;
    stop_at = start;
  }

  // Checkpoint for replaying the last interval when the overlap is only
  // refreshed every `every` steps.
  WeightState checkpoint = state;
  Rng checkpoint_rng = rng;

  while (state.step < stop_at) {
    eta = eta_for(state);
    update(state, rng, eta);
    const bool on_record = state.step % every == 0;
    if (per_step || on_record) refresh_overlap(state);

    if (!tr.crossing && (per_step || on_record) && state.overlap >= config_.target_overlap) {
      if (per_step) {
        tr.crossing = state.step;
      } else {
        // Replay the interval one update at a time with the same rates.
        WeightState probe = checkpoint;
        Rng probe_rng = checkpoint_rng;
        const std::int64_t redraws = redraws_;
        while (probe.step < state.step) {
          update(probe, probe_rng, eta_for(probe));
          if (features_.overlap(probe.w).value >= config_.target_overlap) break;
        }
        redraws_ = redraws;
        tr.crossing = probe.step;
      }
      tr.converged = true;
      const auto elapsed = *tr.crossing - start;
      stop_at = std::min(stop_at, *tr.crossing +
                                      static_cast<std::int64_t>(std::ceil(config_.overshoot *
                                                                          elapsed)));
      tr.samples.push_back({state.step, state.overlap, eta});
      continue;
    }
    if (on_record) {
      tr.samples.push_back({state.step, state.overlap, eta});
      if (!per_step) {
        checkpoint = state;
        checkpoint_rng = rng;
      }
    }
  }
  refresh_overlap(state);
  if (tr.samples.back().step != state.step) tr.samples.push_back({state.step, state.overlap, eta});
  tr.steps = state.step - start;
  tr.redraws = redraws_;
  tr.best_feature = state.best_feature;
  tr.best_sign = state.best_sign;
  return tr;
}

WeightState step(WeightState state, const SourceSpec& spec, const LearnConfig& config, Rng& rng) {
  Learner learner(spec, config);
  learner.step(state, rng);
  if (!learner.features().is_cardinal()) learner.refresh_overlap(state);
  return state;
}

Trajectory run(const SourceSpec& spec, const LearnConfig& config, Rng& rng) {
  Learner learner(spec, config);
  WeightState state = init_weights(spec.n_inputs, learner.features(), rng);
  return learner.run(std::move(state), rng);
}

double projected_input_normality(const SourceSpec& spec, const Eigen::VectorXd& w,
                                 std::int64_t n_samples, Rng& rng) {
  if (std::abs(w.norm() - 1.0) > 1e-8) {
    throw InvalidArgument("projected_input_normality: w must have unit norm");
  }
  if (n_samples < 2) throw InvalidArgument("projected_input_normality: n_samples >= 2");
  std::vector<double> u(static_cast<std::size_t>(n_samples));
  Eigen::VectorXd x(spec.n_inputs);
  Eigen::VectorXd latent;
  for (auto& v : u) {
    sample_into(spec, rng, x, latent);
    v = w.dot(x);
  }
  return summarize(u).excess_kurtosis;
}

Eigen::VectorXd weights_with_overlap(int n, int feature, double d, Rng& rng) {
  if (n < 2 || feature < 0 || feature >= n || !(d >= 0.0 && d <= 1.0)) {
    throw InvalidArgument("weights_with_overlap: invalid arguments");
  }
  Eigen::VectorXd w(n);
  const double rest = std::sqrt((1.0 - d * d) / (n - 1));
  for (int i = 0; i < n; ++i) w[i] = i == feature ? d : rest * rng.sign();
  return w / w.norm();
}

}  // namespace hebbdim
