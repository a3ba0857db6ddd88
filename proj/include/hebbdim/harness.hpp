#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hebbdim/dynamics.hpp"
#include "hebbdim/reduced.hpp"
#include "hebbdim/sources.hpp"

namespace hebbdim {

enum class ExperimentKind { OverlapGeometry, Trajectories, GradStats, Landscape3d, Scaling };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

/// Learning settings shared by the trajectory and scaling experiments.
struct LearnSettings {
  std::optional<double> eta;  // unset: default_fixed_eta(n)
  bool adaptive = false;
  double eta_min = 1e-9;
  double eta_max = 1.0;
  double threshold = kDefaultThreshold;
  std::int64_t max_steps = 10'000'000;
  std::int64_t record_every = 100;
  double target_overlap = 0.7;
  double overshoot = 0.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Scaling;
  std::vector<int> n_values;
  /// Empty means K = N at every grid point.
  std::vector<int> k_values;
  std::vector<DistributionKind> kinds{DistributionKind::chi_square()};
  int trials = 20;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  LearnSettings learn;

  /// Gradient statistics: grid and samples per point. Also used for the
  /// adaptive rate.
  std::vector<double> grid = default_grid();
  std::int64_t stats_samples = 1'000'000;

  int resolution = 91;                 // landscape3d theta rows
  std::int64_t field_samples = 100'000;

  /// Fraction of non-converged trials above which a point is invalid.
  double failure_cap = 0.05;
  /// 0 selects the hardware concurrency.
  int workers = 0;

  void validate() const;
};

struct GridPoint {
  int index = 0;
  int n = 0;
  int k = 0;
  DistributionKind kind;
};

/// Grid points in output order: distributions outermost, then N, then K.
std::vector<GridPoint> grid_points(const ExperimentConfig& config);

struct ScalingRecord {
  int n = 0;
  int k = 0;
  DistributionKind kind;
  double mean_T = 0.0;  // over converged trials only
  double std_T = 0.0;
  int n_trials = 0;
  int n_failed = 0;
};

struct TrialFailure {
  int point = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string reason;
};

struct OutputFile {
  std::string name;
  std::int64_t rows = 0;
};

struct ExperimentResult {
  std::vector<OutputFile> files;
  std::vector<TrialFailure> failures;
  std::vector<int> invalid_points;
  std::vector<ScalingRecord> records;

  bool exceeded_failure_cap() const { return !invalid_points.empty(); }
};

/// Seed for one trial: hash(base, point, trial).
std::uint64_t trial_seed(std::uint64_t base, int point, int trial);

/// Runs every (point, trial) pair on a worker pool, merges by index, writes
/// the CSVs and manifest.json into config.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Crossing step of config.target_overlap, or nullopt when max_steps ran out.
std::optional<std::int64_t> measure_learning_time(const SourceSpec& spec, const LearnConfig& config,
                                                  Rng& rng);
std::optional<std::int64_t> measure_learning_time(const SourceSpec& spec, const LearnConfig& config,
                                                  WeightState initial, Rng& rng);

/// Mean and spread of the converged learning times, with the failure count.
ScalingRecord summarize_learning_times(int n, int k, const DistributionKind& kind,
                                       const std::vector<std::optional<std::int64_t>>& times);

struct ScalingModel {
  enum class Form { PurePower, LogCorrected };
  Form form = Form::PurePower;
  double log_power = 0.0;  // p in T ln(K)^p ~ N^alpha

  static ScalingModel pure_power() { return {Form::PurePower, 0.0}; }
  static ScalingModel log_corrected(double p) { return {Form::LogCorrected, p}; }
};

/// Least squares on logs over records with a positive finite mean_T.
/// Throws InsufficientData with fewer than 4 usable records.
PowerLawFit fit_scaling(const std::vector<ScalingRecord>& records, const ScalingModel& model);

/// Rows of a scaling.csv file.
std::vector<ScalingRecord> read_scaling_csv(const std::filesystem::path& path);

/// Writes `text` to path via a temporary sibling and rename.
void write_atomic(const std::filesystem::path& path, const std::string& text);

/// 12 significant digits, "nan" for missing values.
std::string format_number(double value);

std::string config_json(const ExperimentConfig& config);

}  // namespace hebbdim
