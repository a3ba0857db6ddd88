#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace hebbdim {

struct TrajectoryPoint {
  std::int64_t step = 0;
  double overlap = 0.0;
  double eta = 0.0;
};

/// Time series of one learning run, full or reduced.
struct Trajectory {
  std::uint64_t trial_seed = 0;
  int n = 0;
  int k = 0;
  std::vector<TrajectoryPoint> samples;  // strictly increasing steps
  double target = 0.0;
  std::optional<std::int64_t> crossing;  // exact first step with overlap >= target
  bool converged = false;
  std::int64_t steps = 0;        // total steps taken
  std::int64_t redraws = 0;      // degenerate updates that were re-drawn
  int best_feature = -1;         // feature holding the final overlap
  int best_sign = 0;             // sign of w . feature at the end

  bool not_converged() const { return !converged; }

  /// First recorded step with overlap >= d_ref. Exact when d_ref equals
  /// the run's target; otherwise resolved to the recording interval.
  std::optional<std::int64_t> crossing_step(double d_ref) const;

  /// Overlap at an arbitrary step by linear interpolation between records.
  std::optional<double> overlap_at(double step) const;
};

}  // namespace hebbdim
