#include "hebbdim/trajectory.hpp"

#include <algorithm>

namespace hebbdim {

std::optional<std::int64_t> Trajectory::crossing_step(double d_ref) const {
  if (crossing && d_ref == target) return crossing;
  for (const auto& p : samples) {
    if (p.overlap >= d_ref) return p.step;
  }
  return std::nullopt;
}

std::optional<double> Trajectory::overlap_at(double step) const {
  if (samples.empty()) return std::nullopt;
  if (step < static_cast<double>(samples.front().step) ||
      step > static_cast<double>(samples.back().step)) {
    return std::nullopt;
  }
  auto it = std::lower_bound(samples.begin(), samples.end(), step,
                             [](const TrajectoryPoint& p, double s) {
                               return static_cast<double>(p.step) < s;
                             });
  if (it == samples.begin()) return it->overlap;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double span = static_cast<double>(hi.step - lo.step);
  const double t = (step - static_cast<double>(lo.step)) / span;
  return lo.overlap + t * (hi.overlap - lo.overlap);
}

}  // namespace hebbdim
