#include "hebbdim/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "hebbdim/error.hpp"
#include "hebbdim/geometry.hpp"
#include "hebbdim/landscape.hpp"
#include "hebbdim/stats.hpp"

#ifndef HEBBDIM_VERSION
#define HEBBDIM_VERSION "unknown"
#endif

namespace hebbdim {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::OverlapGeometry:
      return "overlap_geometry";
    case ExperimentKind::Trajectories:
      return "trajectories";
    case ExperimentKind::GradStats:
      return "gradstats";
    case ExperimentKind::Landscape3d:
      return "landscape3d";
    case ExperimentKind::Scaling:
      return "scaling";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  for (auto kind : {ExperimentKind::OverlapGeometry, ExperimentKind::Trajectories,
                    ExperimentKind::GradStats, ExperimentKind::Landscape3d,
                    ExperimentKind::Scaling}) {
    if (text == to_string(kind)) return kind;
  }
  if (text == "geometry") return ExperimentKind::OverlapGeometry;
  throw InvalidArgument("unknown experiment kind: " + std::string(text));
}

void ExperimentConfig::validate() const {
  const bool needs_n = kind == ExperimentKind::OverlapGeometry ||
                       kind == ExperimentKind::Trajectories || kind == ExperimentKind::Scaling;
  if (needs_n && n_values.empty()) throw InvalidArgument("config: n list is empty");
  for (int n : n_values) {
    if (n < 1) throw InvalidArgument("config: n entries must be positive");
  }
  for (int k : k_values) {
    if (k < 1) throw InvalidArgument("config: k entries must be positive");
  }
  if (kinds.empty()) throw InvalidArgument("config: distribution list is empty");
  if (trials < 1) throw InvalidArgument("config: trials must be positive");
  if (kind == ExperimentKind::Landscape3d) {
    for (int n : n_values) {
      if (n != 3) throw InvalidArgument("config: landscape3d requires n = 3");
    }
    if (resolution < 3) throw InvalidArgument("config: resolution must be >= 3");
    if (field_samples < 2) throw InvalidArgument("config: field samples must be >= 2");
  }
  if (kind == ExperimentKind::GradStats || learn.adaptive) {
    if (grid.empty()) throw InvalidArgument("config: gradient grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!(grid[i] > 0.0 && grid[i] < 1.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
        throw InvalidArgument("config: grid must be strictly increasing inside (0, 1)");
      }
    }
    if (stats_samples < 16) throw InvalidArgument("config: stats samples must be >= 16");
  }
  if (learn.eta && !(*learn.eta > 0.0)) throw InvalidArgument("config: eta must be positive");
  if (learn.max_steps < 1 || learn.record_every < 1) {
    throw InvalidArgument("config: max_steps and record_every must be positive");
  }
  if (!(learn.target_overlap > 0.0 && learn.target_overlap < 1.0)) {
    throw InvalidArgument("config: target overlap must lie in (0, 1)");
  }
  if (!(failure_cap >= 0.0 && failure_cap <= 1.0)) {
    throw InvalidArgument("config: failure cap must lie in [0, 1]");
  }
  if (workers < 0) throw InvalidArgument("config: workers must be >= 0");
}

std::vector<GridPoint> grid_points(const ExperimentConfig& config) {
  std::vector<GridPoint> points;
  int index = 0;
  for (const auto& kind : config.kinds) {
    if (config.kind == ExperimentKind::GradStats) {
      points.push_back({index++, 0, 0, kind});
      continue;
    }
    if (config.kind == ExperimentKind::Landscape3d) {
      points.push_back({index++, 3, 3, kind});
      continue;
    }
    for (int n : config.n_values) {
      if (config.k_values.empty()) {
        points.push_back({index++, n, n, kind});
      } else {
        for (int k : config.k_values) points.push_back({index++, n, k, kind});
      }
    }
  }
  return points;
}

std::uint64_t trial_seed(std::uint64_t base, int point, int trial) {
  return derive_seed(base, static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(trial));
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

// Runs fn(i) for i in [0, count) on `workers` threads. Results must be
// stored by index; the first exception is rethrown after all threads join.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  unsigned threads = workers > 0 ? static_cast<unsigned>(workers)
                                 : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

LearnConfig make_learn_config(const LearnSettings& s, int n,
                              const std::shared_ptr<const GradientStats>& stats) {
  LearnConfig c;
  if (s.adaptive) {
    c.eta = AdaptiveEta{stats, s.eta_min, s.eta_max};
  } else {
    c.eta = s.eta.value_or(default_fixed_eta(n));
  }
  c.threshold = s.threshold;
  c.max_steps = s.max_steps;
  c.record_every = s.record_every;
  c.target_overlap = s.target_overlap;
  c.overshoot = s.overshoot;
  return c;
}

struct TrialOutcome {
  std::optional<Trajectory> trajectory;
  std::optional<std::int64_t> crossing;
  double value = 0.0;
  std::string failure;
};

std::string csv_name(std::string stem, const GridPoint& point, bool qualify) {
  if (!qualify) return stem + ".csv";
  std::string dist = point.kind.name();
  std::replace(dist.begin(), dist.end(), ':', '_');
  return stem + "_" + dist + ".csv";
}

class ExperimentRunner {
 public:
  explicit ExperimentRunner(const ExperimentConfig& config)
      : config_(config), points_(grid_points(config)) {}

  ExperimentResult run() {
    fs::create_directories(config_.out_dir);
    switch (config_.kind) {
      case ExperimentKind::OverlapGeometry:
        run_geometry();
        break;
      case ExperimentKind::GradStats:
        run_gradstats();
        break;
      case ExperimentKind::Landscape3d:
        run_landscape();
        break;
      case ExperimentKind::Trajectories:
      case ExperimentKind::Scaling:
        run_learning();
        break;
    }
    write_manifest();
    return std::move(result_);
  }

 private:
  void emit(const std::string& name, const std::string& header,
            const std::vector<std::string>& rows) {
    std::string text = header + "\n";
    for (const auto& r : rows) text += r + "\n";
    write_atomic(config_.out_dir / name, text);
    result_.files.push_back({name, static_cast<std::int64_t>(rows.size())});
  }

  // Runs (point, trial) tasks and records failures in (point, trial) order.
  std::vector<TrialOutcome> run_trials(
      int trials_per_point,
      const std::function<TrialOutcome(const GridPoint&, int, std::uint64_t)>& body) {
    const std::size_t per = static_cast<std::size_t>(trials_per_point);
    std::vector<TrialOutcome> outcomes(points_.size() * per);
    parallel_for(outcomes.size(), config_.workers, [&](std::size_t i) {
      const GridPoint& p = points_[i / per];
      const int trial = static_cast<int>(i % per);
      const std::uint64_t seed = trial_seed(config_.seed, p.index, trial);
      try {
        outcomes[i] = body(p, trial, seed);
      } catch (const std::exception& e) {
        outcomes[i].failure = e.what();
      }
    });
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (!outcomes[i].failure.empty()) {
        const int trial = static_cast<int>(i % per);
        const int point = static_cast<int>(i / per);
        result_.failures.push_back(
            {point, trial, trial_seed(config_.seed, point, trial), outcomes[i].failure});
      }
    }
    return outcomes;
  }

  int failures_at(const std::vector<TrialOutcome>& outcomes, std::size_t point, int per) const {
    int failed = 0;
    for (int t = 0; t < per; ++t) failed += !outcomes[point * per + t].failure.empty();
    return failed;
  }

  void mark_invalid(std::size_t point, int failed, int per) {
    if (failed > config_.failure_cap * per) result_.invalid_points.push_back(static_cast<int>(point));
  }

  void run_geometry() {
    const int per = config_.trials;
    auto outcomes = run_trials(per, [](const GridPoint& p, int, std::uint64_t seed) {
      Rng rng(seed);
      TrialOutcome o;
      o.value = sample_max_overlap(p.n, p.k, rng).max_overlap;
      return o;
    });
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      std::vector<double> values;
      for (int t = 0; t < per; ++t) {
        const auto& o = outcomes[i * per + t];
        if (o.failure.empty()) values.push_back(o.value);
      }
      mark_invalid(i, failures_at(outcomes, i, per), per);
      double mean = NAN, sd = NAN;
      if (values.size() == 1) mean = values.front();
      if (values.size() > 1) {
        const Summary s = summarize(values);
        mean = s.mean;
        sd = s.sd;
      }
      rows.push_back(std::to_string(p.n) + "," + std::to_string(p.k) + "," +
                     format_number(mean) + "," + format_number(sd) + "," +
                     format_number(predicted_max_overlap(p.n, p.k)));
    }
    emit("geometry.csv", "n,k,mean_max_overlap,std,predicted", rows);
  }

  void run_gradstats() {
    std::vector<std::optional<GradientStats>> stats(points_.size());
    std::vector<std::string> errors(points_.size());
    parallel_for(points_.size(), config_.workers, [&](std::size_t i) {
      Rng rng(trial_seed(config_.seed, points_[i].index, 0));
      try {
        stats[i] = gradient_stats(points_[i].kind, config_.learn.threshold, config_.grid,
                                  config_.stats_samples, rng);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    const bool qualify = points_.size() > 1;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!stats[i]) {
        result_.failures.push_back({static_cast<int>(i), 0,
                                    trial_seed(config_.seed, static_cast<int>(i), 0), errors[i]});
        result_.invalid_points.push_back(static_cast<int>(i));
        continue;
      }
      const auto& s = *stats[i];
      std::vector<std::string> rows;
      for (std::size_t j = 0; j < s.grid.size(); ++j) {
        rows.push_back(format_number(s.grid[j]) + "," + format_number(s.mu[j]) + "," +
                       format_number(s.mu_se[j]) + "," + format_number(s.sigma[j]) + "," +
                       format_number(s.snr[j]) + "," + std::to_string(s.n_samples[j]));
      }
      emit(csv_name("gradstats", points_[i], qualify), "d,mu,mu_se,sigma,snr,n_samples", rows);
    }
  }

  void run_landscape() {
    const bool qualify = points_.size() > 1;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      const std::uint64_t seed = trial_seed(config_.seed, p.index, 0);
      std::vector<FieldCell> cells;
      try {
        const SourceSpec spec = make_source(3, 3, p.kind, derive_seed(seed, 0));
        Rng rng(derive_seed(seed, 1));
        cells = sphere_gradient_field(spec, config_.resolution, config_.field_samples, rng,
                                      config_.learn.threshold);
      } catch (const std::exception& e) {
        result_.failures.push_back({p.index, 0, seed, e.what()});
        result_.invalid_points.push_back(p.index);
        continue;
      }
      std::vector<std::string> rows;
      rows.reserve(cells.size());
      for (const auto& c : cells) {
        rows.push_back(format_number(c.theta) + "," + format_number(c.phi) + "," +
                       format_number(c.grad_magnitude));
      }
      emit(csv_name("landscape3d", p, qualify), "theta,phi,grad_magnitude", rows);
    }
  }

  void run_learning() {
    // Gradient statistics depend on the distribution only; computed once
    // per distribution and shared across N.
    std::map<std::string, std::shared_ptr<const GradientStats>> stats;
    if (config_.learn.adaptive) {
      for (std::size_t i = 0; i < config_.kinds.size(); ++i) {
        const auto& kind = config_.kinds[i];
        if (stats.count(kind.name())) continue;
        Rng rng(derive_seed(config_.seed, 0x5eed57a7ULL, i));
        stats[kind.name()] = std::make_shared<const GradientStats>(gradient_stats(
            kind, config_.learn.threshold, config_.grid, config_.stats_samples, rng));
      }
    }

    const bool keep_paths = config_.kind == ExperimentKind::Trajectories;
    const int per = config_.trials;
    auto outcomes = run_trials(per, [&](const GridPoint& p, int, std::uint64_t seed) {
      std::shared_ptr<const GradientStats> s;
      if (config_.learn.adaptive) s = stats.at(p.kind.name());
      const SourceSpec spec = make_source(p.n, p.k, p.kind, derive_seed(seed, 0));
      Rng rng(derive_seed(seed, 1));
      Learner learner(spec, make_learn_config(config_.learn, p.n, s));
      Trajectory tr = learner.run(init_weights(p.n, learner.features(), rng), rng);
      tr.trial_seed = seed;
      TrialOutcome o;
      o.crossing = tr.crossing;
      if (!tr.converged) o.failure = "not_converged";
      if (keep_paths) o.trajectory = std::move(tr);
      return o;
    });

    std::vector<std::string> rows;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      const int failed = failures_at(outcomes, i, per);
      mark_invalid(i, failed, per);
      if (keep_paths) {
        for (int t = 0; t < per; ++t) {
          const auto& o = outcomes[i * per + t];
          if (!o.trajectory) continue;
          for (const auto& s : o.trajectory->samples) {
            rows.push_back(std::to_string(t) + "," + std::to_string(p.n) + "," +
                           std::to_string(p.k) + "," + std::to_string(s.step) + "," +
                           format_number(s.overlap) + "," + format_number(s.eta));
          }
        }
      } else {
        std::vector<std::optional<std::int64_t>> times;
        for (int t = 0; t < per; ++t) {
          const auto& o = outcomes[i * per + t];
          times.push_back(o.failure.empty() ? o.crossing : std::nullopt);
        }
        ScalingRecord r = summarize_learning_times(p.n, p.k, p.kind, times);
        rows.push_back(std::to_string(r.n) + "," + std::to_string(r.k) + "," + r.kind.name() +
                       "," + format_number(r.mean_T) + "," + format_number(r.std_T) + "," +
                       std::to_string(r.n_trials) + "," + std::to_string(r.n_failed));
        result_.records.push_back(std::move(r));
      }
    }
    if (keep_paths) {
      emit("trajectory.csv", "trial,n,k,step,overlap,eta", rows);
    } else {
      emit("scaling.csv", "n,k,dist,mean_T,std_T,n_trials,n_failed", rows);
    }
  }

  void write_manifest() {
    json m;
    m["code_version"] = HEBBDIM_VERSION;
    m["experiment"] = to_string(config_.kind);
    m["config"] = json::parse(config_json(config_));
    json files = json::object();
    for (const auto& f : result_.files) files[f.name] = {{"rows", f.rows}};
    m["files"] = files;
    json failed = json::array();
    for (const auto& f : result_.failures) {
      const auto& p = points_.at(static_cast<std::size_t>(f.point));
      failed.push_back({{"point", f.point},
                        {"n", p.n},
                        {"k", p.k},
                        {"dist", p.kind.name()},
                        {"trial", f.trial},
                        {"seed", f.seed},
                        {"reason", f.reason}});
    }
    m["failed_trials"] = failed;
    json invalid = json::array();
    for (int i : result_.invalid_points) {
      const auto& p = points_.at(static_cast<std::size_t>(i));
      invalid.push_back({{"point", i}, {"n", p.n}, {"k", p.k}, {"dist", p.kind.name()}});
    }
    m["invalid_points"] = invalid;
    write_atomic(config_.out_dir / "manifest.json", m.dump(2) + "\n");
    result_.files.push_back({"manifest.json", 0});
  }

  const ExperimentConfig& config_;
  std::vector<GridPoint> points_;
  ExperimentResult result_;
};

}  // namespace

std::string config_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["n"] = c.n_values;
  j["k"] = c.k_values;
  json dists = json::array();
  for (const auto& k : c.kinds) dists.push_back(k.name());
  j["dist"] = dists;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  json learn;
  if (c.learn.eta) {
    learn["eta"] = *c.learn.eta;
  } else {
    learn["eta"] = nullptr;
  }
  learn["adaptive"] = c.learn.adaptive;
  learn["eta_min"] = c.learn.eta_min;
  learn["eta_max"] = c.learn.eta_max;
  learn["theta"] = c.learn.threshold;
  learn["max_steps"] = c.learn.max_steps;
  learn["record_every"] = c.learn.record_every;
  learn["target"] = c.learn.target_overlap;
  learn["overshoot"] = c.learn.overshoot;
  j["learn"] = learn;
  j["grid"] = c.grid;
  j["stats_samples"] = c.stats_samples;
  j["resolution"] = c.resolution;
  j["field_samples"] = c.field_samples;
  j["failure_cap"] = c.failure_cap;
  return j.dump();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  return ExperimentRunner(config).run();
}

std::optional<std::int64_t> measure_learning_time(const SourceSpec& spec, const LearnConfig& config,
                                                  WeightState initial, Rng& rng) {
  Learner learner(spec, config);
  const Trajectory tr = learner.run(std::move(initial), rng);
  if (!tr.converged) return std::nullopt;
  const auto step = tr.crossing_step(config.target_overlap);
  if (!step) return std::nullopt;
  return *step - tr.samples.front().step;
}

std::optional<std::int64_t> measure_learning_time(const SourceSpec& spec, const LearnConfig& config,
                                                  Rng& rng) {
  const FeatureSet features(spec);
  return measure_learning_time(spec, config, init_weights(spec.n_inputs, features, rng), rng);
}

ScalingRecord summarize_learning_times(int n, int k, const DistributionKind& kind,
                                       const std::vector<std::optional<std::int64_t>>& times) {
  if (times.empty()) throw InvalidArgument("summarize_learning_times: no trials");
  ScalingRecord r;
  r.n = n;
  r.k = k;
  r.kind = kind;
  r.n_trials = static_cast<int>(times.size());
  std::vector<double> done;
  for (const auto& t : times) {
    if (t) {
      done.push_back(static_cast<double>(*t));
    } else {
      ++r.n_failed;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (done.empty()) {
    r.mean_T = r.std_T = nan;
  } else if (done.size() == 1) {
    r.mean_T = done.front();
    r.std_T = nan;
  } else {
    const Summary s = summarize(done);
    r.mean_T = s.mean;
    r.std_T = s.sd;
  }
  return r;
}

PowerLawFit fit_scaling(const std::vector<ScalingRecord>& records, const ScalingModel& model) {
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    if (!(std::isfinite(r.mean_T) && r.mean_T > 0.0) || r.n < 1) continue;
    double y = r.mean_T;
    if (model.form == ScalingModel::Form::LogCorrected) {
      if (r.k < 2) continue;
      y *= std::pow(std::log(static_cast<double>(r.k)), model.log_power);
    }
    xs.push_back(static_cast<double>(r.n));
    ys.push_back(y);
  }
  if (xs.size() < 4) throw InsufficientData("fit_scaling: fewer than 4 usable records");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return fit_power_law(xs, ys, {*lo, *hi});
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::vector<ScalingRecord> read_scaling_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": empty file");
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"n", "k", "dist", "mean_T", "std_T", "n_trials", "n_failed"}) {
    if (!col.count(name)) throw InvalidArgument(path.string() + ": missing column " + name);
  }
  std::vector<ScalingRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw InvalidArgument(path.string() + ": ragged row");
    try {
      ScalingRecord r;
      r.n = std::stoi(cells[col["n"]]);
      r.k = std::stoi(cells[col["k"]]);
      r.kind = DistributionKind::parse(cells[col["dist"]]);
      r.mean_T = std::stod(cells[col["mean_T"]]);
      r.std_T = std::stod(cells[col["std_T"]]);
      r.n_trials = std::stoi(cells[col["n_trials"]]);
      r.n_failed = std::stoi(cells[col["n_failed"]]);
      records.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InvalidArgument(path.string() + ": malformed row: " + line);
    }
  }
  return records;
}

}  // namespace hebbdim
