#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hebbdim/error.hpp"
#include "hebbdim/harness.hpp"
#include "json.hpp"

using namespace hebbdim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hebbdim_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

int data_rows(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  return rows;
}

ExperimentConfig small_scaling(const fs::path& out) {
  ExperimentConfig c;
  c.kind = ExperimentKind::Scaling;
  c.n_values = {6, 8, 10, 12, 14};
  c.kinds = {DistributionKind::chi_square()};
  c.trials = 4;
  c.seed = 2024;
  c.out_dir = out;
  c.learn.eta = 0.02;
  c.learn.max_steps = 200'000;
  c.workers = 1;
  return c;
}

ScalingRecord record(int n, int k, double mean_T) {
  ScalingRecord r;
  r.n = n;
  r.k = k;
  r.mean_T = mean_T;
  r.n_trials = 1;
  return r;
}

}  // namespace

TEST(TrialSeed, DerivedFromBasePointAndTrial) {
  EXPECT_EQ(trial_seed(5, 1, 2), trial_seed(5, 1, 2));
  EXPECT_NE(trial_seed(5, 1, 2), trial_seed(5, 2, 1));
  EXPECT_NE(trial_seed(5, 1, 2), trial_seed(6, 1, 2));
  EXPECT_EQ(trial_seed(5, 1, 2), derive_seed(5, 1, 2));
}

TEST(FitScaling, RecoversSyntheticExponents) {
  std::vector<ScalingRecord> quad;
  for (int n : {10, 20, 40, 80, 160}) quad.push_back(record(n, n, 3.0 * n * n));
  const PowerLawFit pure = fit_scaling(quad, ScalingModel::pure_power());
  EXPECT_NEAR(pure.exponent, 2.0, 1e-12);
  EXPECT_NEAR(pure.r_squared, 1.0, 1e-12);

  // T = N^2 / ln N is a pure square after multiplying by ln K with K = N.
  std::vector<ScalingRecord> logged;
  for (int n : {10, 20, 40, 80, 160}) logged.push_back(record(n, n, n * n / std::log(double(n))));
  EXPECT_NEAR(fit_scaling(logged, ScalingModel::log_corrected(1.0)).exponent, 2.0, 1e-12);
  EXPECT_LT(fit_scaling(logged, ScalingModel::pure_power()).exponent, 2.0);

  logged.resize(3);
  logged.push_back(record(320, 320, std::nan("")));
  EXPECT_THROW(fit_scaling(logged, ScalingModel::pure_power()), InsufficientData);
}

TEST(SummarizeLearningTimes, MeanSpreadAndFailures) {
  const ScalingRecord r = summarize_learning_times(
      10, 10, DistributionKind::laplace(), {std::int64_t{10}, std::nullopt, std::int64_t{20}, std::int64_t{30}});
  EXPECT_EQ(r.n_trials, 4);
  EXPECT_EQ(r.n_failed, 1);
  EXPECT_DOUBLE_EQ(r.mean_T, 20.0);
  EXPECT_DOUBLE_EQ(r.std_T, 10.0);
  const ScalingRecord none =
      summarize_learning_times(10, 10, DistributionKind::laplace(), {std::nullopt});
  EXPECT_TRUE(std::isnan(none.mean_T));
  EXPECT_THROW(summarize_learning_times(10, 10, DistributionKind::laplace(), {}), InvalidArgument);
}

TEST(RunExperiment, ScalingWritesRowsAndManifest) {
  const fs::path out = scratch("scaling");
  const ExperimentResult res = run_experiment(small_scaling(out));
  EXPECT_EQ(res.records.size(), 5u);
  EXPECT_EQ(data_rows(out / "scaling.csv"), 5);
  const auto m = manifest(out);
  EXPECT_EQ(m["experiment"], "scaling");
  EXPECT_EQ(m["files"]["scaling.csv"]["rows"], 5);
  EXPECT_EQ(m["config"]["seed"], 2024);
  EXPECT_TRUE(m["failed_trials"].is_array());
  EXPECT_TRUE(m.contains("code_version"));
  EXPECT_FALSE(res.exceeded_failure_cap());
  const auto back = read_scaling_csv(out / "scaling.csv");
  ASSERT_EQ(back.size(), res.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].n, res.records[i].n);
    EXPECT_EQ(back[i].kind, res.records[i].kind);
    EXPECT_NEAR(back[i].mean_T, res.records[i].mean_T, 1e-9 * res.records[i].mean_T);
    EXPECT_EQ(back[i].n_failed, res.records[i].n_failed);
  }
  for (const auto& entry : fs::directory_iterator(out)) {
    EXPECT_EQ(entry.path().extension().string().find("tmp"), std::string::npos) << entry.path();
  }
}

TEST(RunExperiment, ByteIdenticalAcrossRerunsAndWorkerCounts) {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  ExperimentConfig cfg = small_scaling(a);
  run_experiment(cfg);
  cfg.out_dir = b;
  run_experiment(cfg);
  cfg.out_dir = c;
  cfg.workers = 3;
  run_experiment(cfg);
  for (const char* f : {"scaling.csv", "manifest.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(c / f)) << f;
  }
  cfg.out_dir = b;
  cfg.seed = 2025;
  cfg.workers = 1;
  run_experiment(cfg);
  EXPECT_NE(slurp(a / "scaling.csv"), slurp(b / "scaling.csv"));
}

TEST(RunExperiment, TrajectoriesGroupedByDimension) {
  const fs::path out = scratch("traj");
  ExperimentConfig cfg = small_scaling(out);
  cfg.kind = ExperimentKind::Trajectories;
  cfg.trials = 2;
  cfg.learn.record_every = 20;
  run_experiment(cfg);
  std::ifstream in(out / "trajectory.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "trial,n,k,step,overlap,eta");
  std::set<int> dims;
  while (std::getline(in, line)) dims.insert(std::stoi(line.substr(line.find(',') + 1)));
  EXPECT_EQ(dims, (std::set<int>{6, 8, 10, 12, 14}));
}

TEST(RunExperiment, AdaptiveRateRuns) {
  const fs::path out = scratch("adaptive");
  ExperimentConfig cfg = small_scaling(out);
  cfg.learn.eta.reset();
  cfg.learn.adaptive = true;
  cfg.stats_samples = 20000;
  const ExperimentResult res = run_experiment(cfg);
  for (const auto& r : res.records) EXPECT_EQ(r.n_failed, 0) << r.n;
}

TEST(RunExperiment, FailuresAreRecordedAndTripTheCap) {
  const fs::path out = scratch("fail");
  ExperimentConfig cfg = small_scaling(out);
  cfg.learn.max_steps = 1;
  cfg.failure_cap = 0.0;
  const ExperimentResult res = run_experiment(cfg);
  EXPECT_TRUE(res.exceeded_failure_cap());
  EXPECT_FALSE(res.failures.empty());
  const auto m = manifest(out);
  ASSERT_EQ(m["failed_trials"].size(), res.failures.size());
  const auto& first = m["failed_trials"][0];
  EXPECT_EQ(first["reason"], "not_converged");
  EXPECT_EQ(first["seed"].get<std::uint64_t>(),
            trial_seed(cfg.seed, first["point"].get<int>(), first["trial"].get<int>()));
  EXPECT_FALSE(m["invalid_points"].empty());
  EXPECT_EQ(data_rows(out / "scaling.csv"), 5);
}

TEST(MeasureLearningTime, AlreadyAtTarget) {
  const SourceSpec spec = make_source(5, 5, DistributionKind::laplace(), 0);
  LearnConfig c;
  c.eta = 0.01;
  WeightState s;
  s.w = Eigen::VectorXd::Unit(5, 2);
  Rng rng(1);
  EXPECT_EQ(measure_learning_time(spec, c, s, rng), 0);
}

TEST(MeasureLearningTime, SmallProblemUsuallyConvergesAndLargerIsSlower) {
  LearnConfig c;
  c.eta = 0.02;
  c.max_steps = 1'000'000;
  auto times = [&](int n, int trials) {
    std::vector<double> out;
    int done = 0;
    for (int t = 0; t < trials; ++t) {
      const SourceSpec spec = make_source(n, n, DistributionKind::chi_square(), derive_seed(n, t, 0));
      Rng rng(derive_seed(n, t, 1));
      if (const auto v = measure_learning_time(spec, c, rng)) {
        out.push_back(static_cast<double>(*v));
        ++done;
      }
    }
    return std::make_pair(done, out);
  };
  const auto [done10, t10] = times(10, 100);
  EXPECT_GE(done10, 95);
  const auto [done40, t40] = times(40, 40);
  auto mean_se = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::make_pair(m, std::sqrt(ss / (v.size() - 1) / v.size()));
  };
  const auto [m10, se10] = mean_se(t10);
  const auto [m40, se40] = mean_se(t40);
  EXPECT_GT(m40 - m10, 3.0 * std::hypot(se10, se40));
}

TEST(WriteAtomic, ReplacesWithoutLeftovers) {
  const fs::path dir = scratch("atomic");
  fs::create_directories(dir);
  write_atomic(dir / "x.csv", "a\n");
  write_atomic(dir / "x.csv", "b\n");
  EXPECT_EQ(slurp(dir / "x.csv"), "b\n");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1);
}

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(ExperimentConfig, Validation) {
  ExperimentConfig c = small_scaling(scratch("validate"));
  EXPECT_NO_THROW(c.validate());
  ExperimentConfig bad = c;
  bad.n_values.clear();
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = c;
  bad.trials = 0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = c;
  bad.learn.target_overlap = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = c;
  bad.failure_cap = 1.5;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = c;
  bad.learn.adaptive = true;
  bad.grid = {0.5, 0.2};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = c;
  bad.kind = ExperimentKind::Landscape3d;
  bad.n_values = {4};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  EXPECT_THROW(parse_experiment_kind("bogus"), InvalidArgument);
  EXPECT_EQ(parse_experiment_kind("geometry"), ExperimentKind::OverlapGeometry);
}

TEST(GridPoints, OrderAndShape) {
  ExperimentConfig c;
  c.kind = ExperimentKind::OverlapGeometry;
  c.n_values = {10, 100};
  c.k_values = {5, 50};
  c.kinds = {DistributionKind::laplace(), DistributionKind::chi_square()};
  const auto pts = grid_points(c);
  ASSERT_EQ(pts.size(), 8u);
  EXPECT_EQ(pts[0].n, 10);
  EXPECT_EQ(pts[1].k, 50);
  EXPECT_EQ(pts[4].kind, DistributionKind::chi_square());
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(pts[i].index, static_cast<int>(i));
  c.k_values.clear();
  EXPECT_EQ(grid_points(c)[1].k, 100);
}

TEST(RunExperiment, OtherKindsReportRowCounts) {
  const fs::path out = scratch("kinds");
  ExperimentConfig geo;
  geo.kind = ExperimentKind::OverlapGeometry;
  geo.n_values = {10, 100};
  geo.k_values = {10};
  geo.trials = 200;
  geo.out_dir = out / "geometry";
  run_experiment(geo);
  EXPECT_EQ(data_rows(geo.out_dir / "geometry.csv"), 2);
  EXPECT_EQ(manifest(geo.out_dir)["files"]["geometry.csv"]["rows"], 2);

  ExperimentConfig gs;
  gs.kind = ExperimentKind::GradStats;
  gs.kinds = {DistributionKind::laplace(), DistributionKind::chi_square(4)};
  gs.grid = {0.1, 0.3, 0.6};
  gs.stats_samples = 2000;
  gs.out_dir = out / "gradstats";
  run_experiment(gs);
  EXPECT_EQ(data_rows(gs.out_dir / "gradstats_laplace.csv"), 3);
  EXPECT_EQ(data_rows(gs.out_dir / "gradstats_chi2_4.csv"), 3);

  ExperimentConfig land;
  land.kind = ExperimentKind::Landscape3d;
  land.kinds = {DistributionKind::laplace()};
  land.resolution = 7;
  land.field_samples = 500;
  land.out_dir = out / "landscape";
  run_experiment(land);
  EXPECT_EQ(data_rows(land.out_dir / "landscape3d.csv"), 5 * 12 + 2);
}
