#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "hebbdim/dynamics.hpp"
#include "hebbdim/error.hpp"
#include "hebbdim/geometry.hpp"
#include "hebbdim/harness.hpp"
#include "hebbdim/landscape.hpp"
#include "hebbdim/reduced.hpp"

namespace py = pybind11;
using namespace hebbdim;

namespace {

py::int_ big(const BigCount& value) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(value.str().c_str(), nullptr, 10));
}

py::dict stats_dict(const GradientStats& st) {
  py::dict out;
  out["dist"] = st.kind.name();
  out["threshold"] = st.threshold;
  out["d"] = st.grid;
  out["mu"] = st.mu;
  out["mu_se"] = st.mu_se;
  out["sigma"] = st.sigma;
  out["snr"] = st.snr;
  return out;
}

std::vector<double> grid_or_default(const std::optional<std::vector<double>>& grid) {
  return grid ? *grid : default_grid();
}

py::dict fit_dict(const PowerLawFit& fit) {
  py::dict out;
  out["exponent"] = fit.exponent;
  out["log_intercept"] = fit.log_intercept;
  out["r_squared"] = fit.r_squared;
  out["points"] = fit.points;
  return out;
}

}  // namespace

PYBIND11_MODULE(_hebbdim, m) {
  m.doc() = "Feature learning time versus input dimension for a single rectified Hebbian neuron";
  m.attr("__version__") = HEBBDIM_VERSION;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<InsufficientSignal>(m, "InsufficientSignal", PyExc_RuntimeError);
  py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_RuntimeError);

  m.def(
      "census",
      [](int n) {
        const CriticalCensus c = census(n);
        py::dict out;
        out["minima"] = big(c.minima);
        out["maxima"] = big(c.maxima);
        out["saddles"] = big(c.saddles);
        return out;
      },
      py::arg("n"), "Counts of minima, maxima and saddles for K = N cardinal features.");

  m.def("predicted_max_overlap", &predicted_max_overlap, py::arg("n"), py::arg("k"));

  m.def(
      "measured_max_overlap",
      [](int n, int k, int trials, std::uint64_t seed) {
        Rng rng(seed);
        const OverlapStats st = measured_max_overlap(n, k, trials, rng);
        return py::make_tuple(st.mean, st.std);
      },
      py::arg("n"), py::arg("k"), py::arg("trials") = 10000, py::arg("seed") = 0,
      "Mean and standard deviation of max_i |w . f_i| for random unit w.");

  m.def(
      "gradient_stats",
      [](const std::string& dist, std::optional<std::vector<double>> grid, std::int64_t samples,
         std::uint64_t seed, double threshold) {
        Rng rng(seed);
        return stats_dict(gradient_stats(DistributionKind::parse(dist), threshold,
                                         grid_or_default(grid), samples, rng));
      },
      py::arg("dist") = "chi2", py::arg("grid") = py::none(), py::arg("samples") = 1'000'000,
      py::arg("seed") = 0, py::arg("threshold") = kDefaultThreshold);

  m.def("optimal_eta", &optimal_eta, py::arg("mu"), py::arg("sigma2"), py::arg("n"), py::arg("d"));

  m.def(
      "predict_learning_time",
      [](const std::string& dist, int n, double d0, double target, std::int64_t samples,
         std::uint64_t seed, std::optional<std::vector<double>> grid, double threshold) {
        Rng rng(seed);
        const GradientStats st = gradient_stats(DistributionKind::parse(dist), threshold,
                                                grid_or_default(grid), samples, rng);
        return predict_learning_time(st, n, d0, target);
      },
      py::arg("dist"), py::arg("n"), py::arg("d0"), py::arg("target") = 0.7,
      py::arg("samples") = 1'000'000, py::arg("seed") = 0, py::arg("grid") = py::none(),
      py::arg("threshold") = kDefaultThreshold);

  m.def(
      "simulate",
      [](int n, int k, const std::string& dist, double eta, double target, std::int64_t max_steps,
         std::int64_t record_every, std::uint64_t seed) {
        const SourceSpec spec = make_source(n, k, DistributionKind::parse(dist), derive_seed(seed, 0));
        LearnConfig config;
        config.eta = eta;
        config.target_overlap = target;
        config.max_steps = max_steps;
        config.record_every = record_every;
        Rng rng(derive_seed(seed, 1));
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = run(spec, config, rng);
        }
        std::vector<std::int64_t> steps;
        std::vector<double> overlaps;
        for (const auto& s : tr.samples) {
          steps.push_back(s.step);
          overlaps.push_back(s.overlap);
        }
        py::dict out;
        out["step"] = steps;
        out["overlap"] = overlaps;
        out["crossing"] = tr.crossing;
        out["converged"] = tr.converged;
        return out;
      },
      py::arg("n"), py::arg("k"), py::arg("dist") = "laplace", py::arg("eta") = 0.005,
      py::arg("target") = 0.7, py::arg("max_steps") = 10'000'000, py::arg("record_every") = 100,
      py::arg("seed") = 0, "One online learning run from a random start.");

  m.def(
      "run_experiment",
      [](const std::string& kind, const std::string& out_dir, std::vector<int> n, std::vector<int> k,
         std::vector<std::string> dist, int trials, std::uint64_t seed, std::optional<double> eta,
         bool adaptive, double target, std::int64_t max_steps, std::int64_t stats_samples,
         double failure_cap, int workers) {
        ExperimentConfig config;
        config.kind = parse_experiment_kind(kind);
        config.out_dir = out_dir;
        config.n_values = std::move(n);
        config.k_values = std::move(k);
        config.kinds.clear();
        for (const auto& d : dist) config.kinds.push_back(DistributionKind::parse(d));
        config.trials = trials;
        config.seed = seed;
        config.learn.eta = eta;
        config.learn.adaptive = adaptive;
        config.learn.target_overlap = target;
        config.learn.max_steps = max_steps;
        config.stats_samples = stats_samples;
        config.failure_cap = failure_cap;
        config.workers = workers;
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(config);
        }
        py::dict files;
        for (const auto& f : result.files) files[py::str(f.name)] = f.rows;
        py::dict out;
        out["files"] = files;
        out["failed_trials"] = result.failures.size();
        out["exceeded_failure_cap"] = result.exceeded_failure_cap();
        return out;
      },
      py::arg("kind"), py::arg("out_dir"), py::arg("n") = std::vector<int>{},
      py::arg("k") = std::vector<int>{}, py::arg("dist") = std::vector<std::string>{"chi2"},
      py::arg("trials") = 20, py::arg("seed") = 0, py::arg("eta") = py::none(),
      py::arg("adaptive") = false, py::arg("target") = 0.7, py::arg("max_steps") = 10'000'000,
      py::arg("stats_samples") = 1'000'000, py::arg("failure_cap") = 0.05, py::arg("workers") = 0,
      "Runs an experiment and writes its CSVs and manifest.json into out_dir.");

  m.def(
      "fit_scaling",
      [](const std::filesystem::path& csv, const std::string& model, double p) {
        if (model != "pure" && model != "log") throw InvalidArgument("model must be 'pure' or 'log'");
        const ScalingModel sm = model == "pure" ? ScalingModel::pure_power() : ScalingModel::log_corrected(p);
        return fit_dict(fit_scaling(read_scaling_csv(csv), sm));
      },
      py::arg("csv"), py::arg("model") = "log", py::arg("p") = 1.0,
      "Power-law fit of the learning times in a scaling.csv.");
}
