#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "drift/density.hpp"
#include "drift/ensemble.hpp"
#include "drift/errors.hpp"
#include "drift/stats.hpp"
#include "drift/stream.hpp"

namespace py = pybind11;
using namespace drift;

namespace {

Stream make_stream(const std::string& dataset, std::int64_t n,
                   std::int64_t chunk_size, double noise, std::uint64_t seed,
                   FeatureSchema* schema_out) {
  const ConceptSchedule sched{{0, 1, 2, 3}, chunk_size, true};
  Stream s;
  FeatureSchema schema;
  if (dataset == "stagger") {
    schema = stagger_schema();
    s = generate_stagger(n, sched, seed);
  } else if (dataset == "sea") {
    schema = sea_schema();
    s = generate_sea(n, sched, seed);
  } else {
    throw SpecError("dataset must be 'stagger' or 'sea'");
  }
  if (noise > 0.0) s = inject_label_noise(s, {noise, derive_seed(seed, 0x70)});
  if (schema_out) *schema_out = schema;
  return s;
}

py::dict generate(const std::string& dataset, std::int64_t n,
                  std::int64_t chunk_size, std::uint64_t seed, double noise) {
  const Stream s = make_stream(dataset, n, chunk_size, noise, seed, nullptr);
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  features.reserve(s.size());
  labels.reserve(s.size());
  for (const auto& z : s) {
    features.push_back(z.features);
    labels.push_back(z.label);
  }
  py::dict out;
  out["features"] = std::move(features);
  out["labels"] = std::move(labels);
  return out;
}

py::dict run_experiment(const std::string& dataset, std::int64_t n,
                        std::int64_t chunk_size, double noise,
                        const std::string& betting, const std::string& mode,
                        double r, double delta, std::vector<int> thetas,
                        std::uint64_t seed, int estimator_window,
                        double martingale_floor) {
  FeatureSchema schema;
  const Stream s = make_stream(dataset, n, chunk_size, noise, seed, &schema);
  EnsembleConfig cfg;
  if (mode == "single")
    cfg.thetas = {thetas.front()};
  else if (mode == "ensemble")
    cfg.thetas = std::move(thetas);
  else
    throw SpecError("mode must be 'single' or 'ensemble'");
  cfg.betting = betting;
  cfg.r = r;
  cfg.delta = delta;
  cfg.seed = seed;
  cfg.estimator_window = estimator_window;
  cfg.martingale_floor = martingale_floor;
  VectorSource src(s);
  const RunRecord rec = run(src, cfg, schema);
  const AccuracyEstimate est = accuracy(rec);
  py::dict out;
  out["accuracy"] = est.p_hat;
  out["available"] = est.n;
  out["unavailable"] = est.unavailable;
  out["alarms"] = rec.alarms.size();
  out["retrains"] = rec.retrains.size();
  out["pipelines"] = rec.pipeline_count();
  out["predictions"] = rec.ensemble_pred;
  return out;
}

py::dict ztest(double p_a, int k_a, double n_a, double p_b, int k_b,
               double n_b, double rho) {
  const auto res =
      z_test(AccuracyEstimate{p_a, n_a, k_a, 0},
             AccuracyEstimate{p_b, n_b, k_b, 0}, rho);
  py::dict out;
  out["d"] = res.d;
  out["se"] = res.se;
  out["z"] = res.z;
  out["rho"] = res.rho;
  out["rejected"] = res.rejected;
  return out;
}

double histogram_density(const std::vector<double>& pvalues, int bins,
                         double x, bool interpolate) {
  return fit_interpolated_histogram(pvalues, bins, interpolate).eval(x);
}

}  // namespace

PYBIND11_MODULE(_icmdrift, m) {
  m.doc() = "Streaming concept-drift detection with conformal martingales";

  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def("generate", &generate, py::arg("dataset"), py::arg("n"),
        py::arg("chunk_size") = 10000, py::arg("seed") = 1,
        py::arg("noise") = 0.0,
        "Generate a benchmark stream; returns features and labels.");

  m.def("run_experiment", &run_experiment, py::arg("dataset"), py::arg("n"),
        py::arg("chunk_size") = 10000, py::arg("noise") = 0.0,
        py::arg("betting") = "MIHNN", py::arg("mode") = "ensemble",
        py::arg("r") = 10.0, py::arg("delta") = 0.01,
        py::arg("thetas") =
            std::vector<int>{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000},
        py::arg("seed") = 1,
        py::arg("estimator_window") = EnsembleConfig{}.estimator_window,
        py::arg("martingale_floor") = EnsembleConfig{}.martingale_floor,
        "Run drift-detecting classification over a generated stream.");

  m.def("z_test", &ztest, py::arg("p_a"), py::arg("k_a"), py::arg("n_a"),
        py::arg("p_b"), py::arg("k_b"), py::arg("n_b"), py::arg("rho") = -1.0,
        "One-tailed Z-test between two accuracy estimates.");

  m.def("histogram_density", &histogram_density, py::arg("pvalues"),
        py::arg("bins") = 15, py::arg("x") = 0.5,
        py::arg("interpolate") = true,
        "Interpolated-histogram density of a p-value sample at x.");

  m.def("knn_density",
        [](const std::vector<double>& pvalues, int k, double x) {
          return knn_density(pvalues, k, x);
        },
        py::arg("pvalues"), py::arg("k") = 15, py::arg("x") = 0.5,
        "k-nearest-neighbor density of a p-value sample at x.");
}
