#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "echolab/analysis.hpp"
#include "echolab/config.hpp"
#include "echolab/correlators.hpp"
#include "echolab/ensembles.hpp"
#include "echolab/error.hpp"
#include "echolab/experiment.hpp"
#include "echolab/iho.hpp"
#include "echolab/linalg.hpp"
#include "echolab/models.hpp"

namespace py = pybind11;
using namespace echolab;

namespace {

// JSON crosses the boundary as text; json.loads on the Python side keeps this dependency-free.
py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

TimeGrid grid_from(const std::vector<double>& times) { return TimeGrid(times, true); }

DecayCurve curve_from(const std::vector<double>& times, const std::vector<double>& mean,
                      std::vector<double> stderr_) {
  DecayCurve c;
  c.grid = grid_from(times);
  c.mean = mean;
  c.raw_mean = mean;
  if (stderr_.empty()) stderr_.assign(mean.size(), 0.0);
  c.std_error = std::move(stderr_);
  c.validate();
  return c;
}

FitOptions fit_options(std::optional<std::pair<double, double>> window, bool subtract_plateau,
                       bool use_weights) {
  FitOptions o;
  if (window) o.window = FitWindow{window->first, window->second};
  o.subtract_plateau = subtract_plateau;
  o.use_weights = use_weights;
  return o;
}

}  // namespace

PYBIND11_MODULE(_echolab, m) {
  m.doc() = "OTOC, Loschmidt echo and inverted-oscillator numerics";
  m.attr("__version__") = code_version();

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream") = 0)
      .def("uniform", &RngStream::uniform)
      .def("normal", &RngStream::normal)
      .def("sign", &RngStream::sign)
      .def("next_u64", &RngStream::next_u64)
      .def_property_readonly_static("algorithm",
                                    [](py::object) { return std::string(RngStream::kAlgorithm); });

  py::class_<DecayCurve>(m, "DecayCurve")
      .def_property_readonly("t", [](const DecayCurve& c) { return c.grid.times(); })
      .def_readonly("mean", &DecayCurve::mean)
      .def_readonly("stderr", &DecayCurve::std_error)
      .def_readonly("raw_mean", &DecayCurve::raw_mean)
      .def_readonly("normalization", &DecayCurve::normalization)
      .def_readonly("normalized", &DecayCurve::normalized)
      .def_readonly("n_realizations", &DecayCurve::n_realizations)
      .def_readonly("label", &DecayCurve::label)
      .def_readonly("max_imag_residue", &DecayCurve::max_imag_residue)
      .def("complement", &DecayCurve::complement);

  // Linear algebra and ensembles.
  m.def(
      "eig_hermitian",
      [](const ComplexMatrix& h) {
        const EigenDecomposition d = eig_hermitian(HermitianOperator(h));
        return py::make_tuple(d.eigenvalues(), d.eigenvectors());
      },
      py::arg("h"));
  m.def("kron", &kron);
  m.def(
      "partial_trace",
      [](const ComplexMatrix& x, Index d_a, Index d_b, const std::string& over) {
        return partial_trace(x, BipartitePartition(d_a, d_b), over == "A" ? Subsystem::A : Subsystem::B);
      },
      py::arg("m"), py::arg("d_a"), py::arg("d_b"), py::arg("over"));
  m.def(
      "sample_gue", [](Index d, RngStream& rng) { return sample_gue(d, rng).matrix(); },
      py::arg("d"), py::arg("rng"));
  m.def(
      "sample_random_hermitian",
      [](Index d, RngStream& rng) { return sample_random_hermitian(d, rng).matrix(); },
      py::arg("d"), py::arg("rng"));
  m.def("sample_haar_unitary", &sample_haar_unitary, py::arg("d"), py::arg("rng"));
  m.def(
      "haar_average_conjugation",
      [](const ComplexMatrix& o, Index d_a, Index d_b, const std::string& over) {
        return haar_average_conjugation(o, BipartitePartition(d_a, d_b),
                                        over == "A" ? Subsystem::A : Subsystem::B);
      },
      py::arg("o"), py::arg("d_a"), py::arg("d_b"), py::arg("over") = "A");

  // Correlators.
  m.def(
      "otoc_regularized",
      [](const ComplexMatrix& h, const ComplexMatrix& a, const ComplexMatrix& b, double beta,
         const std::vector<double>& times, bool normalize) {
        return otoc_regularized(eig_hermitian(HermitianOperator(h)), a, b, beta, grid_from(times),
                                normalize);
      },
      py::arg("h"), py::arg("a"), py::arg("b"), py::arg("beta"), py::arg("times"),
      py::arg("normalize") = true);
  m.def(
      "otoc_haar_average",
      [](const ComplexMatrix& h, Index d_a, Index d_b, double beta, const std::vector<double>& times,
         bool normalize) {
        return otoc_haar_average(eig_hermitian(HermitianOperator(h)), BipartitePartition(d_a, d_b),
                                 beta, grid_from(times), normalize);
      },
      py::arg("h"), py::arg("d_a"), py::arg("d_b"), py::arg("beta"), py::arg("times"),
      py::arg("normalize") = true);
  m.def(
      "loschmidt_echo",
      [](const ComplexMatrix& h, const ComplexMatrix& v1, const ComplexMatrix& v2, double beta,
         const std::vector<double>& times) {
        return loschmidt_echo(HermitianOperator(h), HermitianOperator(v1), HermitianOperator(v2),
                              beta, grid_from(times));
      },
      py::arg("h"), py::arg("v1"), py::arg("v2"), py::arg("beta"), py::arg("times"));

  // Inverted oscillators.
  py::class_<IhoParams>(m, "IhoParams")
      .def(py::init<>())
      .def_readwrite("m1", &IhoParams::m1)
      .def_readwrite("m2", &IhoParams::m2)
      .def_readwrite("omega1", &IhoParams::omega1)
      .def_readwrite("omega2", &IhoParams::omega2)
      .def_readwrite("delta", &IhoParams::delta)
      .def_readwrite("inverted1", &IhoParams::inverted1)
      .def_readwrite("inverted2", &IhoParams::inverted2);
  m.def(
      "iho_otoc", [](const IhoParams& p, const std::vector<double>& t) { return iho_otoc(p, grid_from(t)); },
      py::arg("params"), py::arg("times"));
  m.def(
      "iho_le_m1",
      [](const IhoParams& p, const std::vector<double>& t) { return iho_le_exact(p, grid_from(t)).m1; },
      py::arg("params"), py::arg("times"));
  m.def(
      "iho_le_bch",
      [](const IhoParams& p, const std::vector<double>& t) { return iho_le_bch(p, grid_from(t)).m1; },
      py::arg("params"), py::arg("times"));

  // Fits return the same dictionaries that land in manifests.
  auto bind_fit = [&m](const char* name, DecayFit (*fn)(const DecayCurve&, const FitOptions&)) {
    m.def(
        name,
        [fn](const std::vector<double>& t, const std::vector<double>& mean,
             const std::vector<double>& stderr_, std::optional<std::pair<double, double>> window,
             bool subtract_plateau, bool use_weights) {
          return to_py(fit_to_json(
              fn(curve_from(t, mean, stderr_), fit_options(window, subtract_plateau, use_weights))));
        },
        py::arg("t"), py::arg("mean"), py::arg("stderr") = std::vector<double>{},
        py::arg("window") = py::none(), py::arg("subtract_plateau") = true,
        py::arg("use_weights") = true);
  };
  bind_fit("fit_exponential", fit_exponential);
  bind_fit("fit_gaussian", fit_gaussian);
  bind_fit("fit_early_growth", fit_early_growth);
  bind_fit("model_select", model_select);
  m.def(
      "fit_rate_law",
      [](const std::vector<std::pair<double, double>>& pts) { return to_py(fit_to_json(fit_rate_law(pts))); },
      py::arg("points"));

  // Runner.
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_static("from_file", &load_config)
      .def_static("from_string", &load_config_string)
      .def("set", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        set_config_value(c, k, v);
      })
      .def("validate", &ExperimentConfig::validate)
      .def("hash", &ExperimentConfig::hash)
      .def("to_dict", [](const ExperimentConfig& c) { return to_py(c.to_json()); })
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir);
  m.def(
      "compute_experiment",
      [](const ExperimentConfig& c) {
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = compute_experiment(c);
        }
        py::dict curves;
        for (auto& curve : r.curves) curves[py::str(curve.label)] = curve;
        return py::make_tuple(curves, to_py(r.extra));
      },
      py::arg("config"));
  m.def(
      "run_experiment", [](const ExperimentConfig& c) { return to_py(run_experiment(c).to_json()); },
      py::arg("config"));
  m.def(
      "sweep",
      [](const ExperimentConfig& c, const std::string& p, const std::vector<double>& v) {
        return to_py(sweep(c, p, v).to_json());
      },
      py::arg("config"), py::arg("parameter"), py::arg("values"));
  m.def("read_curve_csv", &read_curve_csv, py::arg("path"));
}
