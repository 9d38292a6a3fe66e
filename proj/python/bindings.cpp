#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "proxi/errors.hpp"
#include "proxi/evaluation.hpp"
#include "proxi/synthdata.hpp"
#include "proxi/version.hpp"

namespace py = pybind11;
using namespace proxi;

namespace {

py::dict to_dict(const Dataset& d) {
  py::dict out;
  out["a"] = d.a;
  out["x"] = d.x;
  out["z"] = d.z;
  out["w"] = d.w;
  out["y"] = d.y;
  return out;
}

Dataset from_arrays(const Matrix& a, const Matrix& z, const Matrix& w, const Vector& y,
                    const std::optional<Matrix>& x) {
  Dataset d{a, x ? *x : Matrix(a.rows(), 0), z, w, y};
  d.validate();
  return d;
}

}  // namespace

PYBIND11_MODULE(_proxi, m) {
  m.doc() = "Kernel proxy-variable estimators";
  m.attr("__version__") = std::string(kVersion);

  static py::exception<Error> base(m, "ProxiError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(base, (std::string(e.kind()) + ": " + e.what()).c_str());
    }
  });

  m.def("methods", [] {
    std::vector<std::string> names;
    for (auto method : eval::all_methods()) names.push_back(eval::to_string(method));
    return names;
  });

  m.def("gen_main", [](Eigen::Index n, std::uint64_t seed) {
    auto draw = synth::gen_main(n, seed);
    py::dict out = to_dict(draw.data);
    out["u"] = draw.u;
    return out;
  }, py::arg("n"), py::arg("seed") = 0);

  m.def("gen_discrete_toy", [](Eigen::Index n, std::uint64_t seed) {
    auto toy = synth::gen_discrete_toy(synth::two_state_toy(), n, seed);
    py::dict out = to_dict(toy.data);
    out["bridge"] = toy.bridge;
    out["do_mean"] = toy.do_mean;
    out["levels"] = toy.levels;
    return out;
  }, py::arg("n"), py::arg("seed") = 0);

  m.def("default_a_grid", &synth::default_a_grid);

  m.def("true_ate", [](const Vector& a_grid, Eigen::Index samples, std::uint64_t seed) {
    return synth::true_ate(a_grid, samples, seed).estimate;
  }, py::arg("a_grid"), py::arg("samples") = synth::kTruthSamples, py::arg("seed") = synth::kOracleSeed);

  m.def("estimate", [](const std::string& method, const Matrix& a, const Matrix& z, const Matrix& w,
                       const Vector& y, const Vector& a_grid, const std::optional<Matrix>& x,
                       std::uint64_t seed) {
    const Dataset data = from_arrays(a, z, w, y, x);
    eval::ExperimentConfig config;
    std::map<std::string, double> hyper;
    DoCurve curve;
    {
      py::gil_scoped_release release;
      curve = eval::run_method(eval::parse_method(method), data, a_grid, config, seed, &hyper);
    }
    return py::make_tuple(curve.estimate, hyper);
  }, py::arg("method"), py::arg("a"), py::arg("z"), py::arg("w"), py::arg("y"), py::arg("a_grid"),
     py::arg("x") = py::none(), py::arg("seed") = 0,
     "Select hyperparameters, fit and return (curve, hyperparameters).");

  m.def("cmae", [](const Vector& grid, const Vector& estimate, const Vector& truth) {
    return eval::cmae(DoCurve{grid, estimate, std::nullopt}, DoCurve{grid, truth, std::nullopt});
  });
}
