#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cpdkit/conditioning.hpp"
#include "cpdkit/diagnostics.hpp"
#include "cpdkit/experiments.hpp"
#include "cpdkit/generators.hpp"
#include "cpdkit/io.hpp"
#include "cpdkit/solver.hpp"

namespace py = pybind11;
using namespace cpdkit;

namespace {

DenseTensor tensor_from_array(const py::array_t<double, py::array::f_style | py::array::forcecast>& arr) {
  std::vector<Index> shape(arr.ndim());
  for (py::ssize_t i = 0; i < arr.ndim(); ++i) shape[i] = arr.shape(i);
  Vector data(arr.size());
  std::copy(arr.data(), arr.data() + arr.size(), data.data());
  return DenseTensor(std::move(shape), std::move(data));
}

py::array_t<double> tensor_to_array(const DenseTensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  std::vector<py::ssize_t> strides(shape.size());
  py::ssize_t s = sizeof(double);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    strides[i] = s;
    s *= shape[i];
  }
  return py::array_t<double>(shape, strides, t.data().data());
}

}  // namespace

PYBIND11_MODULE(_cpdkit, m) {
  m.doc() = "Dense CP decomposition toolkit: ALS, AMDM, and General-AMDM solvers";

  py::class_<DenseTensor>(m, "DenseTensor")
      .def(py::init(&tensor_from_array), py::arg("array"))
      .def_property_readonly("shape", [](const DenseTensor& t) { return t.shape(); })
      .def_property_readonly("order", &DenseTensor::order)
      .def("to_numpy", &tensor_to_array)
      .def("norm", &DenseTensor::norm)
      .def("__repr__", [](const DenseTensor& t) {
        std::string s = "DenseTensor(shape=[";
        for (std::size_t i = 0; i < t.shape().size(); ++i)
          s += (i ? "," : "") + std::to_string(t.shape()[i]);
        return s + "])";
      });

  py::class_<KruskalModel>(m, "KruskalModel")
      .def(py::init<Vector, std::vector<Matrix>>(), py::arg("weights"), py::arg("factors"))
      .def_readwrite("weights", &KruskalModel::lambda)
      .def_readwrite("factors", &KruskalModel::factors)
      .def_property_readonly("rank", &KruskalModel::rank)
      .def_property_readonly("order", &KruskalModel::order);

  // tensor kernels
  m.def("matricize", &matricize, py::arg("tensor"), py::arg("mode"));
  m.def(
      "tensorize",
      [](const Matrix& mtx, const std::vector<Index>& shape, Index mode) {
        return tensorize(mtx, shape, mode);
      },
      py::arg("matrix"), py::arg("shape"), py::arg("mode"));
  m.def("khatri_rao", py::overload_cast<const std::vector<Matrix>&>(&khatri_rao),
        py::arg("matrices"));
  m.def("hadamard", &hadamard, py::arg("a"), py::arg("b"));
  m.def("mttkrp", &mttkrp, py::arg("tensor"), py::arg("factors"), py::arg("mode"));
  m.def("multilinear_eval", &multilinear_eval, py::arg("tensor"), py::arg("vectors"));
  m.def("multimode_transform", &multimode_transform, py::arg("tensor"), py::arg("maps"));
  m.def("inner", &inner, py::arg("a"), py::arg("b"));

  // linear algebra kernels
  py::class_<ThinSVD>(m, "ThinSVD")
      .def_readonly("u", &ThinSVD::u)
      .def_readonly("s", &ThinSVD::s)
      .def_readonly("v", &ThinSVD::v);
  m.def("thin_svd", &thin_svd, py::arg("matrix"));
  m.def("pseudoinverse", &pseudoinverse, py::arg("matrix"), py::arg("rel_tol") = 1e-12);
  m.def("normalize_columns", &normalize_columns, py::arg("matrix"));
  m.def("solve_gram_system", &solve_gram_system, py::arg("z"), py::arg("rhs"));
  m.def("orthonormal_complement", &orthonormal_complement, py::arg("unit_vector"));
  m.def("column_space_basis", &column_space_basis, py::arg("matrix"));

  // model operations
  m.def("reconstruct", &reconstruct, py::arg("model"));
  m.def("residual_and_fitness", &residual_and_fitness, py::arg("model"), py::arg("tensor"));
  m.def("residual_and_fitness_gram", &residual_and_fitness_gram, py::arg("model"),
        py::arg("tensor"));
  m.def("normalize_model", &normalize_model, py::arg("model"));
  m.def("factor_recovery_error", &factor_recovery_error, py::arg("model"), py::arg("reference"));

  // solver configuration and driver
  py::enum_<Algorithm>(m, "Algorithm")
      .value("als", Algorithm::als)
      .value("amdm", Algorithm::amdm)
      .value("general", Algorithm::general);

  py::class_<ThresholdSchedule>(m, "ThresholdSchedule")
      .def_static("fixed", &ThresholdSchedule::fixed, py::arg("t"))
      .def_static("decay", &ThresholdSchedule::decay, py::arg("t0"), py::arg("period"))
      .def_static("relative", &ThresholdSchedule::relative, py::arg("tau"));

  py::enum_<TraceGranularity>(m, "TraceGranularity")
      .value("per_sweep", TraceGranularity::per_sweep)
      .value("per_subsweep", TraceGranularity::per_subsweep);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("algorithm", &SolverConfig::algorithm)
      .def_readwrite("rank", &SolverConfig::rank)
      .def_readwrite("max_sweeps", &SolverConfig::max_sweeps)
      .def_readwrite("tol_change", &SolverConfig::tol_change)
      .def_readwrite("tol_resid", &SolverConfig::tol_resid)
      .def_readwrite("schedule", &SolverConfig::schedule)
      .def_readwrite("pinv_rel_tol", &SolverConfig::pinv_rel_tol)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_readwrite("granularity", &SolverConfig::granularity)
      .def_readwrite("trace_condition", &SolverConfig::trace_condition);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("sweep", &TraceRecord::sweep)
      .def_readonly("mode", &TraceRecord::mode)
      .def_readonly("residual", &TraceRecord::residual)
      .def_readonly("fitness", &TraceRecord::fitness)
      .def_readonly("cond", &TraceRecord::cond)
      .def_readonly("delta", &TraceRecord::delta)
      .def_readonly("threshold", &TraceRecord::threshold)
      .def_readonly("seconds", &TraceRecord::seconds);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("model", &RunResult::model)
      .def_readonly("trace", &RunResult::trace)
      .def_readonly("converged", &RunResult::converged)
      .def_readonly("aborted", &RunResult::aborted)
      .def_readonly("abort_reason", &RunResult::abort_reason)
      .def_readonly("sweeps_run", &RunResult::sweeps_run);

  m.def("run", &run, py::arg("tensor"), py::arg("config"),
        py::arg("init") = std::optional<KruskalModel>());
  m.def("pseudo_spectrum", &pseudo_spectrum, py::arg("singular_values"), py::arg("t"));

  // condition numbers
  m.def("terracini_matrix", &terracini_matrix, py::arg("model"));
  m.def("condition_number_direct", &condition_number_direct, py::arg("model"));
  m.def("condition_number_compressed", &condition_number_compressed, py::arg("model"));
  m.def("condition_number", &condition_number, py::arg("model"));

  // generators
  m.def("random_cp", &random_cp, py::arg("shape"), py::arg("rank"), py::arg("seed"));
  m.def("collinear_cp", &collinear_cp, py::arg("shape"), py::arg("rank"),
        py::arg("collinearity"), py::arg("seed"));
  m.def("add_gaussian_noise", &add_gaussian_noise, py::arg("tensor"), py::arg("sigma"),
        py::arg("seed"));
  m.def("planted_orthogonal_cp", &planted_orthogonal_cp, py::arg("shape"), py::arg("rank_full"),
        py::arg("eps_perp"), py::arg("seed"));
  m.def("perturb_model", &perturb_model, py::arg("model"), py::arg("eps"), py::arg("seed"));

  // diagnostics
  m.def("theoretical_rate", &theoretical_rate, py::arg("order"));
  py::class_<RateEstimate>(m, "RateEstimate")
      .def_readonly("alpha", &RateEstimate::alpha)
      .def_readonly("window", &RateEstimate::window)
      .def_readonly("fit_residual", &RateEstimate::fit_residual);
  m.def("empirical_order", &empirical_order, py::arg("errors"));
  m.def("stationarity_residual", &stationarity_residual, py::arg("model"), py::arg("tensor"));
  m.def("orthonormality_defect", &orthonormality_defect, py::arg("model"), py::arg("tensor"));
  m.def("spectral_diagonalization_defect", &spectral_diagonalization_defect, py::arg("model"),
        py::arg("tensor"));
  py::class_<SingularTuple>(m, "SingularTuple")
      .def_readonly("sigma", &SingularTuple::sigma)
      .def_readonly("vectors", &SingularTuple::vectors)
      .def_readonly("sweeps", &SingularTuple::sweeps);
  m.def("rank1_singular_tuple", &rank1_singular_tuple, py::arg("tensor"), py::arg("config"));
  m.def("backward_error", &backward_error, py::arg("model"), py::arg("tensor"), py::arg("mode"),
        py::arg("probe"));

  // file formats shared with the CLI
  m.def("write_tensor", &write_tensor, py::arg("path"), py::arg("tensor"));
  m.def("read_tensor", &read_tensor, py::arg("path"));
  m.def("write_model", &write_model, py::arg("prefix"), py::arg("model"));
  m.def("read_model", &read_model, py::arg("prefix"));
}
