#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ptwell/control_law.hpp"
#include "ptwell/dynamics.hpp"
#include "ptwell/errors.hpp"
#include "ptwell/run_io.hpp"

namespace py = pybind11;
using namespace ptwell;

PYBIND11_MODULE(ptwell, m) {
    m.doc() = "Four-well Bose-Hubbard dynamics with feedback-controlled "
              "tunnelling rates and onsite energies (well indices are 0-based)";

    py::register_exception<CapacityError>(m, "CapacityError");
    py::register_exception<ControlDivergedError>(m, "ControlDivergedError");
    py::register_exception<CollapseDetected>(m, "CollapseDetected");
    py::register_exception<PureStateDegeneracy>(m, "PureStateDegeneracy");
    py::register_exception<EmptySubsetError>(m, "EmptySubsetError");
    py::register_exception<SeedNormError>(m, "SeedNormError");
    py::register_exception<BrokenPTRegimeError>(m, "BrokenPTRegimeError");
    py::register_exception<ConstraintSolveError>(m, "ConstraintSolveError");
    py::register_exception<ConfigError>(m, "ConfigError");

    py::class_<FockBasis, std::shared_ptr<FockBasis>>(m, "FockBasis")
        .def_property_readonly("dimension", &FockBasis::dimension)
        .def_property_readonly("wells", &FockBasis::wells)
        .def_property_readonly("n_total", &FockBasis::n_total)
        .def("state", &FockBasis::state)
        .def("index_of", &FockBasis::index_of)
        .def("__len__", &FockBasis::dimension);

    m.def("build_basis", &build_basis, py::arg("n_total"), py::arg("wells"),
          py::arg("max_dimension") = FockBasis::kDefaultMaxDimension);

    py::class_<ManyBodyState>(m, "ManyBodyState")
        .def(py::init([](std::shared_ptr<FockBasis> basis, const Vector& amplitudes) {
                 return ManyBodyState(std::move(basis), amplitudes);
             }),
             py::arg("basis"), py::arg("amplitudes"))
        .def_property_readonly("amplitudes",
                               [](const ManyBodyState& s) { return s.amplitudes; })
        .def_property_readonly("basis", [](const ManyBodyState& s) { return s.basis; })
        .def("norm", &ManyBodyState::norm)
        .def("normalized", [](const ManyBodyState& s) {
            ManyBodyState out = s;
            out.normalize();
            return out;
        });

    m.def("apply_hop", &apply_hop, py::arg("state"), py::arg("k"), py::arg("l"));
    m.def("apply_number", &apply_number, py::arg("state"), py::arg("k"));

    py::class_<ControlParams>(m, "ControlParams")
        .def(py::init<>())
        .def_readwrite("j12", &ControlParams::j12)
        .def_readwrite("j34", &ControlParams::j34)
        .def_readwrite("eps1", &ControlParams::eps1)
        .def_readwrite("eps4", &ControlParams::eps4)
        .def_readwrite("j23", &ControlParams::j23)
        .def_readwrite("u", &ControlParams::u);

    m.def("apply_hamiltonian", &apply_hamiltonian, py::arg("state"), py::arg("params"));
    m.def("expectation", &expectation, py::arg("state"), py::arg("params"));

    py::class_<DensityMoments>(m, "DensityMoments")
        .def_static("compute", &DensityMoments::compute)
        .def_readonly("sigma1", &DensityMoments::sigma1)
        .def("occupation", &DensityMoments::occupation)
        .def("current", &DensityMoments::current)
        .def("correlation", &DensityMoments::correlation);

    m.def("single_particle_matrix", &single_particle_matrix);
    m.def("two_particle_element", &two_particle_element, py::arg("state"), py::arg("k"),
          py::arg("l"), py::arg("m"), py::arg("n"));
    m.def("purity", &purity, py::arg("sigma1"), py::arg("wells_subset"));
    m.def("bbgky_first_order_rhs", &bbgky_first_order_rhs, py::arg("moments"),
          py::arg("params"));
    m.def(
        "evaluate_controls",
        [](const DensityMoments& moments, double gamma, double j23, double u, int n_total) {
            return evaluate_controls(moments, gamma, j23, u, default_thresholds(n_total));
        },
        py::arg("moments"), py::arg("gamma"), py::arg("j23"), py::arg("u"),
        py::arg("n_total"));

    py::class_<TwoModeTarget>(m, "TwoModeTarget")
        .def_readonly("gamma", &TwoModeTarget::gamma)
        .def_readonly("j", &TwoModeTarget::j)
        .def_readonly("n", &TwoModeTarget::n)
        .def_property_readonly("phi", &TwoModeTarget::phi)
        .def_property_readonly("current", &TwoModeTarget::current)
        .def_property_readonly("correlation", &TwoModeTarget::correlation)
        .def("eigenstate", &TwoModeTarget::eigenstate);
    m.def("target_from", &target_from, py::arg("gamma"), py::arg("j"), py::arg("n"),
          py::arg("g") = 0.0);
    m.def("verify_stationarity", &verify_stationarity);

    py::class_<MeanFieldSeed>(m, "MeanFieldSeed")
        .def_static("from_target", &MeanFieldSeed::from_target, py::arg("target"),
                    py::arg("n1_0"), py::arg("n4_0"))
        .def_readonly("psi", &MeanFieldSeed::psi)
        .def_readonly("phi", &MeanFieldSeed::phi);

    m.def(
        "product_state",
        [](const std::vector<Complex>& psi, const std::shared_ptr<FockBasis>& basis) {
            return product_state(psi, basis);
        },
        py::arg("psi"), py::arg("basis"));
    m.def(
        "perturb",
        [](const ManyBodyState& state, double variance, std::uint64_t seed,
           bool complex_multipliers) {
            return perturb(state, {variance, seed, complex_multipliers});
        },
        py::arg("state"), py::arg("variance"), py::arg("seed"),
        py::arg("complex_multipliers") = true);
    m.def(
        "constraint_residuals",
        [](const Matrix& sigma1, const TwoModeTarget& target) {
            return constraint_residuals(sigma1, target).r;
        },
        py::arg("sigma1"), py::arg("target"));
    m.def(
        "project_constraints",
        [](const ManyBodyState& state, const TwoModeTarget& target) {
            auto [projected, residuals] = project_constraints(state, target);
            return py::make_tuple(projected, residuals.r);
        },
        py::arg("state"), py::arg("target"));

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("n_total", &RunConfig::n_total)
        .def_readwrite("gamma", &RunConfig::gamma)
        .def_readwrite("j", &RunConfig::j)
        .def_readwrite("u", &RunConfig::u)
        .def_readwrite("d", &RunConfig::d)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("n", &RunConfig::n)
        .def_readwrite("n1_0", &RunConfig::n1_0)
        .def_readwrite("n4_0", &RunConfig::n4_0)
        .def_readwrite("dt_initial", &RunConfig::dt_initial)
        .def_readwrite("t_max", &RunConfig::t_max)
        .def_readwrite("sample_interval", &RunConfig::sample_interval)
        .def_readwrite("integrator_tol", &RunConfig::integrator_tol)
        .def("validate", &RunConfig::validate);

    py::class_<Sample>(m, "Sample")
        .def_readonly("t", &Sample::t)
        .def_readonly("controls", &Sample::controls)
        .def_readonly("norm", &Sample::norm)
        .def_property_readonly("occupations",
                               [](const Sample& s) { return s.first_order.occupations; })
        .def_property_readonly("currents",
                               [](const Sample& s) { return s.first_order.currents; })
        .def_property_readonly("correlations",
                               [](const Sample& s) { return s.first_order.correlations; })
        .def_property_readonly("purity2",
                               [](const Sample& s) { return s.first_order.purity2; })
        .def_property_readonly("purity4",
                               [](const Sample& s) { return s.first_order.purity4; });

    py::class_<RunRecord>(m, "RunRecord")
        .def_readonly("samples", &RunRecord::samples)
        .def_property_readonly(
            "termination", [](const RunRecord& r) { return to_string(r.termination); })
        .def_readonly("termination_time", &RunRecord::termination_time)
        .def_property_readonly(
            "collapse_time",
            [](const RunRecord& r) -> py::object {
                if (auto t = r.collapse_time()) return py::float_(*t);
                return py::none();
            })
        .def_property_readonly(
            "constraint_residuals",
            [](const RunRecord& r) { return r.initial_residuals.r; })
        .def_readonly("initial_purity2", &RunRecord::initial_purity2)
        .def_readonly("initial_purity4", &RunRecord::initial_purity4)
        .def_readonly("error_message", &RunRecord::error_message);

    m.def("run", &run, py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("parse_config_text", &parse_config_text);
    m.def("parse_config_file", &parse_config_file);
    m.def("format_timeseries_csv", &format_timeseries_csv);
    m.attr("__version__") = kVersion;
}
