#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svstab/harness.hpp"
#include "svstab/io.hpp"
#include "svstab/lyapunov.hpp"
#include "svstab/simulate.hpp"
#include "svstab/spectrum.hpp"

namespace py = pybind11;
using namespace svstab;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Steady states, Lyapunov certificates and IMEX simulation of the linearized "
              "viscous Saint-Venant equations";

    py::class_<PhysicalParams>(m, "PhysicalParams")
        .def(py::init([](double g, double mu, double kappa, double L) {
                 PhysicalParams p{g, mu, kappa, L};
                 p.validate();
                 return p;
             }),
             py::arg("g") = 9.81, py::arg("mu") = 1e-3, py::arg("kappa") = 2e-3,
             py::arg("L") = 1000.0)
        .def_readwrite("g", &PhysicalParams::g)
        .def_readwrite("mu", &PhysicalParams::mu)
        .def_readwrite("kappa", &PhysicalParams::kappa)
        .def_readwrite("L", &PhysicalParams::L);

    py::class_<Grid>(m, "Grid")
        .def_static("uniform", &Grid::uniform, py::arg("L"), py::arg("n"))
        .def_readonly("n", &Grid::n)
        .def_readonly("dx", &Grid::dx)
        .def_readonly("x", &Grid::x);

    py::class_<StateVector>(m, "StateVector")
        .def(py::init([](std::vector<double> h, std::vector<double> v) {
                 if (h.size() != v.size())
                     throw std::invalid_argument("h and v must have the same length");
                 return StateVector{std::move(h), std::move(v)};
             }),
             py::arg("h"), py::arg("v"))
        .def_static("zero", &StateVector::zero, py::arg("n"))
        .def_readwrite("h", &StateVector::h)
        .def_readwrite("v", &StateVector::v);

    py::class_<BoundaryCoeffs>(m, "BoundaryCoeffs")
        .def(py::init([](double b0, double b1, double c1) {
                 BoundaryCoeffs bc{b0, b1, c1};
                 bc.validate();
                 return bc;
             }),
             py::arg("b0"), py::arg("b1"), py::arg("c1"))
        .def_readwrite("b0", &BoundaryCoeffs::b0)
        .def_readwrite("b1", &BoundaryCoeffs::b1)
        .def_readwrite("c1", &BoundaryCoeffs::c1);

    m.def("friction", &friction, py::arg("H"), py::arg("V"), py::arg("params"));
    m.def("friction_tilde", &friction_tilde, py::arg("V"), py::arg("Q0"), py::arg("params"));
    m.def("l2_norm", &l2_norm, py::arg("y"), py::arg("grid"));

    py::class_<SteadyState>(m, "SteadyState")
        .def_readonly("grid", &SteadyState::grid)
        .def_readonly("H", &SteadyState::Hs)
        .def_readonly("V", &SteadyState::Vs)
        .def_readonly("Vx", &SteadyState::Vsx)
        .def_readonly("Vxx", &SteadyState::Vsxx)
        .def_readonly("Hx", &SteadyState::Hsx)
        .def_readonly("Hxx", &SteadyState::Hsxx)
        .def_readonly("Gamma", &SteadyState::Gamma)
        .def_readonly("Q0", &SteadyState::Q0)
        .def_readonly("C0", &SteadyState::C0);

    m.def("solve_steady",
          [](const PhysicalParams& p, double H0, double V0, const Grid& g) {
              return solve_steady(p, H0, V0, g);
          },
          py::arg("params"), py::arg("H0"), py::arg("V0"), py::arg("grid"));

    py::class_<AsymptoticsReport>(m, "AsymptoticsReport")
        .def_readonly("R1", &AsymptoticsReport::R1)
        .def_readonly("R2", &AsymptoticsReport::R2)
        .def_readonly("R3", &AsymptoticsReport::R3);
    m.def("verify_asymptotics", &verify_asymptotics, py::arg("steady"), py::arg("params"));
    m.def("check_subcritical", &check_subcritical, py::arg("steady"), py::arg("params"));
    m.def("check_assumption_nearcritical", &check_assumption_nearcritical, py::arg("steady"),
          py::arg("params"));

    py::class_<LinearizedSystem>(m, "LinearizedSystem")
        .def_property_readonly("bc", [](const LinearizedSystem& s) { return s.bc; })
        .def_property_readonly("A11", [](const LinearizedSystem& s) { return s.A.m11; });
    m.def("build_linear_system", &build_linear_system, py::arg("steady"), py::arg("params"),
          py::arg("bc"));
    m.def("apply_operator", &apply_operator, py::arg("system"), py::arg("y"));

    py::class_<LyapunovWeights>(m, "LyapunovWeights")
        .def_readonly("q1", &LyapunovWeights::q1)
        .def_readonly("q2", &LyapunovWeights::q2);
    m.def("build_weights", &build_weights, py::arg("steady"), py::arg("params"));
    m.def("evaluate_W", &evaluate_W, py::arg("y"), py::arg("weights"), py::arg("grid"));

    py::class_<CoefficientIntervals>(m, "CoefficientIntervals")
        .def_readonly("b0_lo", &CoefficientIntervals::b0_lo)
        .def_readonly("b0_hi", &CoefficientIntervals::b0_hi)
        .def_readonly("b1_lo", &CoefficientIntervals::b1_lo)
        .def_readonly("b1_hi", &CoefficientIntervals::b1_hi)
        .def_readonly("c1_lo", &CoefficientIntervals::c1_lo)
        .def_readonly("c1_hi", &CoefficientIntervals::c1_hi)
        .def_readonly("c1mu_lo", &CoefficientIntervals::c1mu_lo)
        .def_readonly("c1mu_hi", &CoefficientIntervals::c1mu_hi);
    m.def("coefficient_intervals", &coefficient_intervals, py::arg("steady"), py::arg("params"),
          py::arg("b1"));

    py::class_<StabilityFlags>(m, "StabilityFlags")
        .def_readonly("subcritical", &StabilityFlags::subcritical)
        .def_readonly("assumption15", &StabilityFlags::assumption15)
        .def_readonly("b0_in_range", &StabilityFlags::b0_in_range)
        .def_readonly("b1_admissible", &StabilityFlags::b1_admissible)
        .def_readonly("c1_in_range", &StabilityFlags::c1_in_range)
        .def_readonly("interior_negdef", &StabilityFlags::interior_negdef)
        .def_readonly("boundary_negdef", &StabilityFlags::boundary_negdef)
        .def_readonly("certified", &StabilityFlags::certified);

    py::class_<StabilityReport>(m, "StabilityReport")
        .def_readonly("intervals", &StabilityReport::intervals)
        .def_property_readonly("gamma_cert",
                               [](const StabilityReport& r) -> py::object {
                                   if (r.gamma_cert) return py::float_(*r.gamma_cert);
                                   return py::none();
                               })
        .def_readonly("detD_min", &StabilityReport::detD_min)
        .def_readonly("flags", &StabilityReport::flags)
        .def_readonly("bc", &StabilityReport::bc)
        .def_readonly("subcritical_margin", &StabilityReport::subcritical_margin)
        .def("to_json", [](const StabilityReport& r) { return stability_report_json(r); });
    m.def("check_stability", &check_stability, py::arg("steady"), py::arg("params"), py::arg("bc"));

    py::class_<SimulationConfig>(m, "SimulationConfig")
        .def(py::init([](double dt, double T, std::size_t stride, StateVector initial) {
                 SimulationConfig c;
                 c.dt = dt;
                 c.T = T;
                 c.snapshot_stride = stride;
                 c.initial = std::move(initial);
                 return c;
             }),
             py::arg("dt"), py::arg("T"), py::arg("snapshot_stride"), py::arg("initial"))
        .def_readwrite("dt", &SimulationConfig::dt)
        .def_readwrite("T", &SimulationConfig::T);

    py::class_<SimulationTrace>(m, "SimulationTrace")
        .def_readonly("times", &SimulationTrace::times)
        .def_readonly("l2", &SimulationTrace::l2)
        .def_readonly("W", &SimulationTrace::W)
        .def_readonly("gamma_fit", &SimulationTrace::gamma_fit)
        .def_readonly("has_fit", &SimulationTrace::has_fit);
    m.def("simulate", &simulate, py::arg("system"), py::arg("config"));
    m.def("imex_step", &imex_step, py::arg("system"), py::arg("y"), py::arg("dt"));
    m.def("lyapunov_monotonicity", &lyapunov_monotonicity, py::arg("trace"));

    py::class_<SpectrumReport>(m, "SpectrumReport")
        .def_readonly("eigenvalues", &SpectrumReport::eigenvalues)
        .def_readonly("max_real", &SpectrumReport::max_real)
        .def_readonly("n_used", &SpectrumReport::n_used);
    m.def("spectrum", &spectrum, py::arg("system"));

    py::register_exception<OmegaExitError>(m, "OmegaExitError", PyExc_RuntimeError);
    py::register_exception<SimulationDivergedError>(m, "SimulationDivergedError",
                                                    PyExc_RuntimeError);
}
