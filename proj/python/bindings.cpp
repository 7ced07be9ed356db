#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "biphos/continuation.hpp"
#include "biphos/integrate.hpp"
#include "biphos/model.hpp"
#include "biphos/params.hpp"
#include "biphos/phase.hpp"
#include "biphos/rng.hpp"
#include "biphos/stochastic.hpp"

namespace py = pybind11;
using namespace biphos;

#ifndef BIPHOS_VERSION
#define BIPHOS_VERSION "0.0.0"
#endif

PYBIND11_MODULE(_core, m) {
    m.doc() = "Numerical workbench for the bistable-phosphorylation / "
              "nucleocytoplasmic transport model: deterministic and stochastic "
              "integration, phase-plane analysis, continuation, and "
              "noise-robustness statistics.";
    m.attr("__version__") = BIPHOS_VERSION;

    // --- parameters and configs -------------------------------------------
    py::class_<Params>(m, "Params")
        .def(py::init<>())
        .def_readwrite("k_vn", &Params::k_vn)
        .def_readwrite("k_vcy", &Params::k_vcy)
        .def_readwrite("k_nt", &Params::k_nt)
        .def_readwrite("K_c", &Params::K_c)
        .def_readwrite("tau", &Params::tau)
        .def_readwrite("A_cyto", &Params::A_cyto)
        .def_readwrite("A_n", &Params::A_n)
        .def_readwrite("m", &Params::m)
        .def_readwrite("m_sca", &Params::m_sca)
        .def_readwrite("sigma", &Params::sigma)
        .def_readwrite("use_piecewise_fsca", &Params::use_piecewise_fsca)
        .def("validate", &Params::validate)
        .def("__repr__",
             [](const Params& p) { return "Params(\n" + params_to_config(p) + ")"; });

    m.def("params_from_config", &params_from_config, py::arg("text"),
          "Parse a `key = value` config string into Params.");
    m.def("params_from_config_file", &params_from_config_file, py::arg("path"));
    m.def("params_to_config", &params_to_config, py::arg("params"),
          "Round-trip serialization, one `key = value` per line.");
    m.def("apply_param_assignment", &apply_param_assignment, py::arg("params"),
          py::arg("assignment"), "Apply one KEY=VALUE override in place.");

    // --- model evaluations --------------------------------------------------
    m.def("rhs_reduced", &rhs_reduced, py::arg("x"), py::arg("params"));
    m.def("jacobian_reduced",
          [](const Vec2& x, const Params& p) { return jacobian_reduced(x, p); },
          py::arg("x"), py::arg("params"));
    m.def("rhs_full", &rhs_full, py::arg("x"), py::arg("params"));
    m.def("make_consistent_full_state", &make_consistent_full_state, py::arg("c_no"),
          py::arg("c_nop"), py::arg("params"), py::arg("c_ni") = 0.0,
          py::arg("Phi") = 1.0, py::arg("V_cyto") = 1.0);
    m.def("quasi_steady_fractions", &quasi_steady_fractions, py::arg("total"),
          py::arg("params"),
          "All quasi-steady phosphorylated fractions at a fixed total.");
    m.def("phospho_fraction", &phospho_fraction, py::arg("state"));

    // --- integration ---------------------------------------------------------
    py::class_<Trajectory::Meta>(m, "TrajectoryMeta")
        .def_readonly("solver", &Trajectory::Meta::solver)
        .def_readonly("rel_tol", &Trajectory::Meta::rel_tol)
        .def_readonly("abs_tol", &Trajectory::Meta::abs_tol)
        .def_readonly("dt", &Trajectory::Meta::dt)
        .def_readonly("stochastic", &Trajectory::Meta::stochastic)
        .def_readonly("seed", &Trajectory::Meta::seed)
        .def_readonly("negative_excursions", &Trajectory::Meta::negative_excursions)
        .def_readonly("n_accepted", &Trajectory::Meta::n_accepted)
        .def_readonly("n_rejected", &Trajectory::Meta::n_rejected);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("states", &Trajectory::states)
        .def_readonly("meta", &Trajectory::meta)
        .def("column", &Trajectory::column, py::arg("j"));

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("rel_tol", &SolverConfig::rel_tol)
        .def_readwrite("abs_tol", &SolverConfig::abs_tol)
        .def_readwrite("dt", &SolverConfig::dt)
        .def_readwrite("t_end", &SolverConfig::t_end)
        .def_readwrite("max_steps", &SolverConfig::max_steps)
        .def_readwrite("output_times", &SolverConfig::output_times)
        .def_static("uniform_grid", &SolverConfig::uniform_grid, py::arg("t_end"),
                    py::arg("out_dt"));

    m.def("integrate_reduced", &integrate_reduced, py::arg("params"), py::arg("x0"),
          py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("integrate_full", &integrate_full, py::arg("params"), py::arg("x0"),
          py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("integrate_sde", &integrate_sde, py::arg("params"), py::arg("x0"),
          py::arg("config"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());
    m.def(
        "detect_crossings",
        [](const std::vector<double>& t, const std::vector<double>& s, double up,
           double down) { return detect_crossings(t, s, up, down); },
        py::arg("times"), py::arg("series"), py::arg("up_threshold"),
        py::arg("down_threshold"),
        "Upward crossing times of a hysteresis (Schmitt) trigger.");

    // --- phase plane ----------------------------------------------------------
    py::class_<PhasePoint>(m, "PhasePoint")
        .def_readonly("total", &PhasePoint::total)
        .def_readonly("frac", &PhasePoint::frac);

    py::class_<NullclinePolyline>(m, "NullclinePolyline")
        .def_readonly("which", &NullclinePolyline::which)
        .def_readonly("points", &NullclinePolyline::points);

    py::class_<NullclineSet>(m, "NullclineSet")
        .def_readonly("c_no", &NullclineSet::c_no)
        .def_readonly("c_nop", &NullclineSet::c_nop);

    m.def("trace_nullclines", &trace_nullclines, py::arg("params"), py::arg("total_lo"),
          py::arg("total_hi"), py::arg("n_total"),
          py::call_guard<py::gil_scoped_release>());
    m.def("max_roots_per_total", &max_roots_per_total, py::arg("nullclines"),
          py::arg("which"));

    py::class_<Equilibrium>(m, "Equilibrium")
        .def_readonly("state", &Equilibrium::state)
        .def_readonly("lambda1", &Equilibrium::lambda1)
        .def_readonly("lambda2", &Equilibrium::lambda2)
        .def_readonly("residual", &Equilibrium::residual)
        .def_property_readonly("kind",
                               [](const Equilibrium& e) { return to_string(e.kind); })
        .def("stable", &Equilibrium::stable)
        .def("total", &Equilibrium::total)
        .def("frac", &Equilibrium::frac);

    m.def("find_equilibria",
          [](const Params& p) { return find_equilibria(p); }, py::arg("params"),
          py::call_guard<py::gil_scoped_release>());
    m.def("refine_equilibrium", &refine_equilibrium, py::arg("params"), py::arg("guess"));
    m.def(
        "classify_regime",
        [](const Params& p, double t_transient, double t_observe) {
            const auto eqs = find_equilibria(p);
            return std::string(
                to_string(classify_regime(p, default_probes(p, eqs), t_transient,
                                          t_observe)));
        },
        py::arg("params"), py::arg("t_transient") = 300.0, py::arg("t_observe") = 200.0,
        py::call_guard<py::gil_scoped_release>(),
        "Long-run behavior label at one parameter point.");

    // --- continuation -----------------------------------------------------------
    py::class_<BranchPoint>(m, "BranchPoint")
        .def_readonly("u", &BranchPoint::u)
        .def_readonly("tests", &BranchPoint::tests)
        .def_readonly("stable", &BranchPoint::stable);

    py::class_<BranchEvent>(m, "BranchEvent")
        .def_readonly("kind", &BranchEvent::kind)
        .def_readonly("u", &BranchEvent::u)
        .def_readonly("after_point", &BranchEvent::after_point)
        .def_readonly("test_value", &BranchEvent::test_value);

    py::class_<Branch>(m, "Branch")
        .def_readonly("points", &Branch::points)
        .def_readonly("events", &Branch::events)
        .def_readonly("termination", &Branch::termination)
        .def_readonly("closed", &Branch::closed);

    py::class_<StepConfig>(m, "StepConfig")
        .def(py::init<>())
        .def_readwrite("ds0", &StepConfig::ds0)
        .def_readwrite("ds_min", &StepConfig::ds_min)
        .def_readwrite("ds_max", &StepConfig::ds_max)
        .def_readwrite("max_points", &StepConfig::max_points)
        .def_readwrite("newton_tol", &StepConfig::newton_tol);

    m.def("continue_equilibrium", &continue_equilibrium, py::arg("params"),
          py::arg("free_name"), py::arg("range_lo"), py::arg("range_hi"),
          py::arg("config") = StepConfig{}, py::arg("x0") = std::nullopt,
          py::call_guard<py::gil_scoped_release>());
    m.def("find_hopf", &find_hopf, py::arg("params"), py::arg("free_name"),
          py::arg("range_lo"), py::arg("range_hi"), py::arg("n_scan") = 200,
          py::call_guard<py::gil_scoped_release>());
    m.def("first_lyapunov", &first_lyapunov, py::arg("x"), py::arg("params"),
          "First Lyapunov coefficient at a Hopf point (< 0 supercritical).");

    py::class_<CodimTwoPoint>(m, "CodimTwoPoint")
        .def_readonly("kind", &CodimTwoPoint::kind)
        .def_readonly("p1", &CodimTwoPoint::p1)
        .def_readonly("p2", &CodimTwoPoint::p2)
        .def_readonly("state", &CodimTwoPoint::state)
        .def_readonly("l1", &CodimTwoPoint::l1);

    py::class_<HopfCurve>(m, "HopfCurve")
        .def_readonly("branch", &HopfCurve::branch)
        .def_readonly("p1", &HopfCurve::p1)
        .def_readonly("p2", &HopfCurve::p2)
        .def_readonly("codim2", &HopfCurve::codim2);

    m.def("continue_hopf_curve", &continue_hopf_curve, py::arg("params"), py::arg("p1"),
          py::arg("p2"), py::arg("seed_state"), py::arg("config") = StepConfig{},
          py::call_guard<py::gil_scoped_release>());

    py::class_<CycleSolution>(m, "CycleSolution")
        .def_readonly("anchor", &CycleSolution::anchor)
        .def_readonly("T", &CycleSolution::T)
        .def_readonly("mu", &CycleSolution::mu)
        .def_readonly("amplitude", &CycleSolution::amplitude)
        .def_readonly("c_no_min", &CycleSolution::c_no_min)
        .def_readonly("c_no_max", &CycleSolution::c_no_max)
        .def_readonly("residual", &CycleSolution::residual)
        .def("stable", &CycleSolution::stable);

    m.def("refine_cycle", &refine_cycle, py::arg("params"), py::arg("anchor_guess"),
          py::arg("period_guess"), py::call_guard<py::gil_scoped_release>());
    m.def("cycle_from_simulation", &cycle_from_simulation, py::arg("params"),
          py::arg("x0") = std::nullopt, py::arg("t_transient") = 300.0,
          py::call_guard<py::gil_scoped_release>());
    m.def("cycle_near_hopf", &cycle_near_hopf, py::arg("params"), py::arg("free_name"),
          py::arg("p_hopf"), py::arg("x_hopf"), py::arg("dp"),
          py::call_guard<py::gil_scoped_release>());

    // --- stochastic analyses ------------------------------------------------------
    py::class_<ResonanceConfig>(m, "ResonanceConfig")
        .def(py::init<>())
        .def_readwrite("t_end", &ResonanceConfig::t_end)
        .def_readwrite("dt", &ResonanceConfig::dt)
        .def_readwrite("out_dt", &ResonanceConfig::out_dt)
        .def_readwrite("transient_frac", &ResonanceConfig::transient_frac)
        .def_readwrite("n_seeds", &ResonanceConfig::n_seeds);

    py::class_<ResonanceCurve>(m, "ResonanceCurve")
        .def_readonly("sigmas", &ResonanceCurve::sigmas)
        .def_readonly("mean_amplitudes", &ResonanceCurve::mean_amplitudes)
        .def_readonly("stderrs", &ResonanceCurve::stderrs)
        .def_readonly("seed_amplitudes", &ResonanceCurve::seed_amplitudes);

    m.def("sr_sweep", &sr_sweep, py::arg("params"), py::arg("sigmas"), py::arg("config"),
          py::arg("base_seed"), py::arg("x0") = std::nullopt,
          py::call_guard<py::gil_scoped_release>(),
          "Noise-amplitude sweep of the dominant Fourier amplitude of c_no.");

    py::class_<PeriodConfig>(m, "PeriodConfig")
        .def(py::init<>())
        .def_readwrite("t_end", &PeriodConfig::t_end)
        .def_readwrite("dt", &PeriodConfig::dt)
        .def_readwrite("out_dt", &PeriodConfig::out_dt)
        .def_readwrite("transient_frac", &PeriodConfig::transient_frac)
        .def_readwrite("up_threshold", &PeriodConfig::up_threshold)
        .def_readwrite("down_threshold", &PeriodConfig::down_threshold)
        .def_readwrite("n_traj", &PeriodConfig::n_traj);

    py::class_<PeriodStats>(m, "PeriodStats")
        .def_readonly("mean_period", &PeriodStats::mean_period)
        .def_readonly("cv", &PeriodStats::cv)
        .def_readonly("n_periods", &PeriodStats::n_periods)
        .def_readonly("n_traj", &PeriodStats::n_traj)
        .def_readonly("oscillating", &PeriodStats::oscillating);

    m.def("period_statistics", &period_statistics, py::arg("params"), py::arg("sigma"),
          py::arg("config"), py::arg("base_seed"), py::arg("x0") = std::nullopt,
          py::call_guard<py::gil_scoped_release>());

    py::class_<CvPoint>(m, "CvPoint")
        .def_readonly("value", &CvPoint::value)
        .def_readonly("stats", &CvPoint::stats);

    m.def("cv_vs_parameter", &cv_vs_parameter, py::arg("params"), py::arg("free_name"),
          py::arg("values"), py::arg("sigma"), py::arg("config"), py::arg("base_seed"),
          py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());

    m.def(
        "fourier_peak_amplitude",
        [](const Trajectory& traj, int column) {
            return fourier_peak_amplitude(
                traj, [column](const Eigen::VectorXd& s) { return s[column]; });
        },
        py::arg("trajectory"), py::arg("column") = 0,
        "Dominant single-bin Fourier amplitude of one trajectory component.");

    m.def("derive_seed", &derive_seed, py::arg("base_seed"), py::arg("index"),
          "Counter-derived independent RNG stream seed.");
}
