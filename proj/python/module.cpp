// Python bindings for the core library: spaces and states, Hamiltonians and
// the labeled eigensystem, the weak-drive spectral density, Lindblad time
// evolution and steady states, and the scalar / Wigner observables.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "polaronsim/hilbert.hpp"
#include "polaronsim/lindblad.hpp"
#include "polaronsim/model.hpp"
#include "polaronsim/observables.hpp"

namespace py = pybind11;
using namespace polaronsim;

namespace {

std::string branch_name(Branch b) {
  switch (b) {
    case Branch::minus: return "minus";
    case Branch::plus: return "plus";
    default: return "none";
  }
}

Branch branch_from(const std::string& name) {
  if (name == "minus") return Branch::minus;
  if (name == "plus") return Branch::plus;
  if (name == "none") return Branch::none;
  throw Error(ErrorCode::domain, "branch must be 'minus', 'plus' or 'none'");
}

std::string class_name(TransitionClass c) {
  switch (c) {
    case TransitionClass::reducing: return "reducing";
    case TransitionClass::increasing: return "increasing";
    default: return "conserving";
  }
}

Mode mode_from(const std::string& name) {
  if (name == "atom") return Mode::atom;
  if (name == "cavity") return Mode::cavity;
  if (name == "mechanics") return Mode::mechanics;
  throw Error(ErrorCode::domain, "mode must be 'atom', 'cavity' or 'mechanics'");
}

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::config: return "config";
    case ErrorCode::incompatible_space: return "incompatible_space";
    case ErrorCode::domain: return "domain";
    case ErrorCode::unsupported_regime: return "unsupported_regime";
    case ErrorCode::classification: return "classification";
    case ErrorCode::degenerate_steady_state: return "degenerate_steady_state";
    case ErrorCode::stiffness: return "stiffness";
    case ErrorCode::solver: return "solver";
    case ErrorCode::undefined_statistic: return "undefined_statistic";
  }
  return "unknown";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hybrid atom-cavity-mechanics simulator core";

  static py::exception<Error> exc(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(
          exc,
          (std::string("[") + error_name(e.code()) + "] " + e.what()).c_str());
    }
  });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("omega_m", &ModelParams::omega_m)
      .def_readwrite("omega_c", &ModelParams::omega_c)
      .def_readwrite("omega_a", &ModelParams::omega_a)
      .def_readwrite("g_ac", &ModelParams::g_ac)
      .def_readwrite("g_cm", &ModelParams::g_cm)
      .def_readwrite("gamma_ac", &ModelParams::gamma_ac)
      .def_readwrite("gamma_m", &ModelParams::gamma_m)
      .def_readwrite("n_th", &ModelParams::n_th)
      .def_readwrite("F_p", &ModelParams::F_p)
      .def_readwrite("omega_p", &ModelParams::omega_p)
      .def_readwrite("F_inc", &ModelParams::F_inc)
      .def("validate", &ModelParams::validate)
      .def("lower_polariton", &ModelParams::lower_polariton)
      .def("upper_polariton", &ModelParams::upper_polariton)
      .def("__repr__", [](const ModelParams& p) {
        return "ModelParams(omega_c=" + std::to_string(p.omega_c) +
               ", g_ac=" + std::to_string(p.g_ac) +
               ", g_cm=" + std::to_string(p.g_cm) + ", ...)";
      });

  py::class_<HilbertSpace>(m, "HilbertSpace")
      .def(py::init([](int cav_cutoff, int mech_cutoff) {
             return make_space(cav_cutoff, mech_cutoff);
           }),
           py::arg("cav_cutoff"), py::arg("mech_cutoff"))
      .def_readonly("cav_cutoff", &HilbertSpace::cav_cutoff)
      .def_readonly("mech_cutoff", &HilbertSpace::mech_cutoff)
      .def_property_readonly("dim", &HilbertSpace::dim)
      .def_property_readonly("dims", &HilbertSpace::dims)
      .def("__repr__", [](const HilbertSpace& s) {
        return "HilbertSpace(cav_cutoff=" + std::to_string(s.cav_cutoff) +
               ", mech_cutoff=" + std::to_string(s.mech_cutoff) + ")";
      });

  py::class_<DensityMatrix>(m, "DensityMatrix")
      .def_static(
          "from_matrix",
          [](const Matrix& matrix, std::vector<int> dims, double tol) {
            return DensityMatrix::from_matrix(matrix, std::move(dims), tol);
          },
          py::arg("matrix"), py::arg("dims"), py::arg("tol") = 1e-9)
      .def_property_readonly(
          "matrix", [](const DensityMatrix& r) { return r.matrix(); })
      .def_property_readonly(
          "dims", [](const DensityMatrix& r) { return r.dims(); })
      .def_property_readonly("dim", &DensityMatrix::dim)
      .def("trace_error", &DensityMatrix::trace_error)
      .def("hermiticity_error", &DensityMatrix::hermiticity_error)
      .def("min_eigenvalue", &DensityMatrix::min_eigenvalue);

  m.def(
      "product_state",
      [](const HilbertSpace& space, int atom, int k, const DensityMatrix& mech) {
        return product_state(space, atom, k, mech);
      },
      py::arg("space"), py::arg("atom"), py::arg("k"), py::arg("mech"),
      "Pure |atom, k> on atom and cavity, tensored with a mechanical state.");
  m.def("fock_state", &fock_state, py::arg("dim"), py::arg("level"));
  m.def("thermal_state", &thermal_state, py::arg("dim"),
        py::arg("mean_occupation"));
  m.def(
      "partial_trace",
      [](const DensityMatrix& rho, const std::string& keep) {
        return partial_trace(rho, mode_from(keep));
      },
      py::arg("rho"), py::arg("keep"));

  m.def(
      "hamiltonian",
      [](const ModelParams& p, const HilbertSpace& s) {
        return hamiltonian(p, s).matrix();
      },
      py::arg("params"), py::arg("space"),
      "Lab-frame Hamiltonian as a dense complex matrix.");
  m.def(
      "rotating_hamiltonian",
      [](const ModelParams& p, const HilbertSpace& s) {
        return rotating_hamiltonian(p, s).matrix();
      },
      py::arg("params"), py::arg("space"),
      "Drive-frame Hamiltonian (coherent drive folded in).");
  m.def(
      "polariton_number",
      [](const HilbertSpace& s) { return polariton_number(s).matrix(); },
      py::arg("space"));
  m.def(
      "number_operator",
      [](const HilbertSpace& s, const std::string& mode) {
        return number_operator(s, mode_from(mode)).matrix();
      },
      py::arg("space"), py::arg("mode"));

  py::class_<PolaronLevel>(m, "PolaronLevel")
      .def_readonly("n", &PolaronLevel::n)
      .def_readonly("m", &PolaronLevel::m)
      .def_property_readonly(
          "branch", [](const PolaronLevel& l) { return branch_name(l.branch); })
      .def_readonly("energy", &PolaronLevel::energy)
      .def_readonly("state", &PolaronLevel::state)
      .def("__repr__", [](const PolaronLevel& l) {
        return "PolaronLevel(n=" + std::to_string(l.n) +
               ", m=" + std::to_string(l.m) + ", branch='" +
               branch_name(l.branch) +
               "', energy=" + std::to_string(l.energy) + ")";
      });

  m.def("eigensystem", &eigensystem, py::arg("params"), py::arg("space"),
        "Labeled eigensystem of the lab-frame Hamiltonian, sorted by "
        "(polariton number, energy).");
  m.def(
      "polaron_energy",
      [](const ModelParams& p, int n, int mm, const std::string& branch) {
        return polaron_energy(p, n, mm, branch_from(branch));
      },
      py::arg("params"), py::arg("n"), py::arg("m"), py::arg("branch"),
      "Closed-form ladder energy (resonant regime).");
  m.def("effective_ladder_hamiltonian", &effective_ladder_hamiltonian,
        py::arg("params"), py::arg("n"), py::arg("mech_cutoff"));

  py::class_<TransitionRecord>(m, "TransitionRecord")
      .def_readonly("e_initial", &TransitionRecord::e_initial)
      .def_readonly("e_final", &TransitionRecord::e_final)
      .def_readonly("omega", &TransitionRecord::omega)
      .def_readonly("weight", &TransitionRecord::weight)
      .def_readonly("source_m", &TransitionRecord::source_m)
      .def_readonly("delta_phonon", &TransitionRecord::delta_phonon)
      .def_property_readonly("transition_class", [](const TransitionRecord& t) {
        return class_name(t.cls);
      });

  py::class_<SpectralDensity>(m, "SpectralDensity")
      .def_readonly("omega", &SpectralDensity::omega)
      .def_readonly("density", &SpectralDensity::density)
      .def_readonly("transitions", &SpectralDensity::transitions)
      .def_readonly("total_weight", &SpectralDensity::total_weight);

  m.def(
      "joint_spectral_density",
      [](const ModelParams& p, const HilbertSpace& s, double omega_min,
         double omega_max, int points, double broadening,
         bool ground_state_only) {
        JsdOptions opts;
        opts.omega_min = omega_min;
        opts.omega_max = omega_max;
        opts.points = points;
        opts.broadening = broadening;
        opts.ground_state_only = ground_state_only;
        return joint_spectral_density(p, s, opts);
      },
      py::arg("params"), py::arg("space"), py::arg("omega_min") = 0.0,
      py::arg("omega_max") = 0.0, py::arg("points") = 2001,
      py::arg("broadening") = 0.0, py::arg("ground_state_only") = false,
      "Weak-drive absorption spectrum with labeled transition lines.");

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("photon_number", &Trajectory::photon_number)
      .def_readonly("phonon_number", &Trajectory::phonon_number)
      .def_readonly("atom_excitation", &Trajectory::atom_excitation)
      .def_readonly("g2_phonon", &Trajectory::g2_phonon)
      .def_readonly("trace_residual", &Trajectory::trace_residual)
      .def_readonly("final_state", &Trajectory::final_state)
      .def_readonly("max_trace_residual", &Trajectory::max_trace_residual)
      .def_readonly("max_hermiticity_residual",
                    &Trajectory::max_hermiticity_residual)
      .def_readonly("min_eigenvalue", &Trajectory::min_eigenvalue)
      .def_readonly("steps_accepted", &Trajectory::steps_accepted)
      .def_readonly("steps_rejected", &Trajectory::steps_rejected);

  m.def(
      "evolve",
      [](const ModelParams& p, const HilbertSpace& s, const DensityMatrix& rho0,
         const std::vector<double>& times, double abs_tol, double rel_tol) {
        IntegratorOptions opts;
        opts.abs_tol = abs_tol;
        opts.rel_tol = rel_tol;
        return evolve(liouvillian(p, s), rho0, times, opts);
      },
      py::arg("params"), py::arg("space"), py::arg("rho0"), py::arg("times"),
      py::arg("abs_tol") = 1e-10, py::arg("rel_tol") = 1e-8,
      "Integrate the master equation, sampling observables at `times`.");

  py::class_<SteadyState>(m, "SteadyState")
      .def_readonly("rho", &SteadyState::rho)
      .def_readonly("residual_max", &SteadyState::residual_max)
      .def_readonly("kernel_residual", &SteadyState::kernel_residual)
      .def_readonly("method", &SteadyState::method)
      .def_readonly("iterations", &SteadyState::iterations);

  m.def(
      "steady_state",
      [](const ModelParams& p, const HilbertSpace& s, double residual_tol) {
        SteadyStateOptions opts;
        opts.residual_tol = residual_tol;
        return steady_state(liouvillian(p, s), opts);
      },
      py::arg("params"), py::arg("space"), py::arg("residual_tol") = 1e-10,
      "Null-vector steady state of the Lindblad generator.");

  py::class_<ScalarObservables>(m, "ScalarObservables")
      .def_readonly("phonon_number", &ScalarObservables::phonon_number)
      .def_readonly("photon_number", &ScalarObservables::photon_number)
      .def_readonly("atom_excitation", &ScalarObservables::atom_excitation)
      .def_readonly("g2_phonon", &ScalarObservables::g2_phonon)
      .def_readonly("polariton_block_populations",
                    &ScalarObservables::polariton_block_populations);

  m.def("scalar_observables", &scalar_observables, py::arg("rho"),
        py::arg("space"));
  m.def("g2_phonon", &g2_phonon, py::arg("rho"), py::arg("floor") = 1e-8,
        "Equal-time phonon statistic <b†b†bb>/<b†b>².");

  py::class_<WignerMap>(m, "WignerMap")
      .def_readonly("x_grid", &WignerMap::x_grid)
      .def_readonly("p_grid", &WignerMap::p_grid)
      .def_readonly("values", &WignerMap::values)
      .def_readonly("min_value", &WignerMap::min_value)
      .def_readonly("integral", &WignerMap::integral)
      .def_readonly("accuracy_warning", &WignerMap::accuracy_warning);

  m.def("wigner", &wigner, py::arg("rho_mech"), py::arg("x_grid"),
        py::arg("p_grid"),
        "Displaced-parity Wigner function of a single-mode state.");
  m.def("wigner_default", &wigner_default, py::arg("rho_mech"));
  m.def("linear_grid", &linear_grid, py::arg("lo"), py::arg("hi"),
        py::arg("points"));

  py::class_<CoolingFit>(m, "CoolingFit")
      .def_readonly("gamma_eff", &CoolingFit::gamma_eff)
      .def_readonly("n_min", &CoolingFit::n_min)
      .def_readonly("t0", &CoolingFit::t0)
      .def_readonly("t_end", &CoolingFit::t_end)
      .def_readonly("residual", &CoolingFit::residual);

  m.def("fit_cooling", &fit_cooling, py::arg("trajectory"),
        "Exponential fit of the mechanical occupation decay.");
}
