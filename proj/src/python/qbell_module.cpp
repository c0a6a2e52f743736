#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qbell/io.hpp"
#include "qbell/witness.hpp"

namespace py = pybind11;
using namespace qbell;

namespace {

ProbabilityTable table_from_array(const py::array_t<double>& arr) {
    if (arr.ndim() != 4 || arr.shape(0) != 2 || arr.shape(1) != 2 ||
        arr.shape(2) != arr.shape(3)) {
        throw size_error("probability table must have shape (2, 2, d, d)");
    }
    const int d = static_cast<int>(arr.shape(2));
    ProbabilityTable t = ProbabilityTable::zeros(d);
    auto view = arr.unchecked<4>();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int v = 0; v < d; ++v) {
                for (int w = 0; w < d; ++w) {
                    t.at(a, b)(v, w) = view(a, b, v, w);
                }
            }
        }
    }
    return t;
}

py::array_t<double> table_to_array(const ProbabilityTable& t) {
    py::array_t<double> arr({2, 2, t.d, t.d});
    auto view = arr.mutable_unchecked<4>();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int v = 0; v < t.d; ++v) {
                for (int w = 0; w < t.d; ++w) {
                    view(a, b, v, w) = t.at(a, b)(v, w);
                }
            }
        }
    }
    return arr;
}

} // namespace

PYBIND11_MODULE(_qbell, m) {
    m.doc() = "Generalised Bell-test numerics for OAM-entangled photon pairs";

    py::register_exception<contract_error>(m, "ContractError", PyExc_RuntimeError);
    py::register_exception<size_error>(m, "SizeError", PyExc_ValueError);

    // modes and bases
    m.def("ells", [](int d) { return DimensionSpec::make(d).ells; },
          "OAM mode list for dimension d", py::arg("d"));
    m.def("signal_j", [](int d, int ell) { return mode_map(d).signal_j(ell); },
          py::arg("d"), py::arg("ell"));
    m.def("idler_j", [](int d, int ell) { return mode_map(d).idler_j(ell); },
          py::arg("d"), py::arg("ell"));
    m.def("analyser_state",
          [](int d, const std::string& party, int setting, int outcome) -> ComplexVector {
              const Party p = party == "alice" ? Party::alice : Party::bob;
              return analyser_state(d, {p, setting, outcome});
          },
          "Analyser basis state in the computational |j> basis",
          py::arg("d"), py::arg("party"), py::arg("setting"), py::arg("outcome"));

    // bell engine
    m.def("bell_operator", [](int d) -> ComplexMatrix { return bell_operator(d).matrix; },
          "Bell operator S_d in the ordered product basis", py::arg("d"));
    m.def("bell_coefficients",
          [](int d) {
              const auto c = bell_coefficients(d);
              py::array_t<double> arr({2, 2, d, d});
              auto view = arr.mutable_unchecked<4>();
              for (int a = 0; a < 2; ++a)
                  for (int b = 0; b < 2; ++b)
                      for (int v = 0; v < d; ++v)
                          for (int w = 0; w < d; ++w)
                              view(a, b, v, w) =
                                  c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)](v, w);
              return arr;
          },
          py::arg("d"));
    m.def("probability_table",
          [](const ComplexMatrix& rho, int d) { return table_to_array(probability_table(rho, d)); },
          "Joint outcome probabilities (2, 2, d, d) of a density matrix",
          py::arg("rho"), py::arg("d"));
    m.def("s_from_table",
          [](const py::array_t<double>& table) {
              return s_from_table(table_from_array(table)).s;
          },
          "Bell parameter S_d of a probability table", py::arg("table"));
    m.def("max_violation",
          [](int d) {
              const MaxViolation mv = max_violation(d);
              return py::make_tuple(mv.value, ComplexVector(mv.eigenstate));
          },
          "Largest eigenvalue of S_d and its eigenstate", py::arg("d"));
    m.def("expectation_max_entangled", &expectation_max_entangled, py::arg("d"));
    m.def("lhv_bound_bruteforce", &lhv_bound_bruteforce,
          "Max S_d over deterministic local strategies (d <= 4)", py::arg("d"));

    // spdc model
    m.def("max_entangled_state", [](int d) -> RealVector { return max_entangled_state(d).coeffs; },
          py::arg("d"));
    m.def("lorentzian_state",
          [](double gamma, int d) -> RealVector { return lorentzian_state(gamma, d).coeffs; },
          "Lorentzian |j,j> amplitudes, unit norm", py::arg("gamma"), py::arg("d"));
    m.def("coincidence_closed_form", &coincidence_closed_form,
          py::arg("theta_a"), py::arg("theta_b"), py::arg("d"));
    m.def("coincidence_numeric",
          [](const RealVector& coeffs, double theta_a, double theta_b) {
              const int d = static_cast<int>(coeffs.size());
              return coincidence_numeric(mode_map(d), ReferenceState::custom(d, coeffs), theta_a,
                                         theta_b);
          },
          py::arg("coeffs"), py::arg("theta_a"), py::arg("theta_b"));
    m.def("fringe_equivalence_check", &fringe_equivalence_check, py::arg("d"), py::arg("points"));
    m.def("fit_gamma",
          [](const std::vector<int>& ells, const std::vector<double>& rates) {
              if (ells.size() != rates.size()) {
                  throw size_error("fit_gamma: ells and rates must have equal length");
              }
              std::vector<SpiralSample> samples;
              for (std::size_t i = 0; i < ells.size(); ++i) {
                  samples.push_back({ells[i], rates[i], 0.0});
              }
              const GammaFit fit = fit_gamma(samples);
              return py::make_tuple(fit.gamma, fit.amplitude, fit.residual, fit.flat);
          },
          "Returns (gamma, amplitude, residual, flat)", py::arg("ells"), py::arg("rates"));

    // concentration
    m.def("design_filter",
          [](double gamma, int d) -> RealVector {
              return design_filter(lorentzian_state(gamma, d)).diag;
          },
          "Amplitude-equalising filter diagonal over ell ascending",
          py::arg("gamma"), py::arg("d"));
    m.def("paper_filter_d11", []() -> RealVector { return paper_filter_d11().diag; });
    m.def("apply_filter",
          [](const RealVector& coeffs, const RealVector& diag) {
              const int d = static_cast<int>(coeffs.size());
              const FilterOutcome outcome =
                  apply_filter(ReferenceState::custom(d, coeffs), FilterSpec{d, diag});
              return py::make_tuple(RealVector(outcome.filtered.coeffs),
                                    outcome.success_probability);
          },
          "Returns (filtered coefficients, success probability)",
          py::arg("coeffs"), py::arg("diag"));

    // experiment simulation
    m.def("simulate_counts",
          [](const ComplexMatrix& rho, int d, double rate, double time, double epsilon,
             std::uint64_t seed) {
              ExperimentPlan plan;
              plan.d = d;
              plan.state = rho;
              plan.total_rate = rate;
              plan.integration_time = time;
              plan.crosstalk_epsilon = epsilon;
              plan.seed = seed;
              const auto records = simulate_counts(plan);
              py::array_t<std::uint64_t> arr({2, 2, d, d});
              auto view = arr.mutable_unchecked<4>();
              for (const CountRecord& r : records) view(r.a, r.b, r.v, r.w) = r.count;
              return arr;
          },
          py::arg("rho"), py::arg("d"), py::arg("rate"), py::arg("time") = 20.0,
          py::arg("epsilon") = 0.0, py::arg("seed") = 0);
    m.def("estimate_s_with_sigma",
          [](const py::array_t<std::uint64_t>& counts) {
              if (counts.ndim() != 4 || counts.shape(0) != 2 || counts.shape(1) != 2 ||
                  counts.shape(2) != counts.shape(3)) {
                  throw size_error("counts must have shape (2, 2, d, d)");
              }
              const int d = static_cast<int>(counts.shape(2));
              auto view = counts.unchecked<4>();
              std::vector<CountRecord> records;
              for (int a = 0; a < 2; ++a)
                  for (int b = 0; b < 2; ++b)
                      for (int v = 0; v < d; ++v)
                          for (int w = 0; w < d; ++w)
                              records.push_back({a, b, v, w, view(a, b, v, w)});
              const BellValue bv = estimate_s_with_sigma(records, d);
              return py::make_tuple(bv.s, bv.sigma);
          },
          "Returns (s, sigma) from a (2, 2, d, d) count array", py::arg("counts"));
    m.def("crosstalk_mix",
          [](const py::array_t<double>& table, double epsilon) {
              return table_to_array(crosstalk_mix(table_from_array(table), epsilon));
          },
          py::arg("table"), py::arg("epsilon"));

    // witness
    m.def("constrained_s_k", &constrained_s_k, py::arg("rho"), py::arg("k"), py::arg("d"));
    m.def("unconstrained_restricted_maximum", &unconstrained_restricted_maximum, py::arg("d"));
    m.def("maximize_s11",
          [](const std::string& constraints_json, int starts, std::uint64_t seed) {
              std::istringstream in(constraints_json);
              const ConstraintSet constraints = ConstraintSet::from_json(in);
              WitnessOptions options;
              options.n_starts = starts;
              options.seed = seed;
              const WitnessResult result = maximize_s11(constraints, options);
              py::dict out;
              out["best_s11"] = result.best_s11;
              out["feasible"] = result.feasible;
              out["converged_fraction"] = result.converged_fraction;
              out["worst_residual"] = result.worst_residual;
              out["weights"] = RealVector(result.best_ansatz.weights);
              out["vectors"] = RealMatrix(result.best_ansatz.vectors);
              return out;
          },
          "Constrained maximisation from a constraint-set JSON string",
          py::arg("constraints_json"), py::arg("starts") = 200, py::arg("seed") = 1);
    m.def("paper_scenario_json", [] { return ConstraintSet::paper_scenario().to_json(); });
    m.def("certify_dimension",
          [](double best, double measured, double sigma, double significance) {
              const Certificate cert = certify_dimension(best, measured, sigma, significance);
              return py::make_tuple(cert.separation_sigmas, cert.certified);
          },
          py::arg("best_s11"), py::arg("measured"), py::arg("sigma"),
          py::arg("significance") = 3.0);

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
