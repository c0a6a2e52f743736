#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbell/io.hpp"
#include "qbell/witness.hpp"

namespace {

using namespace qbell;

// "-" means stdout
class Output {
public:
    explicit Output(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_) {
                throw size_error("cannot open output file: " + path);
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw size_error("cannot open input file: " + path);
    }
    return in;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
    if (seed) return *seed;
    std::random_device entropy;
    const std::uint64_t chosen =
        (static_cast<std::uint64_t>(entropy()) << 32) ^ static_cast<std::uint64_t>(entropy());
    std::cerr << "seed: " << chosen << "\n";
    return chosen;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qbell: generalised Bell-test numerics for OAM-entangled photon pairs"};
    app.require_subcommand(1);

    std::function<void()> run;

    // table-s1
    {
        auto* cmd = app.add_subcommand("table-s1",
                                       "Max-entangled and maximal Bell violations for d = 2..d_max");
        auto dmax = std::make_shared<int>(14);
        auto machine = std::make_shared<bool>(false);
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--dmax", *dmax, "largest dimension (2..14)");
        cmd->add_flag("--machine", *machine, "12 significant digits instead of 4 decimals");
        cmd->add_option("-o,--output", *out, "output path, - for stdout");
        cmd->callback([=, &run] {
            run = [=] {
                Output output(*out);
                write_table_s1_csv(output.stream(), *dmax, !*machine);
            };
        });
    }

    // operator
    {
        auto* cmd = app.add_subcommand("operator", "Bell operator S_d as (row, col, re, im) CSV");
        auto d = std::make_shared<int>(0);
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--d", *d, "dimension (2..14)")->required();
        cmd->add_option("-o,--output", *out, "output path, - for stdout");
        cmd->callback([=, &run] {
            run = [=] {
                Output output(*out);
                write_operator_csv(output.stream(), bell_operator(*d));
            };
        });
    }

    // fringe
    {
        auto* cmd = app.add_subcommand("fringe", "Coincidence fringe, closed form vs numeric");
        auto d = std::make_shared<int>(0);
        auto points = std::make_shared<int>(200);
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--d", *d, "dimension")->required();
        cmd->add_option("--points", *points, "grid points (>= 2)");
        cmd->add_option("-o,--output", *out, "output path, - for stdout");
        cmd->callback([=, &run] {
            run = [=] {
                Output output(*out);
                write_fringe_csv(output.stream(), *d, *points);
            };
        });
    }

    // sweep
    {
        auto* cmd = app.add_subcommand("sweep", "Simulated S_d versus d for a Lorentzian source");
        auto gamma = std::make_shared<double>(7.58);
        auto dmin = std::make_shared<int>(2);
        auto dmax = std::make_shared<int>(14);
        auto filtered = std::make_shared<bool>(false);
        auto epsilon = std::make_shared<double>(0.0);
        auto rate = std::make_shared<double>(50.0);
        auto time = std::make_shared<double>(20.0);
        auto seed = std::make_shared<std::optional<std::uint64_t>>();
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--gamma", *gamma, "spiral bandwidth HWHM");
        cmd->add_option("--dmin", *dmin, "first dimension");
        cmd->add_option("--dmax", *dmax, "last dimension");
        cmd->add_flag("--filtered", *filtered, "apply the designed Procrustean filter");
        cmd->add_option("--epsilon", *epsilon, "cross-talk weight in [0, 1)");
        cmd->add_option("--rate", *rate, "coincidences/s per setting pair");
        cmd->add_option("--time", *time, "integration time in seconds");
        cmd->add_option("--seed", *seed, "RNG seed (entropy when omitted)");
        cmd->add_option("-o,--output", *out, "output path, - for stdout");
        cmd->callback([=, &run] {
            run = [=] {
                SweepOptions options;
                options.total_rate = *rate;
                options.integration_time = *time;
                options.crosstalk_epsilon = *epsilon;
                options.seed = resolve_seed(*seed);
                const auto rows = run_sd_sweep(*gamma, *dmin, *dmax, *filtered, options);
                Output output(*out);
                write_sweep_csv(output.stream(), rows);
            };
        });
    }

    // simulate
    {
        auto* cmd = app.add_subcommand("simulate", "Poisson coincidence counts for one experiment");
        auto d = std::make_shared<int>(0);
        auto gamma = std::make_shared<double>(7.58);
        auto max_ent = std::make_shared<bool>(false);
        auto filtered = std::make_shared<bool>(false);
        auto epsilon = std::make_shared<double>(0.0);
        auto rate = std::make_shared<double>(50.0);
        auto time = std::make_shared<double>(20.0);
        auto seed = std::make_shared<std::optional<std::uint64_t>>();
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--d", *d, "dimension")->required();
        cmd->add_option("--gamma", *gamma, "Lorentzian source bandwidth");
        cmd->add_flag("--max-entangled", *max_ent, "use the maximally entangled state");
        cmd->add_flag("--filtered", *filtered, "apply the designed Procrustean filter");
        cmd->add_option("--epsilon", *epsilon, "cross-talk weight in [0, 1)");
        cmd->add_option("--rate", *rate, "coincidences/s per setting pair");
        cmd->add_option("--time", *time, "integration time in seconds");
        cmd->add_option("--seed", *seed, "RNG seed (entropy when omitted)");
        cmd->add_option("-o,--output", *out, "output path, - for stdout");
        cmd->callback([=, &run] {
            run = [=] {
                ReferenceState state =
                    *max_ent ? max_entangled_state(*d) : lorentzian_state(*gamma, *d);
                double rate_scale = 1.0;
                if (*filtered && !*max_ent) {
                    const FilterOutcome outcome = apply_filter(state, design_filter(state));
                    state = outcome.filtered;
                    rate_scale = outcome.success_probability;
                }
                ExperimentPlan plan;
                plan.d = *d;
                plan.state = state.density();
                plan.total_rate = *rate * rate_scale;
                plan.integration_time = *time;
                plan.crosstalk_epsilon = *epsilon;
                plan.seed = resolve_seed(*seed);
                const auto records = simulate_counts(plan);
                const BellValue estimate = estimate_s_with_sigma(records, *d);
                Output output(*out);
                write_counts_csv(output.stream(), records);
                std::cerr << "S_" << *d << " = " << fmt_sig(estimate.s) << " +/- "
                          << fmt_sig(estimate.sigma) << "\n";
            };
        });
    }

    // fit-gamma
    {
        auto* cmd = app.add_subcommand("fit-gamma", "Fit the spiral bandwidth to (ell, rate) data");
        auto input = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--input", *input, "CSV with (ell, rate[, sigma]) rows")->required();
        cmd->add_option("-o,--output", *out, "output path, - for stdout");
        cmd->callback([=, &run] {
            run = [=] {
                std::ifstream in = open_input(*input);
                const GammaFit fit = fit_gamma(read_spectrum_samples(in));
                nlohmann::json j;
                j["gamma"] = fit.gamma;
                j["amplitude"] = fit.amplitude;
                j["residual"] = fit.residual;
                j["flat"] = fit.flat;
                Output output(*out);
                output.stream() << j.dump(2) << "\n";
            };
        });
    }

    // filter-design
    {
        auto* cmd = app.add_subcommand("filter-design",
                                       "Procrustean filter diagonal for a Lorentzian source");
        auto gamma = std::make_shared<double>(7.58);
        auto d = std::make_shared<int>(11);
        auto paper = std::make_shared<bool>(false);
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--gamma", *gamma, "spiral bandwidth HWHM");
        cmd->add_option("--d", *d, "dimension");
        cmd->add_flag("--paper-preset-filter", *paper, "emit the published d=11 diagonal verbatim");
        cmd->add_option("-o,--output", *out, "output path, - for stdout");
        cmd->callback([=, &run] {
            run = [=] {
                Output output(*out);
                if (*paper) {
                    output.stream() << filter_to_json(paper_filter_d11(), -1.0) << "\n";
                } else {
                    const FilterSpec filter = design_filter(lorentzian_state(*gamma, *d));
                    output.stream() << filter_to_json(filter, *gamma) << "\n";
                }
            };
        });
    }

    // witness
    {
        auto* cmd = app.add_subcommand(
            "witness", "Maximise S_11 over (d-1)-dimensionally entangled constrained states");
        auto constraints_path = std::make_shared<std::string>();
        auto starts = std::make_shared<int>(200);
        auto seed = std::make_shared<std::optional<std::uint64_t>>();
        auto band = std::make_shared<std::optional<double>>();
        auto measured = std::make_shared<double>(2.39);
        auto measured_sigma = std::make_shared<double>(0.07);
        auto significance = std::make_shared<double>(3.0);
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--constraints", *constraints_path, "constraint JSON file")->required();
        cmd->add_option("--starts", *starts, "number of optimisation starts");
        cmd->add_option("--seed", *seed, "RNG seed (entropy when omitted)");
        cmd->add_option("--band-multiplier", *band, "override the file's sigma multiplier");
        cmd->add_option("--measured", *measured, "measured S_d to certify against");
        cmd->add_option("--measured-sigma", *measured_sigma, "sigma of the measured S_d");
        cmd->add_option("--significance", *significance, "certification threshold in sigmas");
        cmd->add_option("-o,--output", *out, "output path, - for stdout");
        cmd->callback([=, &run] {
            run = [=] {
                std::ifstream in = open_input(*constraints_path);
                ConstraintSet constraints = ConstraintSet::from_json(in);
                if (*band) constraints.band_multiplier = **band;
                WitnessOptions options;
                options.n_starts = *starts;
                options.seed = resolve_seed(*seed);
                const WitnessResult result = maximize_s11(constraints, options);

                nlohmann::json j = nlohmann::json::parse(result.to_json());
                if (result.feasible) {
                    const Certificate cert = certify_dimension(result.best_s11, *measured,
                                                               *measured_sigma, *significance);
                    j["certificate"] = {{"measured", *measured},
                                        {"sigma", *measured_sigma},
                                        {"separation_sigmas", cert.separation_sigmas},
                                        {"significance", cert.significance},
                                        {"certified", cert.certified}};
                }
                Output output(*out);
                output.stream() << j.dump(2) << "\n";
                if (!result.feasible) {
                    std::ostringstream os;
                    os << "witness: constraint set infeasible, worst residual "
                       << result.worst_residual;
                    throw contract_error(os.str());
                }
            };
        });
    }

    // certify
    {
        auto* cmd = app.add_subcommand("certify", "Separation of a measured S_d from a bound");
        auto measured = std::make_shared<double>();
        auto sigma = std::make_shared<double>();
        auto bound = std::make_shared<double>();
        auto significance = std::make_shared<double>(3.0);
        auto out = std::make_shared<std::string>("-");
        cmd->add_option("--measured", *measured, "measured S_d")->required();
        cmd->add_option("--sigma", *sigma, "sigma of the measured value")->required();
        cmd->add_option("--bound", *bound, "constrained maximum to compare against")->required();
        cmd->add_option("--significance", *significance, "certification threshold in sigmas");
        cmd->add_option("-o,--output", *out, "output path, - for stdout");
        cmd->callback([=, &run] {
            run = [=] {
                const Certificate cert =
                    certify_dimension(*bound, *measured, *sigma, *significance);
                nlohmann::json j;
                j["measured"] = *measured;
                j["sigma"] = *sigma;
                j["bound"] = *bound;
                j["separation_sigmas"] = cert.separation_sigmas;
                j["significance"] = cert.significance;
                j["certified"] = cert.certified;
                Output output(*out);
                output.stream() << j.dump(2) << "\n";
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        run();
    } catch (const size_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const contract_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
