#include "qbell/witness.hpp"

#include <cmath>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "qbell/parallel.hpp"
#include "qbell/rng.hpp"
#include "lbfgs.hpp"

namespace qbell {

using nlohmann::json;

void ConstraintSet::validate() const {
    if (d < 3 || d > 14) {
        throw size_error("ConstraintSet: d must lie in [3, 14]");
    }
    double total = 0.0;
    for (const DiagConstraint& c : diag_probs) {
        if (c.j < 0 || c.j >= d) throw contract_error("ConstraintSet: diagonal index outside 0..d-1");
        if (!(c.p >= 0.0 && c.p <= 1.0)) throw contract_error("ConstraintSet: probability outside [0, 1]");
        if (!(c.sigma >= 0.0)) throw contract_error("ConstraintSet: negative sigma");
        total += c.p;
    }
    if (total > 1.0 + 1e-6) {
        throw contract_error("ConstraintSet: diagonal probabilities sum beyond 1");
    }
    for (const SConstraint& c : s_constraints) {
        if (c.k < 2 || c.k >= d) throw contract_error("ConstraintSet: S_k index must lie in 2..d-1");
        if (!(c.sigma >= 0.0)) throw contract_error("ConstraintSet: negative sigma");
    }
    if (!(band_multiplier > 0.0)) {
        throw contract_error("ConstraintSet: band multiplier must be positive");
    }
}

ConstraintSet ConstraintSet::paper_scenario() {
    ConstraintSet set;
    set.d = 11;
    for (int j = 0; j < 11; ++j) {
        set.diag_probs.push_back({j, 1.0 / 11.0, 0.01});
    }
    const double s[] = {2.79, 2.78, 2.87, 2.73, 2.76, 2.62, 2.56, 2.46, 2.47};
    const double sigma[] = {0.03, 0.04, 0.04, 0.05, 0.06, 0.07, 0.07, 0.07, 0.07};
    for (int k = 2; k <= 10; ++k) {
        set.s_constraints.push_back({k, s[k - 2], sigma[k - 2]});
    }
    return set;
}

ConstraintSet ConstraintSet::from_json(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw contract_error(std::string("ConstraintSet: malformed JSON: ") + e.what());
    }
    ConstraintSet set;
    set.d = j.at("d").get<int>();
    for (const json& item : j.at("diag_probs")) {
        set.diag_probs.push_back(
            {item.at("j").get<int>(), item.at("p").get<double>(), item.at("sigma").get<double>()});
    }
    for (const json& item : j.at("s_constraints")) {
        set.s_constraints.push_back(
            {item.at("k").get<int>(), item.at("s").get<double>(), item.at("sigma").get<double>()});
    }
    set.band_multiplier = j.value("band_multiplier", 1.0);
    set.validate();
    return set;
}

std::string ConstraintSet::to_json() const {
    json j;
    j["d"] = d;
    j["diag_probs"] = json::array();
    for (const DiagConstraint& c : diag_probs) {
        j["diag_probs"].push_back({{"j", c.j}, {"p", c.p}, {"sigma", c.sigma}});
    }
    j["s_constraints"] = json::array();
    for (const SConstraint& c : s_constraints) {
        j["s_constraints"].push_back({{"k", c.k}, {"s", c.s}, {"sigma", c.sigma}});
    }
    j["band_multiplier"] = band_multiplier;
    return j.dump(2);
}

ComplexMatrix assemble_rho(const WitnessAnsatz& ansatz) {
    const int d = static_cast<int>(ansatz.weights.size());
    if (ansatz.vectors.rows() != d || ansatz.vectors.cols() != d) {
        throw size_error("assemble_rho: vectors must be d x d");
    }
    double weight_sum = 0.0;
    for (int n = 0; n < d; ++n) {
        if (ansatz.weights(n) < -1e-12) {
            throw contract_error("assemble_rho: negative mixture weight");
        }
        weight_sum += ansatz.weights(n);
        if (ansatz.vectors(n, n) != 0.0) {
            std::ostringstream os;
            os << "assemble_rho: a_" << n << "[" << n << "] must be exactly zero";
            throw contract_error(os.str());
        }
        const double norm = ansatz.vectors.row(n).norm();
        if (std::abs(norm - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "assemble_rho: |psi_" << n << "| = " << norm << ", not normalised";
            throw contract_error(os.str());
        }
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
        throw contract_error("assemble_rho: mixture weights do not sum to 1");
    }
    ComplexMatrix rho = ComplexMatrix::Zero(d * d, d * d);
    for (int n = 0; n < d; ++n) {
        ComplexVector psi = ComplexVector::Zero(d * d);
        for (int j = 0; j < d; ++j) psi(j * d + j) = ansatz.vectors(n, j);
        rho += ansatz.weights(n) * (psi * psi.adjoint());
    }
    return rho;
}

std::pair<double, double> constrained_s_k_with_weight(const ComplexMatrix& rho, int k, int d) {
    auto [restricted, weight] = restrict_state(rho, d, k);
    if (weight < 1e-12) {
        std::ostringstream os;
        os << "constrained_s_k: projected weight " << weight << " leaves S_" << k << " undefined";
        throw contract_error(os.str());
    }
    restricted /= weight;
    return {s_from_table(probability_table(restricted, k)).s, weight};
}

double constrained_s_k(const ComplexMatrix& rho, int k, int d) {
    return constrained_s_k_with_weight(rho, k, d).first;
}

double unconstrained_restricted_maximum(int d) {
    const RealMatrix block = correlated_block(bell_operator(d));
    double best = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < d; ++n) {
        RealMatrix sub(d - 1, d - 1);
        for (int r = 0, rr = 0; r < d; ++r) {
            if (r == n) continue;
            for (int c = 0, cc = 0; c < d; ++c) {
                if (c == n) continue;
                sub(rr, cc) = block(r, c);
                ++cc;
            }
            ++rr;
        }
        Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sub);
        best = std::max(best, solver.eigenvalues().maxCoeff());
    }
    return best;
}

Certificate certify_dimension(double best_s11, double measured_s11, double sigma_s11,
                              double significance) {
    if (!(sigma_s11 > 0.0)) {
        throw contract_error("certify_dimension: sigma must be positive");
    }
    Certificate cert;
    cert.significance = significance;
    cert.separation_sigmas = (measured_s11 - best_s11) / sigma_s11;
    cert.certified = cert.separation_sigmas >= significance;
    return cert;
}

namespace detail {

struct WitnessProblem::Eval {
    RealVector r;         // softmax weights
    RealMatrix a;         // row n = unit vector with a(n, n) = 0
    RealMatrix x_unit;    // row n = normalised free block
    RealVector x_norm;
    double bell = 0.0;
    std::vector<double> violation;  // signed distance outside each band
};

WitnessProblem::WitnessProblem(const ConstraintSet& constraints, double mu)
    : d_(constraints.d), mu_(mu) {
    constraints.validate();
    bell_block_ = correlated_block(bell_operator(d_));
    const ModeMap map = mode_map(d_);
    for (const SConstraint& c : constraints.s_constraints) {
        SubBlock sub;
        sub.k = c.k;
        const double band = constraints.band_multiplier * c.sigma;
        sub.lo = c.s - band;
        sub.hi = c.s + band;
        for (int ell : central_ells(d_, c.k)) {
            sub.indices.push_back(map.signal_j(ell));
        }
        sub.block = correlated_block(bell_operator(c.k));
        s_bands_.push_back(std::move(sub));
    }
    for (const DiagConstraint& c : constraints.diag_probs) {
        const double band = constraints.band_multiplier * c.sigma;
        diag_bands_.push_back({c.j, c.p - band, c.p + band});
    }
}

WitnessProblem::Eval WitnessProblem::evaluate(const RealVector& params) const {
    const int d = d_;
    Eval ev;

    // softmax weights
    RealVector s = params.head(d);
    const double s_max = s.maxCoeff();
    ev.r = (s.array() - s_max).exp();
    ev.r /= ev.r.sum();

    // unit vectors with the excluded coordinate pinned to zero
    ev.a = RealMatrix::Zero(d, d);
    ev.x_unit = RealMatrix::Zero(d, d - 1);
    ev.x_norm = RealVector::Zero(d);
    for (int n = 0; n < d; ++n) {
        RealVector x = params.segment(d + n * (d - 1), d - 1);
        double norm = x.norm();
        if (norm < 1e-12) {
            x = RealVector::Ones(d - 1);
            norm = x.norm();
        }
        ev.x_norm(n) = norm;
        ev.x_unit.row(n) = (x / norm).transpose();
        for (int i = 0, j = 0; j < d; ++j) {
            if (j == n) continue;
            ev.a(n, j) = ev.x_unit(n, i);
            ++i;
        }
    }

    for (int n = 0; n < d; ++n) {
        ev.bell += ev.r(n) * ev.a.row(n).dot(bell_block_ * ev.a.row(n).transpose());
    }

    ev.violation.assign(diag_bands_.size() + s_bands_.size(), 0.0);
    std::size_t idx = 0;
    for (const DiagBand& band : diag_bands_) {
        double value = 0.0;
        for (int n = 0; n < d; ++n) value += ev.r(n) * ev.a(n, band.j) * ev.a(n, band.j);
        if (value < band.lo) ev.violation[idx] = value - band.lo;
        else if (value > band.hi) ev.violation[idx] = value - band.hi;
        ++idx;
    }
    for (const SubBlock& sub : s_bands_) {
        double num = 0.0, weight = 0.0;
        for (int n = 0; n < d; ++n) {
            RealVector restricted(sub.k);
            for (int i = 0; i < sub.k; ++i) {
                restricted(i) = ev.a(n, sub.indices[static_cast<std::size_t>(i)]);
            }
            num += ev.r(n) * restricted.dot(sub.block * restricted);
            weight += ev.r(n) * restricted.squaredNorm();
        }
        const double value = num / std::max(weight, 1e-12);
        if (value < sub.lo) ev.violation[idx] = value - sub.lo;
        else if (value > sub.hi) ev.violation[idx] = value - sub.hi;
        ++idx;
    }
    return ev;
}

double WitnessProblem::eval(const RealVector& params, RealVector* grad) const {
    const int d = d_;
    const Eval ev = evaluate(params);

    double penalty = 0.0;
    for (double v : ev.violation) penalty += v * v;
    const double value = -ev.bell + mu_ * penalty;
    if (!grad) return value;

    // accumulate dE/dr and dE/da, then chain through softmax and row
    // normalisation
    RealVector g_r = RealVector::Zero(d);
    RealMatrix g_a = RealMatrix::Zero(d, d);

    for (int n = 0; n < d; ++n) {
        const RealVector ba = bell_block_ * ev.a.row(n).transpose();
        g_r(n) -= ev.a.row(n).dot(ba);
        g_a.row(n) -= ev.r(n) * 2.0 * ba.transpose();
    }

    std::size_t idx = 0;
    for (const DiagBand& band : diag_bands_) {
        const double v = ev.violation[idx++];
        if (v == 0.0) continue;
        const double scale = mu_ * 2.0 * v;
        for (int n = 0; n < d; ++n) {
            g_r(n) += scale * ev.a(n, band.j) * ev.a(n, band.j);
            g_a(n, band.j) += scale * ev.r(n) * 2.0 * ev.a(n, band.j);
        }
    }
    for (const SubBlock& sub : s_bands_) {
        const double v = ev.violation[idx++];
        if (v == 0.0) continue;
        const double scale = mu_ * 2.0 * v;
        // recompute the restricted quadratic forms for the chain rule
        double num = 0.0, weight = 0.0;
        std::vector<RealVector> restricted(static_cast<std::size_t>(d));
        std::vector<RealVector> block_restricted(static_cast<std::size_t>(d));
        for (int n = 0; n < d; ++n) {
            RealVector rn(sub.k);
            for (int i = 0; i < sub.k; ++i) {
                rn(i) = ev.a(n, sub.indices[static_cast<std::size_t>(i)]);
            }
            restricted[static_cast<std::size_t>(n)] = rn;
            block_restricted[static_cast<std::size_t>(n)] = sub.block * rn;
            num += ev.r(n) * rn.dot(block_restricted[static_cast<std::size_t>(n)]);
            weight += ev.r(n) * rn.squaredNorm();
        }
        const double w_safe = std::max(weight, 1e-12);
        const double t = num / w_safe;
        for (int n = 0; n < d; ++n) {
            const RealVector& rn = restricted[static_cast<std::size_t>(n)];
            const RealVector& brn = block_restricted[static_cast<std::size_t>(n)];
            g_r(n) += scale * (rn.dot(brn) - t * rn.squaredNorm()) / w_safe;
            for (int i = 0; i < sub.k; ++i) {
                g_a(n, sub.indices[static_cast<std::size_t>(i)]) +=
                    scale * ev.r(n) * 2.0 * (brn(i) - t * rn(i)) / w_safe;
            }
        }
    }

    grad->resize(params.size());
    // softmax chain: ds_m = r_m (g_r[m] - <g_r, r>)
    const double mean = g_r.dot(ev.r);
    for (int m = 0; m < d; ++m) {
        (*grad)(m) = ev.r(m) * (g_r(m) - mean);
    }
    // normalised-row chain: dx = (g_free - (g_free . xhat) xhat) / |x|
    for (int n = 0; n < d; ++n) {
        RealVector g_free(d - 1);
        for (int i = 0, j = 0; j < d; ++j) {
            if (j == n) continue;
            g_free(i) = g_a(n, j);
            ++i;
        }
        const RealVector xhat = ev.x_unit.row(n).transpose();
        const RealVector gx = (g_free - g_free.dot(xhat) * xhat) / ev.x_norm(n);
        grad->segment(d + n * (d - 1), d - 1) = gx;
    }
    return value;
}

double WitnessProblem::bell_value(const RealVector& params) const { return evaluate(params).bell; }

std::vector<double> WitnessProblem::violations(const RealVector& params) const {
    return evaluate(params).violation;
}

WitnessAnsatz WitnessProblem::decode(const RealVector& params) const {
    const Eval ev = evaluate(params);
    return WitnessAnsatz{ev.r, ev.a};
}

} // namespace detail

WitnessResult maximize_s11(const ConstraintSet& constraints, const WitnessOptions& options) {
    constraints.validate();
    const int d = constraints.d;
    const int n_params = d * d;

    // penalty rounds share the same geometry; only mu escalates
    const double mu_schedule[] = {1e3, 1e5, 1e7};
    std::vector<detail::WitnessProblem> rounds;
    for (double mu : mu_schedule) rounds.emplace_back(constraints, mu);
    const detail::WitnessProblem& check = rounds.back();

    struct StartOutcome {
        double bell = -std::numeric_limits<double>::infinity();
        double worst = std::numeric_limits<double>::infinity();
        bool feasible = false;
        RealVector params;
    };
    std::vector<StartOutcome> outcomes(static_cast<std::size_t>(options.n_starts));

    parallel_for(options.n_starts, [&](int start) {
        Rng rng(options.seed, static_cast<std::uint64_t>(start));
        RealVector params(n_params);
        for (int i = 0; i < d; ++i) params(i) = 0.5 * rng.normal();
        for (int i = d; i < n_params; ++i) params(i) = rng.normal();

        for (const detail::WitnessProblem& problem : rounds) {
            auto fg = [&problem](const RealVector& x, RealVector& g) {
                return problem.eval(x, &g);
            };
            params = detail::lbfgs_minimize(fg, params, options.max_iter, 1e-9).x;
        }

        StartOutcome& out = outcomes[static_cast<std::size_t>(start)];
        out.params = params;
        out.bell = check.bell_value(params);
        out.worst = 0.0;
        for (double v : check.violations(params)) out.worst = std::max(out.worst, std::abs(v));
        out.feasible = out.worst <= options.feasibility_tol;
    });

    WitnessResult result;
    result.n_starts = options.n_starts;
    result.seed = options.seed;
    int feasible_count = 0;
    int best_index = -1;
    int fallback_index = -1;  // least-violating start, reported when infeasible
    for (int i = 0; i < options.n_starts; ++i) {
        const StartOutcome& out = outcomes[static_cast<std::size_t>(i)];
        if (out.feasible) {
            ++feasible_count;
            if (best_index < 0 || out.bell > outcomes[static_cast<std::size_t>(best_index)].bell) {
                best_index = i;
            }
        }
        if (fallback_index < 0 ||
            out.worst < outcomes[static_cast<std::size_t>(fallback_index)].worst) {
            fallback_index = i;
        }
    }
    result.converged_fraction =
        options.n_starts > 0 ? static_cast<double>(feasible_count) / options.n_starts : 0.0;
    result.feasible = best_index >= 0;
    const int report = result.feasible ? best_index : fallback_index;
    if (report < 0) {
        throw contract_error("maximize_s11: no starts were run");
    }
    const StartOutcome& chosen = outcomes[static_cast<std::size_t>(report)];
    result.best_s11 = chosen.bell;
    result.best_ansatz = check.decode(chosen.params);
    result.constraint_residuals = check.violations(chosen.params);
    result.worst_residual = chosen.worst;
    return result;
}

std::string WitnessResult::to_json() const {
    json j;
    j["best_s11"] = best_s11;
    j["feasible"] = feasible;
    j["n_starts"] = n_starts;
    j["converged_fraction"] = converged_fraction;
    j["worst_residual"] = worst_residual;
    j["seed"] = seed;
    j["constraint_residuals"] = constraint_residuals;
    j["ansatz"]["weights"] = std::vector<double>(best_ansatz.weights.data(),
                                                 best_ansatz.weights.data() +
                                                     best_ansatz.weights.size());
    j["ansatz"]["vectors"] = json::array();
    for (Eigen::Index n = 0; n < best_ansatz.vectors.rows(); ++n) {
        std::vector<double> row(static_cast<std::size_t>(best_ansatz.vectors.cols()));
        for (Eigen::Index c = 0; c < best_ansatz.vectors.cols(); ++c) {
            row[static_cast<std::size_t>(c)] = best_ansatz.vectors(n, c);
        }
        j["ansatz"]["vectors"].push_back(row);
    }
    return j.dump(2);
}

} // namespace qbell
