#include "qbell/sim.hpp"

#include <cmath>
#include <sstream>

#include "qbell/concentration.hpp"
#include "qbell/rng.hpp"
#include "qbell/spdc.hpp"

namespace qbell {

void ExperimentPlan::validate() const {
    if (!(total_rate >= 0.0)) {
        throw contract_error("ExperimentPlan: total_rate must be nonnegative");
    }
    if (!(integration_time > 0.0)) {
        throw contract_error("ExperimentPlan: integration_time must be positive");
    }
    if (!(crosstalk_epsilon >= 0.0 && crosstalk_epsilon < 1.0)) {
        throw contract_error("ExperimentPlan: crosstalk_epsilon must lie in [0, 1)");
    }
    require_density_matrix(state, d);
}

std::vector<CountRecord> simulate_counts(const ExperimentPlan& plan) {
    plan.validate();
    ProbabilityTable table = probability_table(plan.state, plan.d);
    if (plan.crosstalk_epsilon > 0.0) {
        table = crosstalk_mix(table, plan.crosstalk_epsilon);
    }
    const int d = plan.d;
    std::vector<CountRecord> records;
    records.reserve(static_cast<std::size_t>(4 * d * d));
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int v = 0; v < d; ++v) {
                for (int w = 0; w < d; ++w) {
                    const double lambda =
                        plan.total_rate * plan.integration_time * table.at(a, b)(v, w);
                    const std::uint64_t cell =
                        static_cast<std::uint64_t>(((a * 2 + b) * d + v) * d + w);
                    Rng rng(plan.seed, cell);
                    records.push_back({a, b, v, w, rng.poisson(lambda)});
                }
            }
        }
    }
    return records;
}

ProbabilityTable crosstalk_mix(const ProbabilityTable& table, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw contract_error("crosstalk_mix: epsilon must lie in [0, 1)");
    }
    if (epsilon == 0.0) return table;

    const int d = table.d;
    // One arm's kernel: each outcome donates eps/2 to every existing
    // neighbour; edges keep the share that has nowhere to go, which makes a
    // uniform table a fixed point.
    auto leak = [&](const RealMatrix& m, bool rows, double eps) {
        RealMatrix out = m;
        for (int i = 0; i < d; ++i) {
            for (int delta : {-1, 1}) {
                const int nbr = i + delta;
                if (nbr < 0 || nbr >= d) continue;
                if (rows) {
                    out.row(nbr) += (eps / 2.0) * m.row(i);
                    out.row(i) -= (eps / 2.0) * m.row(i);
                } else {
                    out.col(nbr) += (eps / 2.0) * m.col(i);
                    out.col(i) -= (eps / 2.0) * m.col(i);
                }
            }
        }
        return out;
    };

    ProbabilityTable mixed = table;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            mixed.at(a, b) = leak(leak(table.at(a, b), true, epsilon / 2.0), false, epsilon / 2.0);
        }
    }
    mixed.normalize();
    return mixed;
}

namespace {

struct Tallied {
    int d = 0;
    std::array<std::array<RealMatrix, 2>, 2> counts;
    RealMatrix& at(int a, int b) { return counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
    const RealMatrix& at(int a, int b) const {
        return counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
};

Tallied tally(const std::vector<CountRecord>& records, int d) {
    Tallied t;
    t.d = d;
    std::array<std::array<Eigen::MatrixXi, 2>, 2> seen;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            t.at(a, b) = RealMatrix::Zero(d, d);
            seen[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                Eigen::MatrixXi::Zero(d, d);
        }
    }
    for (const CountRecord& r : records) {
        if (r.a < 0 || r.a > 1 || r.b < 0 || r.b > 1 || r.v < 0 || r.v >= d || r.w < 0 ||
            r.w >= d) {
            throw contract_error("estimate_s_with_sigma: record outside the (a,b,v,w) range");
        }
        t.at(r.a, r.b)(r.v, r.w) += static_cast<double>(r.count);
        seen[static_cast<std::size_t>(r.a)][static_cast<std::size_t>(r.b)](r.v, r.w) += 1;
    }
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            if ((seen[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].array() == 0)
                    .any()) {
                std::ostringstream os;
                os << "estimate_s_with_sigma: missing cells for setting pair (" << a << "," << b
                   << ")";
                throw contract_error(os.str());
            }
        }
    }
    return t;
}

BellValue estimate_from_tally(const Tallied& t) {
    const int d = t.d;
    const auto coeff = bell_coefficients(d);
    double s = 0.0;
    double variance = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double total = t.at(a, b).sum();
            if (total <= 0.0) {
                std::ostringstream os;
                os << "estimate_s_with_sigma: no counts for setting pair (" << a << "," << b
                   << ")";
                throw contract_error(os.str());
            }
            const RealMatrix& c = coeff[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            const double s_ab = (c.array() * t.at(a, b).array()).sum() / total;
            s += s_ab;
            // d s / d n_cell = (coeff_cell - s_ab) / total; Var(n) = n
            variance +=
                (((c.array() - s_ab) / total).square() * t.at(a, b).array()).sum();
        }
    }
    return BellValue{d, s, std::sqrt(variance)};
}

} // namespace

BellValue estimate_s_with_sigma(const std::vector<CountRecord>& records, int d) {
    return estimate_from_tally(tally(records, d));
}

double bootstrap_sigma(const std::vector<CountRecord>& records, int d, int replicas,
                       std::uint64_t seed) {
    const Tallied observed = tally(records, d);
    double sum = 0.0, sum_sq = 0.0;
    for (int rep = 0; rep < replicas; ++rep) {
        Rng rng(seed, static_cast<std::uint64_t>(rep) + 0x626f6f74ULL);
        Tallied resampled = observed;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                for (int v = 0; v < d; ++v) {
                    for (int w = 0; w < d; ++w) {
                        resampled.at(a, b)(v, w) =
                            static_cast<double>(rng.poisson(observed.at(a, b)(v, w)));
                    }
                }
            }
        }
        const double s = estimate_from_tally(resampled).s;
        sum += s;
        sum_sq += s * s;
    }
    const double mean = sum / replicas;
    return std::sqrt(std::max(0.0, sum_sq / replicas - mean * mean));
}

std::vector<SweepRow> run_sd_sweep(double gamma, int d_min, int d_max, bool filtered,
                                   const SweepOptions& options) {
    if (d_min < 2 || d_max > 14 || d_min > d_max) {
        throw size_error("run_sd_sweep: need 2 <= d_min <= d_max <= 14");
    }
    std::vector<SweepRow> rows;
    for (int d = d_min; d <= d_max; ++d) {
        ReferenceState state = lorentzian_state(gamma, d);
        double rate = options.total_rate;
        if (filtered) {
            const FilterSpec filter = design_filter(state);
            const FilterOutcome outcome = apply_filter(state, filter);
            state = outcome.filtered;
            rate *= outcome.success_probability;  // fewer pairs survive the filter
        }
        ExperimentPlan plan;
        plan.d = d;
        plan.state = state.density();
        plan.total_rate = rate;
        plan.integration_time = options.integration_time;
        plan.crosstalk_epsilon = options.crosstalk_epsilon;
        plan.seed = options.seed + static_cast<std::uint64_t>(d);
        const BellValue bv = estimate_s_with_sigma(simulate_counts(plan), d);
        rows.push_back({d, bv.s, bv.sigma, filtered, gamma, plan.seed});
    }
    return rows;
}

} // namespace qbell
