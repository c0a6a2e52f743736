#include <doctest.h>

#include <cmath>

#include "qbell/concentration.hpp"
#include "qbell/sim.hpp"
#include "qbell/spdc.hpp"

using namespace qbell;

namespace {

ExperimentPlan plan_for(const ReferenceState& state, double rate, std::uint64_t seed,
                        double epsilon = 0.0) {
    ExperimentPlan plan;
    plan.d = state.d;
    plan.state = state.density();
    plan.total_rate = rate;
    plan.integration_time = 1.0;
    plan.crosstalk_epsilon = epsilon;
    plan.seed = seed;
    return plan;
}

} // namespace

TEST_CASE("same seed reproduces identical records") {
    const ExperimentPlan plan = plan_for(max_entangled_state(3), 500.0, 77);
    const auto first = simulate_counts(plan);
    const auto second = simulate_counts(plan);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].count == second[i].count);
    }
    const auto other = simulate_counts(plan_for(max_entangled_state(3), 500.0, 78));
    bool any_different = false;
    for (std::size_t i = 0; i < first.size(); ++i) {
        any_different |= first[i].count != other[i].count;
    }
    CHECK(any_different);
}

TEST_CASE("zero rate gives zero counts") {
    const auto records = simulate_counts(plan_for(max_entangled_state(2), 0.0, 5));
    for (const CountRecord& r : records) CHECK(r.count == 0);
}

TEST_CASE("large-lambda frequencies match the Born probabilities") {
    const int d = 3;
    const ReferenceState state = max_entangled_state(d);
    const double lambda = 1e8;
    const auto records = simulate_counts(plan_for(state, lambda, 99));
    const ProbabilityTable expected = probability_table(state.density(), d);
    for (const CountRecord& r : records) {
        const double p = expected.at(r.a, r.b)(r.v, r.w);
        const double cell_lambda = lambda * p;
        if (cell_lambda < 100.0) continue;
        const double relative = std::abs(r.count / cell_lambda - 1.0);
        CHECK(relative < 3.0 / std::sqrt(cell_lambda) + 1e-6);
    }
}

TEST_CASE("crosstalk epsilon = 0 is the identity") {
    const ProbabilityTable t = probability_table(max_entangled_state(5).density(), 5);
    const ProbabilityTable mixed = crosstalk_mix(t, 0.0);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            CHECK((mixed.at(a, b) - t.at(a, b)).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("uniform tables are a crosstalk fixed point") {
    ProbabilityTable t = ProbabilityTable::zeros(4);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) t.at(a, b).setConstant(1.0 / 16.0);
    }
    const ProbabilityTable mixed = crosstalk_mix(t, 0.5);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            CHECK((mixed.at(a, b).array() - 1.0 / 16.0).abs().maxCoeff() < 1e-15);
        }
    }
}

TEST_CASE("crosstalk moves about epsilon of a diagonal table off the diagonal") {
    const int d = 11;
    ProbabilityTable t = ProbabilityTable::zeros(d);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int j = 0; j < d; ++j) t.at(a, b)(j, j) = 1.0 / d;
        }
    }
    const ProbabilityTable mixed = crosstalk_mix(t, 0.08);
    const double diagonal_weight = mixed.at(0, 0).diagonal().sum();
    const double moved = 1.0 - diagonal_weight;
    CHECK(moved == doctest::Approx(0.08).epsilon(0.15));  // edge modes leak less
}

TEST_CASE("crosstalk preserves per-setting normalisation") {
    const ProbabilityTable t = probability_table(lorentzian_state(7.58, 6).density(), 6);
    const ProbabilityTable mixed = crosstalk_mix(t, 0.3);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            CHECK(mixed.at(a, b).sum() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("estimator converges to the CHSH point with vanishing sigma") {
    const auto records = simulate_counts(plan_for(max_entangled_state(2), 1e8, 321));
    const BellValue bv = estimate_s_with_sigma(records, 2);
    CHECK(bv.s == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-3));
    CHECK(bv.sigma < 1e-3);
}

TEST_CASE("sigma scales as one over sqrt N") {
    const ReferenceState state = lorentzian_state(7.58, 5);
    double sigma_small_sum = 0.0, sigma_large_sum = 0.0;
    const int repeats = 12;
    for (int i = 0; i < repeats; ++i) {
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);
        sigma_small_sum += estimate_s_with_sigma(simulate_counts(plan_for(state, 1e4, seed)), 5).sigma;
        sigma_large_sum +=
            estimate_s_with_sigma(simulate_counts(plan_for(state, 4e4, seed + 50)), 5).sigma;
    }
    const double ratio = sigma_small_sum / sigma_large_sum;
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("uniform counts estimate S near zero with consistent sigma") {
    std::vector<CountRecord> records;
    const int d = 3;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int v = 0; v < d; ++v) {
                for (int w = 0; w < d; ++w) records.push_back({a, b, v, w, 1000});
            }
        }
    }
    const BellValue bv = estimate_s_with_sigma(records, d);
    CHECK(std::abs(bv.s) < 1e-12);
    CHECK(bv.sigma > 0.0);
}

TEST_CASE("missing cells are reported") {
    std::vector<CountRecord> records = {{0, 0, 0, 0, 5}};
    CHECK_THROWS_WITH_AS(estimate_s_with_sigma(records, 2), doctest::Contains("missing"),
                         contract_error);
}

TEST_CASE("bootstrap sigma agrees with propagation within 20 percent") {
    const auto records = simulate_counts(plan_for(lorentzian_state(7.58, 3), 2e4, 777));
    const BellValue bv = estimate_s_with_sigma(records, 3);
    const double boot = bootstrap_sigma(records, 3, 400, 4242);
    CHECK(std::abs(boot - bv.sigma) / bv.sigma < 0.2);
}

TEST_CASE("single-dimension sweep emits one row") {
    SweepOptions options;
    options.total_rate = 1e4;
    options.seed = 11;
    const auto rows = run_sd_sweep(7.58, 2, 2, false, options);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].d == 2);
    CHECK(rows[0].gamma == 7.58);
}

TEST_CASE("ideal filtered sweep approaches the max-entangled violations") {
    SweepOptions options;
    options.total_rate = 1e7;
    options.seed = 2718;
    const auto rows = run_sd_sweep(7.58, 2, 6, true, options);
    const double expected[] = {2.8284, 2.8729, 2.8962, 2.9105, 2.9202};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].s == doctest::Approx(expected[i]).epsilon(2e-3));
        CHECK(rows[i].s <= max_violation(rows[i].d).value + 1e-6);
    }
}

TEST_CASE("filtered sweeps hold violations to higher d than unfiltered under crosstalk") {
    SweepOptions options;
    options.total_rate = 1e6;
    options.crosstalk_epsilon = 0.08;
    options.seed = 31415;
    const auto filtered = run_sd_sweep(7.58, 2, 14, true, options);
    const auto unfiltered = run_sd_sweep(7.58, 2, 14, false, options);
    auto last_violation = [](const std::vector<SweepRow>& rows) {
        int last = 0;
        for (const SweepRow& row : rows) {
            if (row.s > 2.0) last = row.d;
        }
        return last;
    };
    CHECK(last_violation(filtered) >= last_violation(unfiltered));
    // filtered stays above the unfiltered curve dimension by dimension
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        CHECK(filtered[i].s + 3.0 * filtered[i].sigma + 1e-9 >= unfiltered[i].s);
    }
}
