#include <doctest.h>

#include <cmath>

#include "qbell/bell.hpp"
#include "qbell/rng.hpp"
#include "qbell/spdc.hpp"

using namespace qbell;

namespace {

ComplexMatrix random_density(Rng& rng, int dim) {
    ComplexMatrix g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    }
    ComplexMatrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

ComplexMatrix golden_s2() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    const double r = 2.0 * std::sqrt(2.0);
    m(0, 3) = r;
    m(3, 0) = r;
    return m;
}

ComplexMatrix golden_s3() {
    ComplexMatrix m = ComplexMatrix::Zero(9, 9);
    const double r = 2.0 / std::sqrt(3.0);
    auto put = [&](int i, int j, double x) {
        m(i, j) = x;
        m(j, i) = x;
    };
    put(0, 4, r);
    put(0, 8, 2.0);
    put(1, 5, r);
    put(3, 7, r);
    put(4, 8, r);
    return m;
}

} // namespace

TEST_CASE("printed d=2 operator is reproduced to machine precision") {
    const BellOperator op = bell_operator(2);
    CHECK((op.matrix - golden_s2()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("printed d=3 operator is reproduced to machine precision") {
    const BellOperator op = bell_operator(3);
    CHECK((op.matrix - golden_s3()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("operator entries are real nonnegative with zero diagonal up to d=14") {
    for (int d = 2; d <= 14; ++d) {
        const BellOperator op = bell_operator(d);
        CHECK(max_asymmetry(op.matrix) < tol::hermitian);
        CHECK(op.matrix.imag().cwiseAbs().maxCoeff() < 1e-12);
        CHECK(op.matrix.real().minCoeff() > -1e-12);
        CHECK(op.matrix.diagonal().cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("operator dimension range") {
    CHECK_THROWS_AS(bell_operator(1), size_error);
    CHECK_THROWS_AS(bell_operator(15), size_error);
}

TEST_CASE("maximally mixed state gives the flat table") {
    const int d = 3;
    const ComplexMatrix rho = ComplexMatrix::Identity(d * d, d * d) / (d * d);
    const ProbabilityTable t = probability_table(rho, d);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            CHECK((t.at(a, b).array() - 1.0 / (d * d)).abs().maxCoeff() < 1e-12);
        }
    }
    CHECK(std::abs(s_from_table(t).s) < 1e-12);
}

TEST_CASE("product basis state |0,0> gives 1/4 everywhere at d=2") {
    ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
    rho(0, 0) = 1.0;
    const ProbabilityTable t = probability_table(rho, 2);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            CHECK((t.at(a, b).array() - 0.25).abs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("max entangled d=2 reproduces the CHSH point") {
    const ComplexMatrix rho = max_entangled_state(2).density();
    const BellValue bv = s_from_table(probability_table(rho, 2));
    CHECK(bv.s == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("invalid density matrices are rejected with the violated property") {
    const int d = 2;
    ComplexMatrix not_hermitian = ComplexMatrix::Zero(4, 4);
    not_hermitian(0, 0) = 1.0;
    not_hermitian(0, 1) = 0.5;
    CHECK_THROWS_WITH_AS(probability_table(not_hermitian, d),
                         doctest::Contains("not Hermitian"), contract_error);

    ComplexMatrix bad_trace = ComplexMatrix::Identity(4, 4);
    CHECK_THROWS_WITH_AS(probability_table(bad_trace, d), doctest::Contains("trace"),
                         contract_error);

    ComplexMatrix not_psd = ComplexMatrix::Zero(4, 4);
    not_psd(0, 0) = 1.5;
    not_psd(1, 1) = -0.5;
    CHECK_THROWS_WITH_AS(probability_table(not_psd, d),
                         doctest::Contains("positive semidefinite"), contract_error);
}

TEST_CASE("table S1 spot checks via the probability route") {
    CHECK(s_from_table(probability_table(max_entangled_state(5).density(), 5)).s ==
          doctest::Approx(2.9105).epsilon(5e-5));
    CHECK(s_from_table(probability_table(max_entangled_state(14).density(), 14)).s ==
          doctest::Approx(2.9483).epsilon(5e-5));
}

TEST_CASE("operator and table routes agree on random states") {
    Rng rng(2024);
    for (int d = 2; d <= 8; ++d) {
        const BellOperator op = bell_operator(d);
        const int trials = 200 / (d * d) + 10;
        for (int t = 0; t < trials; ++t) {
            const ComplexMatrix rho = random_density(rng, d * d);
            const double via_operator = (op.matrix * rho).trace().real();
            const double via_table = s_from_table(probability_table(rho, d)).s;
            CHECK(std::abs(via_operator - via_table) < tol::eig_residual);
        }
    }
}

TEST_CASE("S is linear in the state") {
    Rng rng(5);
    const int d = 4;
    const ComplexMatrix rho1 = random_density(rng, d * d);
    const ComplexMatrix rho2 = random_density(rng, d * d);
    const double s1 = s_from_table(probability_table(rho1, d)).s;
    const double s2 = s_from_table(probability_table(rho2, d)).s;
    for (double lambda : {0.25, 0.5, 0.9}) {
        const ComplexMatrix mix = lambda * rho1 + (1.0 - lambda) * rho2;
        const double s_mix = s_from_table(probability_table(mix, d)).s;
        CHECK(std::abs(s_mix - (lambda * s1 + (1.0 - lambda) * s2)) < 1e-10);
    }
}

TEST_CASE("maximal violation dominates the max entangled expectation") {
    CHECK(max_violation(2).value ==
          doctest::Approx(expectation_max_entangled(2)).epsilon(1e-10));
    for (int d = 3; d <= 14; ++d) {
        CHECK(max_violation(d).value > expectation_max_entangled(d) + 1e-3);
    }
}

TEST_CASE("max entangled d=2 expectation is exactly the Tsirelson point") {
    CHECK(expectation_max_entangled(2) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("brute-force LHV bound is exactly 2 for d=2 and d=3") {
    CHECK(lhv_bound_bruteforce(2) == 2.0);
    CHECK(lhv_bound_bruteforce(3) == 2.0);
    CHECK(std::abs(lhv_bound_bruteforce(4) - 2.0) < 1e-12);
    CHECK_THROWS_AS(lhv_bound_bruteforce(5), size_error);
}

TEST_CASE("deterministic strategies never exceed 2; d=2 is two-sided") {
    // the inequality is one-sided: for d >= 3 the deterministic minimum
    // reaches -4 (all four negative aggregates can hold at once)
    for (int d : {2, 3}) {
        const auto coeff = bell_coefficients(d);
        double lowest = 10.0;
        for (int v0 = 0; v0 < d; ++v0) {
            for (int v1 = 0; v1 < d; ++v1) {
                for (int w0 = 0; w0 < d; ++w0) {
                    for (int w1 = 0; w1 < d; ++w1) {
                        const int v[2] = {v0, v1};
                        const int w[2] = {w0, w1};
                        double s = 0.0;
                        for (int a = 0; a < 2; ++a) {
                            for (int b = 0; b < 2; ++b) {
                                s += coeff[static_cast<std::size_t>(a)]
                                          [static_cast<std::size_t>(b)](v[a], w[b]);
                            }
                        }
                        CHECK(s <= 2.0 + 1e-12);
                        lowest = std::min(lowest, s);
                    }
                }
            }
        }
        CHECK(lowest == doctest::Approx(d == 2 ? -2.0 : -4.0).epsilon(1e-12));
    }
}

TEST_CASE("separable mixtures respect the local bound") {
    Rng rng(99);
    for (int d = 2; d <= 6; ++d) {
        for (int trial = 0; trial < 60; ++trial) {
            const int terms = 1 + rng.uniform_int(4);
            ComplexMatrix rho = ComplexMatrix::Zero(d * d, d * d);
            double total = 0.0;
            for (int m = 0; m < terms; ++m) {
                const double weight = rng.uniform_pos();
                total += weight;
                rho += weight * tensor_product(random_density(rng, d), random_density(rng, d));
            }
            rho /= total;
            const double s = s_from_table(probability_table(rho, d)).s;
            CHECK(s <= 2.0 + tol::separable);
        }
    }
}

TEST_CASE("uniform deterministic table renormalisation flag") {
    ProbabilityTable t = ProbabilityTable::zeros(2);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) t.at(a, b).setConstant(2.0);  // unnormalised counts
    }
    const BellValue bv = s_from_table(t);
    CHECK(std::abs(bv.s) < 1e-12);
    t.normalize();
    CHECK(t.renormalized);
}

TEST_CASE("restriction of the max entangled state is again max entangled") {
    for (int d : {5, 11}) {
        const ComplexMatrix rho = max_entangled_state(d).density();
        for (int k = 2; k < d; ++k) {
            auto [restricted, weight] = restrict_state(rho, d, k);
            CHECK(weight == doctest::Approx(static_cast<double>(k) / d).epsilon(1e-12));
            restricted /= weight;
            const ComplexMatrix expected = max_entangled_state(k).density();
            CHECK((restricted - expected).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}
