#include <doctest.h>

#include <cmath>

#include "qbell/bell.hpp"
#include "qbell/concentration.hpp"
#include "qbell/rng.hpp"

using namespace qbell;

TEST_CASE("flat spectrum designs the identity filter") {
    const FilterSpec filter = design_filter(max_entangled_state(7));
    CHECK((filter.diag.array() - 1.0).abs().maxCoeff() < 1e-15);
    const FilterOutcome outcome = apply_filter(max_entangled_state(7), filter);
    CHECK(outcome.success_probability == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-mode design matches the closed form") {
    RealVector coeffs(2);
    coeffs << 0.8, 0.6;
    const FilterSpec filter = design_filter(ReferenceState::custom(2, coeffs));
    CHECK(filter.diag(0) == doctest::Approx(std::sqrt(0.6 / 0.8)).epsilon(1e-12));
    CHECK(filter.diag(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("designed d=11 filter is symmetric with its minimum at ell = 0") {
    const ReferenceState source = lorentzian_state(7.58, 11);
    const FilterSpec filter = design_filter(source);
    Eigen::Index argmin;
    filter.diag.minCoeff(&argmin);
    CHECK(argmin == 5);  // ell = 0 sits in the middle of the ascending list
    for (int i = 0; i < 5; ++i) {
        CHECK(filter.diag(i) == doctest::Approx(filter.diag(10 - i)).epsilon(1e-12));
    }
    CHECK(filter.diag.maxCoeff() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("the published d=11 diagonal ships verbatim") {
    const FilterSpec preset = paper_filter_d11();
    CHECK(preset.d == 11);
    CHECK(preset.diag(0) == 1.00);
    CHECK(preset.diag(5) == 0.90);
    CHECK(preset.diag(10) == 0.97);
}

TEST_CASE("designed filter concentrates its own source to |Phi>") {
    const ReferenceState source = lorentzian_state(7.58, 11);
    const FilterOutcome outcome = apply_filter(source, design_filter(source));
    CHECK(fidelity_max_entangled(outcome.filtered) > 1.0 - 1e-12);

    // amplitudes all equal
    const RealVector& c = outcome.filtered.coeffs;
    CHECK((c.array() - c(0)).abs().maxCoeff() < 1e-12);

    // success probability d * c_min^2
    const double c_min = source.coeffs.minCoeff();
    CHECK(outcome.success_probability == doctest::Approx(11.0 * c_min * c_min).epsilon(1e-12));
}

TEST_CASE("identity filter is a no-op with unit success") {
    const ReferenceState source = lorentzian_state(5.0, 9);
    const FilterOutcome outcome = apply_filter(source, identity_filter(9));
    CHECK((outcome.filtered.coeffs - source.coeffs).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(outcome.success_probability == doctest::Approx(1.0).epsilon(1e-15));

    const ComplexMatrix rho = source.density();
    const DensityFilterOutcome dout = apply_filter(rho, 9, identity_filter(9));
    CHECK((dout.filtered - rho).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(dout.success_probability == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pure and density filter paths agree") {
    const ReferenceState source = lorentzian_state(7.58, 5);
    Rng rng(17);
    RealVector diag(5);
    for (int i = 0; i < 5; ++i) diag(i) = rng.uniform_pos();
    diag /= diag.maxCoeff();
    const FilterSpec filter{5, diag};

    const FilterOutcome pure = apply_filter(source, filter);
    const DensityFilterOutcome dens = apply_filter(source.density(), 5, filter);
    CHECK(dens.success_probability ==
          doctest::Approx(pure.success_probability).epsilon(1e-12));
    CHECK((dens.filtered - pure.filtered.density()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("completeness certificate") {
    SUBCASE("identity filter leaves nothing for outcome 2") {
        const ComplexMatrix o2sq = completeness_certificate(identity_filter(3));
        CHECK(o2sq.cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("two-mode example") {
        RealVector diag(2);
        diag << 1.0, 0.5;
        const ComplexMatrix o2sq = completeness_certificate(FilterSpec{2, diag});
        // per-arm (1, 0.5): product-space gains (1, .5, .5, .25) -> 1 - gain^2
        RealVector expected(4);
        expected << 0.0, 0.75, 0.75, 0.9375;
        CHECK((o2sq.diagonal().real() - expected).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("designed filter eigenvalues live in [0, 1]") {
        const FilterSpec filter = design_filter(lorentzian_state(7.58, 11));
        const ComplexMatrix o2sq = completeness_certificate(filter);
        const EigenDecomposition eig = eig_hermitian(o2sq);
        CHECK(eig.eigenvalues.front() <= 1.0 + tol::psd);
        CHECK(eig.eigenvalues.back() >= -tol::psd);
    }
    SUBCASE("entries above one violate completeness") {
        RealVector diag(2);
        diag << 1.2, 0.5;
        CHECK_THROWS_WITH_AS(completeness_certificate(FilterSpec{2, diag}),
                             doctest::Contains("completeness"), contract_error);
    }
}

TEST_CASE("zero amplitudes break the filter design with the mode named") {
    RealVector coeffs(3);
    coeffs << 1.0, 0.0, 1.0;
    coeffs /= coeffs.norm();
    const ReferenceState state{3, coeffs, StateKind::custom};
    CHECK_THROWS_WITH_AS(design_filter(state), doctest::Contains("ell = 0"), contract_error);
}

TEST_CASE("annihilating filters are rejected rather than divided by zero") {
    RealVector coeffs(3);
    coeffs << 0.0, 1.0, 0.0;
    const ReferenceState state = ReferenceState::custom(3, coeffs);
    RealVector diag(3);
    diag << 1.0, 0.0, 1.0;  // kills the only occupied mode
    CHECK_THROWS_WITH_AS(apply_filter(state, FilterSpec{3, diag}),
                         doctest::Contains("annihilates"), contract_error);
}

TEST_CASE("product states stay product states under filtering") {
    Rng rng(23);
    const int d = 4;
    for (int trial = 0; trial < 20; ++trial) {
        ComplexVector a(d), b(d);
        for (int i = 0; i < d; ++i) {
            a(i) = Complex(rng.normal(), rng.normal());
            b(i) = Complex(rng.normal(), rng.normal());
        }
        a /= a.norm();
        b /= b.norm();
        const ComplexMatrix rho =
            tensor_product(ComplexMatrix(a * a.adjoint()), ComplexMatrix(b * b.adjoint()));

        RealVector diag(d);
        for (int i = 0; i < d; ++i) diag(i) = 0.2 + 0.8 * rng.uniform();
        diag /= diag.maxCoeff();
        const DensityFilterOutcome out = apply_filter(rho, d, FilterSpec{d, diag});

        // Schmidt rank 1 <=> the d x d reshaped amplitude matrix has rank 1;
        // for a product density matrix the partial transpose test is overkill,
        // the second singular value of the reshape of the top eigenvector does it.
        const EigenDecomposition eig = eig_hermitian(out.filtered);
        CHECK(eig.eigenvalues.front() > 1.0 - 1e-10);  // still pure
        ComplexMatrix amp(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) amp(i, j) = eig.eigenvectors.col(0)(i * d + j);
        }
        Eigen::JacobiSVD<ComplexMatrix> svd(amp);
        CHECK(svd.singularValues()(1) < 1e-10);
    }
}

TEST_CASE("filtering commutes with convex mixing up to success weights") {
    Rng rng(31);
    const int d = 3;
    std::vector<ComplexMatrix> parts;
    std::vector<double> weights;
    ComplexMatrix mixed = ComplexMatrix::Zero(d * d, d * d);
    double total = 0.0;
    for (int m = 0; m < 3; ++m) {
        ComplexVector psi(d * d);
        for (int i = 0; i < d * d; ++i) psi(i) = Complex(rng.normal(), rng.normal());
        psi /= psi.norm();
        parts.push_back(psi * psi.adjoint());
        const double w = rng.uniform_pos();
        weights.push_back(w);
        total += w;
    }
    for (std::size_t m = 0; m < parts.size(); ++m) {
        mixed += (weights[m] / total) * parts[m];
    }

    RealVector diag(d);
    diag << 1.0, 0.6, 0.3;
    const FilterSpec filter{d, diag};

    const DensityFilterOutcome whole = apply_filter(mixed, d, filter);

    ComplexMatrix recombined = ComplexMatrix::Zero(d * d, d * d);
    double norm = 0.0;
    for (std::size_t m = 0; m < parts.size(); ++m) {
        const DensityFilterOutcome part = apply_filter(parts[m], d, filter);
        const double w = (weights[m] / total) * part.success_probability;
        recombined += w * part.filtered;
        norm += w;
    }
    recombined /= norm;
    CHECK((whole.filtered - recombined).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(whole.success_probability == doctest::Approx(norm).epsilon(1e-12));
}

TEST_CASE("separability sweep holds the local bound before and after filtering") {
    const SeparabilityReport report = separability_preservation_test(60, 3, 1234);
    CHECK(report.pass);
    CHECK(report.max_s_unfiltered <= 2.0 + tol::separable);
    CHECK(report.max_s_filtered <= 2.0 + tol::separable);
    CHECK_THROWS_AS(separability_preservation_test(1, 7, 1), size_error);
}
