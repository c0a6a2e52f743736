#include "qbell/concentration.hpp"

#include <cmath>
#include <sstream>

#include "qbell/bell.hpp"
#include "qbell/rng.hpp"

namespace qbell {

// O_A = O_B = o: the same diagonal matrix acts in each arm's own
// computational basis. Entry j pairs with ell = ells[j] on the signal arm;
// the idler arm therefore carries the mirrored physical-ell profile, and the
// two photons of a correlated pair |j,j> see the same entry.

void FilterSpec::validate() const {
    if (diag.size() != d) {
        throw size_error("FilterSpec: diagonal length does not match d");
    }
    for (int i = 0; i < d; ++i) {
        if (!(diag(i) >= 0.0 && diag(i) <= 1.0)) {
            std::ostringstream os;
            os << "FilterSpec: completeness violation, entry " << i << " = " << diag(i)
               << " outside [0, 1]";
            throw contract_error(os.str());
        }
    }
}

FilterSpec identity_filter(int d) {
    DimensionSpec::make(d);
    return FilterSpec{d, RealVector::Ones(d)};
}

FilterSpec design_filter(const ReferenceState& spectrum) {
    const int d = spectrum.d;
    const ModeMap map = mode_map(d);
    for (int j = 0; j < d; ++j) {
        if (!(spectrum.coeffs(j) > 0.0)) {
            std::ostringstream os;
            os << "design_filter: amplitude for ell = " << map.signal_ell(j)
               << " is not strictly positive";
            throw contract_error(os.str());
        }
    }
    const double c_min = spectrum.coeffs.minCoeff();
    RealVector diag(d);
    for (int j = 0; j < d; ++j) {
        diag(j) = std::sqrt(c_min / spectrum.coeffs(j));
    }
    diag /= diag.maxCoeff();  // unit max keeps the success probability maximal
    return FilterSpec{d, diag};
}

FilterSpec paper_filter_d11() {
    RealVector diag(11);
    diag << 1.00, 0.97, 0.94, 0.92, 0.91, 0.90, 0.91, 0.92, 0.93, 0.95, 0.97;
    return FilterSpec{11, diag};
}

FilterOutcome apply_filter(const ReferenceState& state, const FilterSpec& filter, FilterArms arms) {
    filter.validate();
    if (filter.d != state.d) {
        throw size_error("apply_filter: filter dimension does not match state");
    }
    const int d = state.d;
    const RealVector& o = filter.diag;
    RealVector filtered(d);
    for (int j = 0; j < d; ++j) {
        const double gain = arms == FilterArms::both ? o(j) * o(j) : o(j);
        filtered(j) = state.coeffs(j) * gain;
    }
    const double success = filtered.squaredNorm();
    if (success < 1e-15) {
        throw contract_error("apply_filter: filter annihilates the state's support");
    }
    return FilterOutcome{ReferenceState{d, filtered / std::sqrt(success), StateKind::custom},
                         success};
}

DensityFilterOutcome apply_filter(const ComplexMatrix& rho, int d, const FilterSpec& filter,
                                  FilterArms arms) {
    filter.validate();
    if (filter.d != d) {
        throw size_error("apply_filter: filter dimension does not match state");
    }
    require_density_matrix(rho, d);
    const RealVector& o = filter.diag;
    RealVector o1(d * d);
    for (int j1 = 0; j1 < d; ++j1) {
        for (int j2 = 0; j2 < d; ++j2) {
            o1(j1 * d + j2) = arms == FilterArms::both ? o(j1) * o(j2) : o(j1);
        }
    }
    ComplexMatrix filtered = o1.asDiagonal() * rho * o1.asDiagonal();
    const double success = filtered.trace().real();
    if (success < 1e-15) {
        throw contract_error("apply_filter: filter annihilates the state's support");
    }
    filtered /= success;
    return DensityFilterOutcome{std::move(filtered), success};
}

ComplexMatrix completeness_certificate(const FilterSpec& filter) {
    filter.validate();
    const int d = filter.d;
    const RealVector& o = filter.diag;
    ComplexMatrix o2sq = ComplexMatrix::Zero(d * d, d * d);
    for (int j1 = 0; j1 < d; ++j1) {
        for (int j2 = 0; j2 < d; ++j2) {
            const double o1 = o(j1) * o(j2);
            o2sq(j1 * d + j2, j1 * d + j2) = 1.0 - o1 * o1;
        }
    }
    for (int i = 0; i < d * d; ++i) {
        const double eig = o2sq(i, i).real();
        if (eig < -tol::psd || eig > 1.0 + tol::psd) {
            std::ostringstream os;
            os << "completeness_certificate: eigenvalue " << eig << " outside [0, 1]";
            throw contract_error(os.str());
        }
    }
    return o2sq;
}

namespace {

ComplexVector random_pure_state(Rng& rng, int d) {
    ComplexVector v(d);
    for (int i = 0; i < d; ++i) v(i) = Complex(rng.normal(), rng.normal());
    return v / v.norm();
}

ComplexMatrix random_local_density(Rng& rng, int d) {
    // mixture of two random pure states
    const ComplexVector a = random_pure_state(rng, d);
    const ComplexVector b = random_pure_state(rng, d);
    const double p = rng.uniform();
    return p * (a * a.adjoint()) + (1.0 - p) * (b * b.adjoint());
}

ComplexMatrix random_separable(Rng& rng, int d) {
    const int terms = 1 + rng.uniform_int(4);
    RealVector weights(terms);
    for (int m = 0; m < terms; ++m) weights(m) = rng.uniform_pos();
    weights /= weights.sum();
    ComplexMatrix rho = ComplexMatrix::Zero(d * d, d * d);
    for (int m = 0; m < terms; ++m) {
        rho += weights(m) *
               tensor_product(random_local_density(rng, d), random_local_density(rng, d));
    }
    return rho;
}

FilterSpec random_filter(Rng& rng, int d) {
    RealVector diag(d);
    for (int i = 0; i < d; ++i) diag(i) = rng.uniform_pos();
    diag /= diag.maxCoeff();
    return FilterSpec{d, diag};
}

double max_s_over_restrictions(const ComplexMatrix& rho, int d) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= d; ++k) {
        auto [restricted, weight] = restrict_state(rho, d, k);
        if (weight < 1e-12) continue;
        restricted /= weight;
        const BellValue bv = s_from_table(probability_table(restricted, k));
        worst = std::max(worst, bv.s);
    }
    return worst;
}

} // namespace

SeparabilityReport separability_preservation_test(int n_trials, int d, std::uint64_t seed) {
    if (d > 6) {
        throw size_error("separability_preservation_test: d <= 6 keeps the sweep tractable");
    }
    SeparabilityReport report;
    report.trials = n_trials;
    report.dimension = d;
    report.max_s_unfiltered = -std::numeric_limits<double>::infinity();
    report.max_s_filtered = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < n_trials; ++trial) {
        Rng rng(seed, static_cast<std::uint64_t>(trial));
        const ComplexMatrix rho = random_separable(rng, d);
        report.max_s_unfiltered = std::max(report.max_s_unfiltered, max_s_over_restrictions(rho, d));

        const FilterSpec filter = random_filter(rng, d);
        const DensityFilterOutcome filtered = apply_filter(rho, d, filter);
        report.max_s_filtered = std::max(report.max_s_filtered,
                                         max_s_over_restrictions(filtered.filtered, d));
    }
    report.pass = report.max_s_unfiltered <= 2.0 + tol::separable &&
                  report.max_s_filtered <= 2.0 + tol::separable;
    return report;
}

} // namespace qbell
