#pragma once

#include <cstdint>

#include "qbell/spdc.hpp"

namespace qbell {

// Local diagonal filter, one amplitude per ell (ascending), entries in [0, 1]
// with max entry 1. Both arms carry the same filter by default.
struct FilterSpec {
    int d = 0;
    RealVector diag;

    void validate() const;  // throws on entries outside [0, 1]
};

enum class FilterArms { both, signal_only };

struct FilterOutcome {
    ReferenceState filtered;
    double success_probability = 0.0;
};

struct DensityFilterOutcome {
    ComplexMatrix filtered;
    double success_probability = 0.0;
};

FilterSpec identity_filter(int d);

// sqrt(c_min / c(ell)) per arm: equalises mode amplitudes, scaled so the
// largest entry is 1.
FilterSpec design_filter(const ReferenceState& spectrum);

// The d=11 diagonal used in the experiment, shipped verbatim as a preset.
FilterSpec paper_filter_d11();

FilterOutcome apply_filter(const ReferenceState& state, const FilterSpec& filter,
                           FilterArms arms = FilterArms::both);
DensityFilterOutcome apply_filter(const ComplexMatrix& rho, int d, const FilterSpec& filter,
                                  FilterArms arms = FilterArms::both);

// O2^dag O2 = 1 - O1^dag O1 on the product space; throws unless its
// eigenvalues lie in [0, 1].
ComplexMatrix completeness_certificate(const FilterSpec& filter);

struct SeparabilityReport {
    int trials = 0;
    int dimension = 0;
    double max_s_unfiltered = 0.0;
    double max_s_filtered = 0.0;
    bool pass = false;
};

// Random separable states, random valid filters; asserts S_k <= 2 + tol for
// every central restriction k <= d, before and after filtering.
SeparabilityReport separability_preservation_test(int n_trials, int d, std::uint64_t seed);

} // namespace qbell
