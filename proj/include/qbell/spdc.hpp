#pragma once

#include <vector>

#include "qbell/modes.hpp"
#include "qbell/numerics.hpp"

namespace qbell {

enum class StateKind { max_entangled, lorentzian, custom };

// Two-photon pure state supported on the correlated diagonal sum_j c_j |j,j>.
// coeffs are real, unit norm, indexed by the signal j (ell ascending).
struct ReferenceState {
    int d = 0;
    RealVector coeffs;
    StateKind kind = StateKind::custom;

    static ReferenceState custom(int d, RealVector coeffs);

    ComplexVector product_vector() const;  // length d^2
    ComplexMatrix density() const;         // |psi><psi|
    double coeff_at_ell(int ell) const;
};

// Amplitude Lorentzian gamma/(gamma^2 + ell^2) over the mode list.
struct SpiralSpectrum {
    double gamma = 0.0;
    double amplitude = 1.0;
    DimensionSpec spec;
    RealVector c;  // over spec.ells, unit 2-norm
};

SpiralSpectrum spiral_spectrum(double gamma, int d);
ReferenceState lorentzian_state(double gamma, int d);
ReferenceState max_entangled_state(int d);

// |<psi|Phi>|^2 against the maximally entangled state of the same d.
double fidelity_max_entangled(const ReferenceState& state);

// Normalised coincidence probability [cos(d Delta) - 1] / (d^3 [cos Delta - 1])
// with Delta = theta_a - theta_b, continuously extended to 1/d at Delta = 0.
double coincidence_closed_form(double theta_a, double theta_b, int d);

// |<theta_A|<theta_B| |state>|^2 evaluated through the mode analysers.
double coincidence_numeric(const ModeMap& map, const ReferenceState& state, double theta_a,
                           double theta_b);

// Max |numeric - closed form| over a uniform Delta grid spanning one full
// 2 pi period (grid_points samples).
double fringe_equivalence_check(int d, int grid_points);

struct SpiralSample {
    int ell = 0;
    double rate = 0.0;
    double sigma = 0.0;
};

struct GammaFit {
    double gamma = 0.0;
    double amplitude = 0.0;  // A in f = A gamma / (gamma^2 + ell^2)
    double residual = 0.0;   // sum of squared residuals in the fit domain
    bool flat = false;       // gamma ran past 1e3: spectrum indistinguishable from flat
};

// Least-squares fit of rate ~ f(ell, gamma)^2. Uses log-domain residuals
// when every rate is positive, linear-domain otherwise.
GammaFit fit_gamma(const std::vector<SpiralSample>& rates);

} // namespace qbell
