#include "qbell/spdc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace qbell {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Golden-section minimum of f over [lo, hi]; f must be unimodal there.
template <typename F>
double golden_minimize(F&& f, double lo, double hi, int iters = 200) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++i) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a); f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a); f2 = f(x2);
        }
    }
    return (a + b) / 2.0;
}

} // namespace

ReferenceState ReferenceState::custom(int d, RealVector coeffs) {
    if (coeffs.size() != d) {
        throw size_error("ReferenceState: coefficient count does not match d");
    }
    const double norm = coeffs.norm();
    if (norm <= 0.0) {
        throw contract_error("ReferenceState: zero state");
    }
    return ReferenceState{d, coeffs / norm, StateKind::custom};
}

ComplexVector ReferenceState::product_vector() const {
    ComplexVector psi = ComplexVector::Zero(d * d);
    for (int j = 0; j < d; ++j) psi(j * d + j) = coeffs(j);
    return psi;
}

ComplexMatrix ReferenceState::density() const {
    const ComplexVector psi = product_vector();
    return psi * psi.adjoint();
}

double ReferenceState::coeff_at_ell(int ell) const {
    return coeffs(mode_map(d).signal_j(ell));
}

SpiralSpectrum spiral_spectrum(double gamma, int d) {
    if (!(gamma > 0.0)) {
        throw contract_error("spiral_spectrum: gamma must be positive");
    }
    SpiralSpectrum spectrum;
    spectrum.gamma = gamma;
    spectrum.spec = DimensionSpec::make(d);
    spectrum.c.resize(d);
    for (int i = 0; i < d; ++i) {
        const double ell = spectrum.spec.ells[static_cast<std::size_t>(i)];
        spectrum.c(i) = gamma / (gamma * gamma + ell * ell);
    }
    spectrum.amplitude = 1.0 / spectrum.c.norm();
    spectrum.c /= spectrum.c.norm();
    return spectrum;
}

ReferenceState lorentzian_state(double gamma, int d) {
    const SpiralSpectrum spectrum = spiral_spectrum(gamma, d);
    // ells ascend exactly like the signal j label, so c carries over.
    return ReferenceState{d, spectrum.c, StateKind::lorentzian};
}

ReferenceState max_entangled_state(int d) {
    DimensionSpec::make(d);  // range check; even d omits ell = 0 by construction
    RealVector coeffs = RealVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
    return ReferenceState{d, coeffs, StateKind::max_entangled};
}

double fidelity_max_entangled(const ReferenceState& state) {
    const double overlap = state.coeffs.sum() / std::sqrt(static_cast<double>(state.d));
    return overlap * overlap;
}

double coincidence_closed_form(double theta_a, double theta_b, int d) {
    const double delta = std::remainder(theta_a - theta_b, two_pi);
    const double dd = static_cast<double>(d);
    if (std::abs(delta) < 1e-6) {
        // fourth-order expansion of sin^2(d u)/sin^2(u) about u = 0
        const double u2 = (delta / 2.0) * (delta / 2.0);
        const double d2 = dd * dd;
        const double c2 = (d2 - 1.0) / 3.0;
        const double c4 = (d2 - 1.0) * (d2 - 1.0) / 18.0 - (d2 * d2 - 1.0) / 90.0;
        return (1.0 - c2 * u2 + c4 * u2 * u2) / dd;
    }
    // cos x - 1 = -2 sin^2(x/2): same value, no cancellation near the peak
    const double su = std::sin(delta / 2.0);
    const double sdu = std::sin(dd * delta / 2.0);
    return (sdu * sdu) / (dd * dd * dd * su * su);
}

double coincidence_numeric(const ModeMap& map, const ReferenceState& state, double theta_a,
                           double theta_b) {
    const int d = map.spec.d;
    if (state.d != d) {
        throw size_error("coincidence_numeric: state dimension does not match mode map");
    }
    const ComplexVector a = mode_analyser_state(map, theta_a);
    const ComplexVector b = mode_analyser_state(map, theta_b);
    // <theta_A|<theta_B| sum_ell c(ell) |ell>|-ell>; index d-1-i holds -ell.
    Complex amplitude = 0.0;
    for (int i = 0; i < d; ++i) {
        amplitude += state.coeffs(i) * std::conj(a(i)) * std::conj(b(d - 1 - i));
    }
    return std::norm(amplitude);
}

double fringe_equivalence_check(int d, int grid_points) {
    if (grid_points < 2) {
        throw size_error("fringe_equivalence_check: need at least 2 grid points");
    }
    const ModeMap map = mode_map(d);
    const ReferenceState phi = max_entangled_state(d);
    double worst = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double delta = two_pi * i / (grid_points - 1);
        const double numeric = coincidence_numeric(map, phi, delta, 0.0);
        const double closed = coincidence_closed_form(delta, 0.0, d);
        worst = std::max(worst, std::abs(numeric - closed));
    }
    return worst;
}

GammaFit fit_gamma(const std::vector<SpiralSample>& rates) {
    std::set<int> distinct;
    for (const SpiralSample& s : rates) {
        if (s.rate < 0.0) {
            throw contract_error("fit_gamma: negative rate");
        }
        distinct.insert(s.ell);
    }
    if (distinct.size() < 3) {
        std::ostringstream os;
        os << "fit_gamma: need at least 3 distinct ell values, got " << distinct.size();
        throw contract_error(os.str());
    }

    const bool all_positive =
        std::all_of(rates.begin(), rates.end(), [](const SpiralSample& s) { return s.rate > 0.0; });

    // Amplitude profiles out in closed form for fixed gamma; the search is
    // one-dimensional in log gamma.
    auto ssr_log = [&](double log_gamma, double* amplitude) {
        const double g2 = std::exp(2.0 * log_gamma);
        double mean = 0.0;
        std::vector<double> dev(rates.size());
        for (std::size_t i = 0; i < rates.size(); ++i) {
            const double m = 2.0 * log_gamma - 2.0 * std::log(g2 + rates[i].ell * rates[i].ell);
            dev[i] = std::log(rates[i].rate) - m;
            mean += dev[i];
        }
        mean /= static_cast<double>(rates.size());
        double ssr = 0.0;
        for (double v : dev) ssr += (v - mean) * (v - mean);
        if (amplitude) *amplitude = std::exp(mean / 2.0);
        return ssr;
    };
    auto ssr_linear = [&](double log_gamma, double* amplitude) {
        const double g = std::exp(log_gamma);
        const double g2 = g * g;
        double num = 0.0, den = 0.0;
        for (const SpiralSample& s : rates) {
            const double basis = 1.0 / ((g2 + s.ell * s.ell) * (g2 + s.ell * s.ell));
            num += s.rate * basis;
            den += basis * basis;
        }
        const double scale = den > 0.0 ? std::max(0.0, num / den) : 0.0;  // A^2 gamma^2
        double ssr = 0.0;
        for (const SpiralSample& s : rates) {
            const double model = scale / ((g2 + s.ell * s.ell) * (g2 + s.ell * s.ell));
            ssr += (s.rate - model) * (s.rate - model);
        }
        if (amplitude) *amplitude = std::sqrt(scale) / g;
        return ssr;
    };

    auto objective = [&](double log_gamma) {
        return all_positive ? ssr_log(log_gamma, nullptr) : ssr_linear(log_gamma, nullptr);
    };

    // Coarse bracket then golden-section refine.
    const double lo = std::log(1e-2), hi = std::log(1e6);
    const int coarse = 240;
    int best_i = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= coarse; ++i) {
        const double x = lo + (hi - lo) * i / coarse;
        const double v = objective(x);
        if (v < best_v) {
            best_v = v;
            best_i = i;
        }
    }
    const double bracket_lo = lo + (hi - lo) * std::max(0, best_i - 1) / coarse;
    const double bracket_hi = lo + (hi - lo) * std::min(coarse, best_i + 1) / coarse;
    const double log_gamma = golden_minimize(objective, bracket_lo, bracket_hi);

    GammaFit fit;
    fit.gamma = std::exp(log_gamma);
    fit.residual = all_positive ? ssr_log(log_gamma, &fit.amplitude)
                                : ssr_linear(log_gamma, &fit.amplitude);
    fit.flat = fit.gamma > 1e3;
    return fit;
}

} // namespace qbell
