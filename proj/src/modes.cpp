#include "qbell/modes.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qbell {

DimensionSpec DimensionSpec::make(int d) {
    if (d < 2 || d > 16) {
        std::ostringstream os;
        os << "DimensionSpec: d = " << d << " outside the supported range [2, 16]";
        throw size_error(os.str());
    }
    DimensionSpec spec;
    spec.d = d;
    spec.ells.reserve(static_cast<std::size_t>(d));
    if (d % 2 == 1) {
        for (int ell = -(d - 1) / 2; ell <= (d - 1) / 2; ++ell) spec.ells.push_back(ell);
    } else {
        for (int ell = -d / 2; ell <= d / 2; ++ell) {
            if (ell != 0) spec.ells.push_back(ell);
        }
    }
    return spec;
}

int ModeMap::signal_j(int ell) const {
    for (std::size_t i = 0; i < spec.ells.size(); ++i) {
        if (spec.ells[i] == ell) return static_cast<int>(i);
    }
    std::ostringstream os;
    os << "ModeMap: ell = " << ell << " is not a mode of d = " << spec.d;
    throw size_error(os.str());
}

int ModeMap::idler_j(int ell) const { return spec.d - 1 - signal_j(ell); }

int ModeMap::signal_ell(int j) const {
    if (j < 0 || j >= spec.d) {
        std::ostringstream os;
        os << "ModeMap: j = " << j << " outside 0.." << spec.d - 1;
        throw size_error(os.str());
    }
    return spec.ells[static_cast<std::size_t>(j)];
}

int ModeMap::idler_ell(int j) const { return signal_ell(spec.d - 1 - j); }

ModeMap mode_map(int d) { return ModeMap{DimensionSpec::make(d)}; }

double alpha(int a) { return a == 0 ? 0.0 : 0.5; }

double beta(int b) { return b == 0 ? 0.25 : -0.25; }

double analyser_theta(int d, const AnalyserSetting& s) {
    const double step = 2.0 * std::numbers::pi / d;
    if (s.party == Party::alice) {
        return (s.outcome + alpha(s.setting)) * step;
    }
    return (-s.outcome + beta(s.setting)) * step;
}

ComplexVector analyser_state(int d, const AnalyserSetting& s) {
    if (s.setting != 0 && s.setting != 1) {
        throw size_error("analyser_state: setting must be 0 or 1");
    }
    if (s.outcome < 0 || s.outcome >= d) {
        throw size_error("analyser_state: outcome outside 0..d-1");
    }
    const double theta = analyser_theta(d, s);
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    ComplexVector state(d);
    for (int j = 0; j < d; ++j) {
        state(j) = std::polar(norm, theta * j);
    }
    return state;
}

ComplexVector analyser_state_oam(const ModeMap& map, const AnalyserSetting& s) {
    // g(ell) = signal_j(ell) and the ell list is ascending, so the j-basis
    // vector carries over with components re-labelled by ell in place.
    return analyser_state(map.spec.d, s);
}

ComplexVector mode_analyser_state(const ModeMap& map, double theta) {
    const int d = map.spec.d;
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    ComplexVector state(d);
    for (int i = 0; i < d; ++i) {
        state(i) = std::polar(norm, theta * map.signal_j(map.spec.ells[static_cast<std::size_t>(i)]));
    }
    return state;
}

} // namespace qbell
