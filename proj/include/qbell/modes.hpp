#pragma once

#include <vector>

#include "qbell/numerics.hpp"

namespace qbell {

enum class Party { alice, bob };

// OAM index set for one qudit. Odd d uses ell = -(d-1)/2 .. (d-1)/2; even d
// uses -d/2 .. d/2 with ell = 0 omitted.
struct DimensionSpec {
    int d = 0;
    std::vector<int> ells;  // ascending

    static DimensionSpec make(int d);  // 2 <= d <= 16
    bool odd() const { return d % 2 == 1; }
};

// j <-> ell bookkeeping. The signal arm counts ell ascending, the idler arm
// descending, so that |ell> (x) |-ell> = |j,j>.
struct ModeMap {
    DimensionSpec spec;

    int signal_j(int ell) const;
    int idler_j(int ell) const;
    int signal_ell(int j) const;
    int idler_ell(int j) const;
};

ModeMap mode_map(int d);

struct AnalyserSetting {
    Party party = Party::alice;
    int setting = 0;  // a or b in {0,1}
    int outcome = 0;  // v or w in {0..d-1}
};

double alpha(int a);  // 0, 1/2
double beta(int b);   // 1/4, -1/4

// Mode-analyser angle: theta_A = (v + a/2) 2pi/d, theta_B = (-w + (-1)^b/4) 2pi/d.
double analyser_theta(int d, const AnalyserSetting& s);

// Alice: <j|v>_a = exp[i 2pi/d j (v + alpha_a)] / sqrt(d)
// Bob:   <j|w>_b = exp[i 2pi/d j (-w + beta_b)] / sqrt(d)
ComplexVector analyser_state(int d, const AnalyserSetting& s);

// The same state over ell labels: component i pairs with map.spec.ells[i].
// Both parties use g(ell) = signal_j(ell), which makes the two-photon
// coincidence amplitude on the maximally entangled state a function of
// theta_A - theta_B only.
ComplexVector analyser_state_oam(const ModeMap& map, const AnalyserSetting& s);

// Continuous-angle analyser (1/sqrt d) sum_ell exp[i theta g(ell)] |ell>,
// used by the fringe scan.
ComplexVector mode_analyser_state(const ModeMap& map, double theta);

} // namespace qbell
