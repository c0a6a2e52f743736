#pragma once

#include <array>
#include <utility>
#include <vector>

#include "qbell/modes.hpp"
#include "qbell/numerics.hpp"

namespace qbell {

// Joint outcome probabilities p[a][b](v, w), normalised per setting pair.
struct ProbabilityTable {
    int d = 0;
    std::array<std::array<RealMatrix, 2>, 2> p;
    bool renormalized = false;  // set when inputs needed per-setting rescaling

    static ProbabilityTable zeros(int d);
    RealMatrix& at(int a, int b) { return p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
    const RealMatrix& at(int a, int b) const {
        return p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }

    // Rescales each (a,b) block to unit sum; flags blocks that were off by
    // more than tol::table_norm. Throws on a zero block.
    void normalize();
};

struct BellValue {
    int d = 0;
    double s = 0.0;
    double sigma = 0.0;
};

// S_d in the ordered product basis |0,0>, |0,1>, ..., |d-1,d-1>.
struct BellOperator {
    int d = 0;
    ComplexMatrix matrix;
};

// Coefficient of p[a][b](v, w) in S_d. Depends on (v - w) mod d only; the
// same tensor drives s_from_table, the operator assembly and the Poisson
// error propagation.
std::array<std::array<RealMatrix, 2>, 2> bell_coefficients(int d);

// Hermitian within tol::hermitian? PSD within tol::psd? unit trace within
// tol::unit_trace? Throws contract_error naming the violated property.
void require_density_matrix(const ComplexMatrix& rho, int d);

ProbabilityTable probability_table(const ComplexMatrix& rho, int d);
BellValue s_from_table(const ProbabilityTable& table);

BellOperator bell_operator(int d);  // 2 <= d <= 14

// <psi| S_d |psi> for |psi> = (1/sqrt d) sum_j |j,j>.
double expectation_max_entangled(int d);

struct MaxViolation {
    double value = 0.0;
    ComplexVector eigenstate;
};
// Largest eigenvalue of S_d with a normalised eigenvector.
MaxViolation max_violation(int d);

// Maximum of S_d over all deterministic local strategies; d in {2, 3, 4}.
double lhv_bound_bruteforce(int d);

// d x d correlated block <jj| S_d |kk>: real symmetric, zero diagonal.
RealMatrix correlated_block(const BellOperator& op);

// The k central modes (as ell values, ascending) of a d-dimensional spec:
// the dimension-k mode set when its parity is compatible, otherwise the k
// modes of smallest |ell| preferring negative ell on ties.
std::vector<int> central_ells(int d, int k);

// Local projection of rho onto the central k-dimensional subspace on each
// arm, re-labelled to dimension-k conventions. Returns the projected matrix
// (unnormalised) and its trace weight.
std::pair<ComplexMatrix, double> restrict_state(const ComplexMatrix& rho, int d, int k);

} // namespace qbell
