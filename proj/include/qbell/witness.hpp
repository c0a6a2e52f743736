#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qbell/bell.hpp"

namespace qbell {

struct DiagConstraint {
    int j = 0;
    double p = 0.0;
    double sigma = 0.0;
};

struct SConstraint {
    int k = 0;
    double s = 0.0;
    double sigma = 0.0;
};

// Measured diagonal coincidence probabilities and S_2..S_{d-1} bands that a
// candidate (d-1)-dimensionally entangled state must reproduce.
struct ConstraintSet {
    int d = 11;
    std::vector<DiagConstraint> diag_probs;
    std::vector<SConstraint> s_constraints;
    double band_multiplier = 1.0;

    void validate() const;

    // Table-S3 S_2..S_10 with their sigmas plus the filtered-Lorentzian
    // (gamma = 7.58) model diagonal at sigma = 0.01.
    static ConstraintSet paper_scenario();

    static ConstraintSet from_json(std::istream& in);
    std::string to_json() const;
};

// rho = sum_n r_n |psi_n><psi_n| with |psi_n> = sum_j a_nj |j,j>, a_nn = 0:
// every component avoids one correlated coordinate, so the mixture carries
// at most (d-1)-dimensional entanglement.
struct WitnessAnsatz {
    RealVector weights;  // r_n on the simplex
    RealMatrix vectors;  // row n = a_n, unit rows, a_n[n] = 0
};

struct WitnessOptions {
    int n_starts = 200;
    std::uint64_t seed = 1;
    int max_iter = 250;          // per penalty round
    double feasibility_tol = 1e-6;
};

struct WitnessResult {
    double best_s11 = 0.0;
    WitnessAnsatz best_ansatz;
    std::vector<double> constraint_residuals;  // signed distance outside each band
    int n_starts = 0;
    double converged_fraction = 0.0;  // fraction of starts ending feasible
    bool feasible = false;
    double worst_residual = 0.0;      // of the reported ansatz
    std::uint64_t seed = 0;

    std::string to_json() const;
};

// d^2 x d^2 density matrix of the ansatz. Throws if a_nn != 0, a row is not
// normalised, or the weights leave the simplex.
ComplexMatrix assemble_rho(const WitnessAnsatz& ansatz);

// Projects rho onto the central k-dimensional correlated subspace,
// renormalises by the projected weight and evaluates S_k. Throws when the
// projected weight is below 1e-12.
double constrained_s_k(const ComplexMatrix& rho, int k, int d);
std::pair<double, double> constrained_s_k_with_weight(const ComplexMatrix& rho, int k, int d);

// Multi-start penalised maximisation of Tr(rho S_d) over the ansatz family,
// all constraints held within [value - m sigma, value + m sigma]. The result
// is a lower-bound estimate of the constrained maximum, deterministic in
// (seed, n_starts).
WitnessResult maximize_s11(const ConstraintSet& constraints, const WitnessOptions& options = {});

// Independent oracle for the unconstrained problem: max over n of the top
// eigenvalue of the correlated block with row/column n removed.
double unconstrained_restricted_maximum(int d);

struct Certificate {
    double separation_sigmas = 0.0;
    double significance = 3.0;
    bool certified = false;
};

Certificate certify_dimension(double best_s11, double measured_s11, double sigma_s11,
                              double significance = 3.0);

namespace detail {

// Penalised objective behind maximize_s11, exposed for gradient tests.
class WitnessProblem {
public:
    WitnessProblem(const ConstraintSet& constraints, double mu);

    int dim() const { return d_ * d_; }
    int d() const { return d_; }

    // value of -S_d + penalty; fills grad when non-null
    double eval(const RealVector& params, RealVector* grad) const;

    // raw Bell value and per-constraint band violations at params
    double bell_value(const RealVector& params) const;
    std::vector<double> violations(const RealVector& params) const;

    WitnessAnsatz decode(const RealVector& params) const;

private:
    struct Eval;
    Eval evaluate(const RealVector& params) const;

    int d_;
    double mu_;
    RealMatrix bell_block_;  // correlated block of S_d
    struct SubBlock {
        int k;
        double lo, hi;
        std::vector<int> indices;  // central correlated coordinates
        RealMatrix block;          // correlated block of S_k
    };
    std::vector<SubBlock> s_bands_;
    struct DiagBand {
        int j;
        double lo, hi;
    };
    std::vector<DiagBand> diag_bands_;
};

} // namespace detail

} // namespace qbell
