#include "qbell/bell.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qbell {

namespace {

int positive_mod(int x, int d) {
    const int r = x % d;
    return r < 0 ? r + d : r;
}

void require_operator_dim(int d, const char* who) {
    if (d < 2 || d > 14) {
        std::ostringstream os;
        os << who << ": d = " << d << " outside the supported range [2, 14]";
        throw size_error(os.str());
    }
}

} // namespace

ProbabilityTable ProbabilityTable::zeros(int d) {
    ProbabilityTable t;
    t.d = d;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            t.at(a, b) = RealMatrix::Zero(d, d);
        }
    }
    return t;
}

void ProbabilityTable::normalize() {
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double total = at(a, b).sum();
            if (total <= 0.0) {
                std::ostringstream os;
                os << "ProbabilityTable: setting pair (" << a << "," << b << ") has zero total weight";
                throw contract_error(os.str());
            }
            if (std::abs(total - 1.0) > tol::table_norm) renormalized = true;
            at(a, b) /= total;
        }
    }
}

std::array<std::array<RealMatrix, 2>, 2> bell_coefficients(int d) {
    require_operator_dim(d, "bell_coefficients");
    std::array<std::array<RealMatrix, 2>, 2> coeff;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            coeff[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = RealMatrix::Zero(d, d);
        }
    }

    // weight gamma_k on each of the eight probability aggregates; the event
    // P(A_a = B_b + k) collects the cells with v - w = k (mod d) and
    // P(B_b = A_a + k) those with w - v = k, which reproduces the printed
    // operators and Table S1.
    auto add = [&](int a, int b, int v_minus_w, double w) {
        RealMatrix& m = coeff[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        for (int v = 0; v < d; ++v) {
            m(v, positive_mod(v - v_minus_w, d)) += w;
        }
    };

    const int k_max = d / 2;  // integer part of d/2
    for (int k = 0; k < k_max; ++k) {
        const double g = 1.0 - 2.0 * k / (d - 1.0);
        add(0, 0, k, g);            // P(A0 = B0 + k)
        add(1, 0, -k - 1, g);       // P(B0 = A1 + k + 1)
        add(1, 1, k, g);            // P(A1 = B1 + k)
        add(0, 1, -k, g);           // P(B1 = A0 + k)
        add(0, 0, -k - 1, -g);      // P(A0 = B0 - k - 1)
        add(1, 0, k, -g);           // P(B0 = A1 - k)
        add(1, 1, -k - 1, -g);      // P(A1 = B1 - k - 1)
        add(0, 1, k + 1, -g);       // P(B1 = A0 - k - 1)
    }
    return coeff;
}

void require_density_matrix(const ComplexMatrix& rho, int d) {
    const int dim = d * d;
    if (rho.rows() != dim || rho.cols() != dim) {
        std::ostringstream os;
        os << "density matrix: expected " << dim << "x" << dim << ", got " << rho.rows() << "x"
           << rho.cols();
        throw contract_error(os.str());
    }
    const double asym = max_asymmetry(rho);
    if (!(asym <= tol::psd)) {
        std::ostringstream os;
        os << "density matrix: not Hermitian, max |M - M^dag| = " << asym;
        throw contract_error(os.str());
    }
    const double trace = rho.trace().real();
    if (std::abs(trace - 1.0) > tol::unit_trace) {
        std::ostringstream os;
        os << "density matrix: trace = " << trace << ", not 1";
        throw contract_error(os.str());
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver((rho + rho.adjoint()) / 2.0);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < -tol::psd) {
        std::ostringstream os;
        os << "density matrix: not positive semidefinite, min eigenvalue = " << min_eig;
        throw contract_error(os.str());
    }
}

ProbabilityTable probability_table(const ComplexMatrix& rho, int d) {
    require_density_matrix(rho, d);
    ProbabilityTable table = ProbabilityTable::zeros(d);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            // Columns of U/V are the analyser states; the Born-rule diagonal
            // of (U (x) V)^dag rho (U (x) V) is the whole (a,b) block.
            ComplexMatrix u(d, d), v(d, d);
            for (int out = 0; out < d; ++out) {
                u.col(out) = analyser_state(d, {Party::alice, a, out});
                v.col(out) = analyser_state(d, {Party::bob, b, out});
            }
            const ComplexMatrix w = tensor_product(u, v);
            const ComplexVector born = (w.adjoint() * rho * w).diagonal();
            for (int vv = 0; vv < d; ++vv) {
                for (int ww = 0; ww < d; ++ww) {
                    table.at(a, b)(vv, ww) = std::max(0.0, born(vv * d + ww).real());
                }
            }
        }
    }
    table.normalize();
    return table;
}

BellValue s_from_table(const ProbabilityTable& table) {
    ProbabilityTable t = table;
    t.normalize();
    const auto coeff = bell_coefficients(t.d);
    double s = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            s += (coeff[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].array() *
                  t.at(a, b).array())
                     .sum();
        }
    }
    return BellValue{t.d, s, 0.0};
}

BellOperator bell_operator(int d) {
    require_operator_dim(d, "bell_operator");
    const auto coeff = bell_coefficients(d);
    ComplexMatrix op = ComplexMatrix::Zero(d * d, d * d);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            // sum_vw c(v,w) |v,w><v,w| = W diag(c) W^dag with W = U (x) V
            ComplexMatrix u(d, d), v(d, d);
            for (int out = 0; out < d; ++out) {
                u.col(out) = analyser_state(d, {Party::alice, a, out});
                v.col(out) = analyser_state(d, {Party::bob, b, out});
            }
            const ComplexMatrix w = tensor_product(u, v);
            const RealMatrix& c = coeff[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            ComplexVector diag(d * d);
            for (int vv = 0; vv < d; ++vv) {
                for (int ww = 0; ww < d; ++ww) diag(vv * d + ww) = c(vv, ww);
            }
            op.noalias() += w * diag.asDiagonal() * w.adjoint();
        }
    }
    return BellOperator{d, std::move(op)};
}

double expectation_max_entangled(int d) {
    require_operator_dim(d, "expectation_max_entangled");
    const BellOperator op = bell_operator(d);
    ComplexVector psi = ComplexVector::Zero(d * d);
    const double amp = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j) psi(j * d + j) = amp;
    return (psi.adjoint() * op.matrix * psi)(0).real();
}

MaxViolation max_violation(int d) {
    const BellOperator op = bell_operator(d);
    const EigenDecomposition eig = eig_hermitian(op.matrix);
    return MaxViolation{eig.eigenvalues.front(), eig.eigenvectors.col(0)};
}

double lhv_bound_bruteforce(int d) {
    if (d < 2 || d > 4) {
        throw size_error(
            "lhv_bound_bruteforce: supported for d in {2,3,4} only; the analytic local bound is 2");
    }
    const auto coeff = bell_coefficients(d);
    double best = -std::numeric_limits<double>::infinity();
    // Each deterministic strategy fixes one outcome per setting and party.
    for (int v0 = 0; v0 < d; ++v0) {
        for (int v1 = 0; v1 < d; ++v1) {
            for (int w0 = 0; w0 < d; ++w0) {
                for (int w1 = 0; w1 < d; ++w1) {
                    const int v[2] = {v0, v1};
                    const int w[2] = {w0, w1};
                    double s = 0.0;
                    for (int a = 0; a < 2; ++a) {
                        for (int b = 0; b < 2; ++b) {
                            s += coeff[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)](
                                v[a], w[b]);
                        }
                    }
                    best = std::max(best, s);
                }
            }
        }
    }
    return best;
}

RealMatrix correlated_block(const BellOperator& op) {
    const int d = op.d;
    RealMatrix block(d, d);
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
            block(j, k) = op.matrix(j * d + j, k * d + k).real();
        }
    }
    return block;
}

std::vector<int> central_ells(int d, int k) {
    if (k < 2 || k > d) {
        std::ostringstream os;
        os << "central_ells: k = " << k << " outside [2, d] with d = " << d;
        throw size_error(os.str());
    }
    if (k % 2 == 0 || d % 2 == 1) {
        return DimensionSpec::make(k).ells;  // subset of the d-dimensional set
    }
    // even d, odd k: no parity-compatible mode set; take the k modes of
    // smallest |ell|, negative first on ties.
    std::vector<int> ells = DimensionSpec::make(d).ells;
    std::sort(ells.begin(), ells.end(), [](int lhs, int rhs) {
        if (std::abs(lhs) != std::abs(rhs)) return std::abs(lhs) < std::abs(rhs);
        return lhs < rhs;
    });
    ells.resize(static_cast<std::size_t>(k));
    std::sort(ells.begin(), ells.end());
    return ells;
}

std::pair<ComplexMatrix, double> restrict_state(const ComplexMatrix& rho, int d, int k) {
    require_density_matrix(rho, d);
    const ModeMap big = mode_map(d);
    const std::vector<int> ells = central_ells(d, k);

    // Alice keeps the central modes ell, Bob their correlated partners -ell;
    // each arm is re-indexed to the dimension-k convention so |ell,-ell>
    // stays |j',j'>.
    std::vector<int> keep_a(static_cast<std::size_t>(k)), keep_b(static_cast<std::size_t>(k));
    for (int jp = 0; jp < k; ++jp) {
        keep_a[static_cast<std::size_t>(jp)] = big.signal_j(ells[static_cast<std::size_t>(jp)]);
        keep_b[static_cast<std::size_t>(jp)] = big.idler_j(-ells[static_cast<std::size_t>(jp)]);
    }

    ComplexMatrix out(k * k, k * k);
    for (int r1 = 0; r1 < k; ++r1) {
        for (int r2 = 0; r2 < k; ++r2) {
            for (int c1 = 0; c1 < k; ++c1) {
                for (int c2 = 0; c2 < k; ++c2) {
                    out(r1 * k + r2, c1 * k + c2) =
                        rho(keep_a[static_cast<std::size_t>(r1)] * d +
                                keep_b[static_cast<std::size_t>(r2)],
                            keep_a[static_cast<std::size_t>(c1)] * d +
                                keep_b[static_cast<std::size_t>(c2)]);
                }
            }
        }
    }
    return {out, out.trace().real()};
}

} // namespace qbell
