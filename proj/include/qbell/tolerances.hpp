#pragma once

// Named tolerances shared by the library and every test suite.

namespace qbell::tol {

inline constexpr double hermitian     = 1e-12;  // max |M - M^dag| for Hermitian inputs
inline constexpr double eig_residual  = 1e-9;   // spectral reconstruction, max norm
inline constexpr double orthonormal   = 1e-10;  // eigenvector Gram matrix
inline constexpr double psd           = 1e-10;  // density-matrix positivity slack
inline constexpr double unit_trace    = 1e-10;
inline constexpr double unit_norm     = 1e-12;
inline constexpr double table_norm    = 1e-9;   // per-setting probability normalisation
inline constexpr double separable     = 1e-9;   // S_d <= 2 + separable for separable states
inline constexpr double basis_gram    = 1e-12;  // analyser-basis orthonormality
inline constexpr double trace_sum     = 1e-10;  // trace vs eigenvalue sum

} // namespace qbell::tol
