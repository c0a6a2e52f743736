#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qbell/errors.hpp"
#include "qbell/tolerances.hpp"

namespace qbell {

using Complex       = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix    = Eigen::MatrixXd;
using RealVector    = Eigen::VectorXd;

// Hard cap on product-space dimension: two qudits with d <= 16.
inline constexpr int max_product_dim = 256;

// max_jk |M_jk - conj(M_kj)|
double max_asymmetry(const ComplexMatrix& m);

// Throws contract_error naming the max asymmetry unless M = M^dag within
// tol::hermitian.
void require_hermitian(const ComplexMatrix& m, const char* who);

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // real, sorted descending
    ComplexMatrix eigenvectors;       // column k pairs with eigenvalues[k]

    // sum_k s_k v_k v_k^dag
    ComplexMatrix reconstruct() const;
};

// Kronecker product a (x) b. Throws size_error if the result would exceed
// dim_cap in either direction.
ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b,
                             int dim_cap = max_product_dim);

// Full spectrum of a Hermitian matrix, eigenvalues descending, eigenvectors
// orthonormal. Input is checked against tol::hermitian.
EigenDecomposition eig_hermitian(const ComplexMatrix& m);

} // namespace qbell
