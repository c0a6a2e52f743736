#include "qbell/numerics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace qbell {

double max_asymmetry(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void require_hermitian(const ComplexMatrix& m, const char* who) {
    if (m.rows() != m.cols()) {
        std::ostringstream os;
        os << who << ": matrix is " << m.rows() << "x" << m.cols() << ", not square";
        throw contract_error(os.str());
    }
    const double asym = max_asymmetry(m);
    if (!(asym <= tol::hermitian)) {
        std::ostringstream os;
        os << who << ": matrix is not Hermitian, max |M - M^dag| = " << asym;
        throw contract_error(os.str());
    }
}

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b, int dim_cap) {
    const Eigen::Index rows = a.rows() * b.rows();
    const Eigen::Index cols = a.cols() * b.cols();
    if (rows > dim_cap || cols > dim_cap) {
        std::ostringstream os;
        os << "tensor_product: requested " << rows << "x" << cols
           << " exceeds the configured cap of " << dim_cap << "x" << dim_cap;
        throw size_error(os.str());
    }
    ComplexMatrix out(rows, cols);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

EigenDecomposition eig_hermitian(const ComplexMatrix& m) {
    require_hermitian(m, "eig_hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
    if (solver.info() != Eigen::Success) {
        throw contract_error("eig_hermitian: eigensolver failed to converge");
    }

    const Eigen::Index n = m.rows();
    EigenDecomposition out;
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    out.eigenvectors.resize(n, n);
    // Eigen reports ascending order; callers get descending.
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues[static_cast<std::size_t>(k)] = solver.eigenvalues()(n - 1 - k);
        out.eigenvectors.col(k) = solver.eigenvectors().col(n - 1 - k);
    }
    return out;
}

ComplexMatrix EigenDecomposition::reconstruct() const {
    const Eigen::Index n = eigenvectors.rows();
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(eigenvalues.size()); ++k) {
        out.noalias() += eigenvalues[static_cast<std::size_t>(k)] *
                         (eigenvectors.col(k) * eigenvectors.col(k).adjoint());
    }
    return out;
}

} // namespace qbell
