#include <doctest.h>

#include "qbell/numerics.hpp"
#include "qbell/rng.hpp"

using namespace qbell;

namespace {

ComplexMatrix random_hermitian(Rng& rng, int n) {
    ComplexMatrix g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            g(i, j) = Complex(rng.normal(), rng.normal());
        }
    }
    return (g + g.adjoint()) / 2.0;
}

} // namespace

TEST_CASE("tensor product of identities is the identity") {
    const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
    const ComplexMatrix result = tensor_product(id2, id2);
    CHECK((result - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tensor product of diagonals") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2), b = ComplexMatrix::Zero(2, 2);
    a.diagonal() << 1.0, 2.0;
    b.diagonal() << 3.0, 4.0;
    const ComplexMatrix result = tensor_product(a, b);
    ComplexVector expected(4);
    expected << 3.0, 4.0, 6.0, 8.0;
    CHECK((result.diagonal() - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK(result.cwiseAbs().sum() == doctest::Approx(21.0));
}

TEST_CASE("identity filter on the product space is the identity") {
    const ComplexMatrix id11 = ComplexMatrix::Identity(11, 11);
    const ComplexMatrix filter = tensor_product(id11, id11);
    CHECK((filter - ComplexMatrix::Identity(121, 121)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tensor product size cap") {
    const ComplexMatrix big = ComplexMatrix::Identity(17, 17);
    CHECK_THROWS_AS(tensor_product(big, big), size_error);
    CHECK_NOTHROW(tensor_product(big, big, 17 * 17));
}

TEST_CASE("diagonal eigen decomposition sorts descending") {
    ComplexMatrix m = ComplexMatrix::Zero(3, 3);
    m.diagonal() << 3.0, 1.0, 2.0;
    const EigenDecomposition eig = eig_hermitian(m);
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(2.0));
    CHECK(eig.eigenvalues[2] == doctest::Approx(1.0));
}

TEST_CASE("non-Hermitian input names the asymmetry") {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    try {
        eig_hermitian(m);
        FAIL("expected contract_error");
    } catch (const contract_error& e) {
        CHECK(std::string(e.what()).find("not Hermitian") != std::string::npos);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("spectral reconstruction and trace identity on random Hermitian matrices") {
    Rng rng(42);
    for (int n : {4, 32, 256}) {
        const ComplexMatrix m = random_hermitian(rng, n);
        const EigenDecomposition eig = eig_hermitian(m);

        CHECK((eig.reconstruct() - m).cwiseAbs().maxCoeff() < tol::eig_residual);

        double eig_sum = 0.0;
        for (double v : eig.eigenvalues) eig_sum += v;
        CHECK(std::abs(eig_sum - m.trace().real()) < tol::trace_sum * n);

        // orthonormality
        const ComplexMatrix gram = eig.eigenvectors.adjoint() * eig.eigenvectors;
        CHECK((gram - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < tol::orthonormal);

        // eigenvalue equation, relative residual
        for (int k = 0; k < std::min(n, 5); ++k) {
            const ComplexVector v = eig.eigenvectors.col(k);
            const double residual = (m * v - eig.eigenvalues[static_cast<std::size_t>(k)] * v).norm();
            CHECK(residual < 1e-9 * m.cwiseAbs().maxCoeff() * n);
        }
    }
}

TEST_CASE("real symmetric matrices get real eigenvectors up to phase") {
    Rng rng(7);
    const int n = 12;
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double x = rng.normal();
            m(i, j) = x;
            m(j, i) = x;
        }
    }
    const EigenDecomposition eig = eig_hermitian(m);
    for (int k = 0; k < n; ++k) {
        ComplexVector v = eig.eigenvectors.col(k);
        Eigen::Index pivot;
        v.cwiseAbs().maxCoeff(&pivot);
        v *= std::abs(v(pivot)) / v(pivot);  // rotate the global phase away
        CHECK(v.imag().cwiseAbs().maxCoeff() < 1e-9);
    }
}
