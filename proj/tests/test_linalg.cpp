#include <random>

#include <gtest/gtest.h>

#include <mcreg/linalg.hpp>

#include "oracles.hpp"

using namespace mcreg;

TEST(DenseMatrix, RejectsEmptyDimensionsAndNonFinite)
{
    EXPECT_THROW(DenseMatrix(0, 3), DimensionError);
    EXPECT_THROW(DenseMatrix(2, 0), DimensionError);
    EXPECT_THROW(DenseMatrix(1, 1, std::nan("")), ParameterError);
    EXPECT_THROW(DenseMatrix(1, 2, std::vector<double>{1.0, INFINITY}), ParameterError);
    EXPECT_THROW(DenseMatrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), DimensionError);
    EXPECT_THROW((DenseMatrix{{1.0, 2.0}, {3.0}}), DimensionError);
    EXPECT_TRUE(DenseMatrix().empty());
}

TEST(DenseMatrix, RowMajorAccess)
{
    const DenseMatrix m{{1, 2, 3}, {4, 5, 6}};
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m(1, 2), 6.0);
    EXPECT_EQ(m.col(1), (std::vector<double>{2, 5}));
    EXPECT_EQ(m.row(1)[0], 4.0);
}

TEST(Linalg, MultiplyTransposeCross)
{
    const DenseMatrix a{{1, 2}, {3, 4}, {5, 6}};
    const DenseMatrix b{{1, 0, -1}, {2, 1, 0}};
    EXPECT_EQ(multiply(a, b), (DenseMatrix{{5, 2, -1}, {11, 4, -3}, {17, 6, -5}}));
    EXPECT_EQ(transpose(a), (DenseMatrix{{1, 3, 5}, {2, 4, 6}}));
    EXPECT_EQ(cross_product(a, a), (DenseMatrix{{35, 44}, {44, 56}}));
    EXPECT_THROW(multiply(a, a), DimensionError);
    EXPECT_THROW(cross_product(a, b), DimensionError);
}

TEST(Linalg, NormsAndCentering)
{
    const DenseMatrix a{{3, -4}};
    EXPECT_DOUBLE_EQ(frobenius_norm(a), 5.0);
    EXPECT_DOUBLE_EQ(max_abs(a), 4.0);
    const auto c = center_columns(DenseMatrix{{1, 10}, {3, 20}});
    EXPECT_EQ(c.means, (std::vector<double>{2, 15}));
    EXPECT_EQ(c.centered, (DenseMatrix{{-1, -5}, {1, 5}}));
}

TEST(Linalg, CholeskyReconstructsRandomSpd)
{
    std::mt19937_64 gen(11);
    for (std::size_t n : {1u, 2u, 5u, 12u}) {
        const DenseMatrix s = oracle::random_spd(n, gen);
        const DenseMatrix l = cholesky_lower(s);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) EXPECT_EQ(l(i, j), 0.0);
        const DenseMatrix llt = multiply(l, transpose(l));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(llt(i, j), s(i, j), 1e-10 * (1 + std::abs(s(i, j))));
    }
}

TEST(Linalg, CholeskySolveMatchesGaussianElimination)
{
    std::mt19937_64 gen(5);
    const DenseMatrix s = oracle::random_spd(7, gen);
    const auto b = oracle::random_vector(7, gen);
    std::vector<double> x = b;
    cholesky_solve_inplace(cholesky_lower(s), x);
    const auto ref = oracle::gauss_solve(oracle::to_rows(s), b);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(x[i], ref[i], 1e-12);
}

TEST(Linalg, CholeskyNamesFailingPivot)
{
    const DenseMatrix s{{4, 2, 0}, {2, 1, 0}, {0, 0, 1}};
    try {
        cholesky_lower(s);
        FAIL() << "expected NotPositiveDefiniteError";
    } catch (const NotPositiveDefiniteError& e) {
        EXPECT_EQ(e.pivot(), 1u);
    }
    EXPECT_THROW(cholesky_lower(DenseMatrix{{-1.0}}), NotPositiveDefiniteError);
    EXPECT_THROW(cholesky_lower(DenseMatrix(2, 3)), DimensionError);
}

TEST(Linalg, InverseIsSymmetricAndInverts)
{
    std::mt19937_64 gen(3);
    const DenseMatrix s = oracle::random_spd(6, gen);
    const DenseMatrix inv = invert_spd(s);
    const DenseMatrix id = multiply(s, inv);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            EXPECT_EQ(inv(i, j), inv(j, i));
            EXPECT_NEAR(id(i, j), i == j ? 1.0 : 0.0, 1e-12);
        }
}

TEST(Linalg, PrincipalSubmatrix)
{
    const DenseMatrix a{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    const std::size_t idx[] = {0, 2};
    EXPECT_EQ(principal_submatrix(a, idx), (DenseMatrix{{1, 3}, {7, 9}}));
}
