#include <gtest/gtest.h>

#include <random>

#include "rmtau/skewlin.hpp"

using namespace rmtau;

namespace {
CMatrix random_skew(int n, std::mt19937_64& rng, bool complex_entries = true)
{
    std::normal_distribution<double> g;
    CMatrix A = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            A(i, j) = cplx(g(rng), complex_entries ? g(rng) : 0.0);
            A(j, i) = -A(i, j);
        }
    return A;
}
} // namespace

TEST(Pfaffian, SquareIsDeterminant)
{
    std::mt19937_64 rng(1);
    for (int n = 2; n <= 12; n += 2)
        for (int rep = 0; rep < 5; ++rep) {
            CMatrix A = random_skew(n, rng);
            cplx pf = pfaffian(A), det = A.determinant();
            EXPECT_LT(std::abs(pf * pf - det), 1e-9 * std::abs(det)) << n;
        }
}

TEST(Pfaffian, MatchesCombinatorial)
{
    std::mt19937_64 rng(2);
    for (int n = 2; n <= 8; n += 2)
        for (int rep = 0; rep < 5; ++rep) {
            CMatrix A = random_skew(n, rng);
            cplx a = pfaffian(A), b = pfaffian_combinatorial(A);
            EXPECT_LT(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(b))) << n;
        }
}

TEST(Pfaffian, SmallAndSpecial)
{
    CMatrix A(2, 2);
    A << 0, 3, -3, 0;
    EXPECT_EQ(pfaffian(A), cplx(3));
    EXPECT_EQ(pfaffian(CMatrix(0, 0)), cplx(1));
    // block diagonal: product of blocks
    CMatrix B = CMatrix::Zero(4, 4);
    B(0, 1) = 2, B(1, 0) = -2, B(2, 3) = 5, B(3, 2) = -5;
    EXPECT_NEAR(std::abs(pfaffian(B) - 10.0), 0, 1e-14);
    // singular
    CMatrix Z = CMatrix::Zero(4, 4);
    EXPECT_EQ(pfaffian(Z), cplx(0));
}

TEST(Pfaffian, Errors)
{
    EXPECT_THROW(pfaffian(CMatrix::Zero(3, 3)), std::invalid_argument);
    CMatrix A = CMatrix::Zero(2, 2);
    A(0, 1) = 1;
    A(1, 0) = 1;
    EXPECT_THROW(pfaffian(A), std::invalid_argument);
}

TEST(Pfaffian, CongruenceScaling)
{
    // Pf(B A B^T) = det(B) Pf(A)
    std::mt19937_64 rng(3);
    CMatrix A = random_skew(6, rng);
    CMatrix B = CMatrix::Random(6, 6);
    cplx lhs = pfaffian(CMatrix(B * A * B.transpose()));
    EXPECT_LT(std::abs(lhs - B.determinant() * pfaffian(A)), 1e-10 * std::abs(lhs));
}

TEST(Abar, SmallOrders)
{
    std::mt19937_64 rng(4);
    SkewPair P;
    P.A = random_skew(6, rng);
    P.a = CVector::Random(6);
    P.base = 0;
    EXPECT_EQ(abar({}, 0, P), cplx(1));
    EXPECT_EQ(abar({3}, 0, P), P.a(3));
    EXPECT_EQ(abar({4, 1}, 0, P), P.A(4, 1));
    EXPECT_EQ(abar({4, 1}, 1, P), P.A(5, 2));
    // odd order: bordered Pfaffian
    CMatrix M = CMatrix::Zero(4, 4);
    std::vector<int> h{5, 2, 0};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) M(i, j) = P.A(h[i], h[j]);
        M(i, 3) = P.a(h[i]);
        M(3, i) = -P.a(h[i]);
    }
    EXPECT_LT(std::abs(abar(h, 0, P) - pfaffian_combinatorial(M)), 1e-13);
    // order-3 expansion: A_12 a_3 - A_13 a_2 + A_23 a_1
    cplx expect = P.A(5, 2) * P.a(0) - P.A(5, 0) * P.a(2) + P.A(2, 0) * P.a(5);
    EXPECT_LT(std::abs(abar(h, 0, P) - expect), 1e-13);
}

TEST(Abar, SizingError)
{
    SkewPair P;
    P.A = CMatrix::Zero(4, 4);
    P.a = CVector::Zero(4);
    try {
        abar({6, 1}, 0, P);
        FAIL();
    } catch (const SizingError& e) {
        EXPECT_EQ(e.required, 7);
    }
    EXPECT_THROW(abar({1, 2}, 0, P), std::invalid_argument);
}
