#include <gtest/gtest.h>

#include <cmath>

#include "rmtau/moments.hpp"
#include "rmtau/tauseries.hpp"

using namespace rmtau;

namespace {
EnsembleSpec spec(EnsembleKind k, int N = 1, int L = 0)
{
    EnsembleSpec e;
    e.kind = k;
    e.N = N;
    e.L = L;
    return e;
}
} // namespace

TEST(Moments, OEBorderIsGaussianMoments)
{
    auto P = moment_pair(spec(EnsembleKind::OE), 6);
    double g = std::sqrt(2 * M_PI);
    EXPECT_NEAR(P.a(0).real() / g, 1.0, 1e-12);
    EXPECT_NEAR(std::abs(P.a(1)), 0.0, 1e-12);
    EXPECT_NEAR(P.a(2).real() / g, 1.0, 1e-12);
    EXPECT_NEAR(P.a(4).real() / (3 * g), 1.0, 1e-12);
}

TEST(Moments, OESkewEntry)
{
    // |A_01| = 2 pi E|X - Y|/2 for independent standard normals = 2 sqrt(pi)
    auto P = moment_pair(spec(EnsembleKind::OE), 4);
    EXPECT_NEAR(std::abs(P.A(0, 1)) / (2 * std::sqrt(M_PI)), 1.0, 1e-11);
    EXPECT_LT((P.A + P.A.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    // parity: x^n y^m sgn(x-y) integrates to zero when n + m is even
    EXPECT_NEAR(std::abs(P.A(0, 2)), 0.0, 1e-11);
}

TEST(Moments, SEClosedForm)
{
    // A_nm = (n - m)/2 mu_{n+m-1}, mu_k = int x^k e^{-x^2}
    auto P = moment_pair(spec(EnsembleKind::SE), 6);
    auto mu = [](int k) { return k % 2 ? 0.0 : std::tgamma((k + 1) / 2.0); };
    for (int n = 0; n < 6; ++n)
        for (int m = 0; m < 6; ++m) {
            double expect = n == m ? 0.0 : 0.5 * (n - m) * mu(n + m - 1);
            EXPECT_NEAR(P.A(n, m).real(), expect, 1e-11 * std::max(1.0, std::abs(expect))) << n << "," << m;
        }
    EXPECT_EQ(P.a.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Moments, GinSESuperdiagonalStructure)
{
    auto P = moment_pair(spec(EnsembleKind::GinSE), 7);
    double mx = P.A.cwiseAbs().maxCoeff();
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            if (std::abs(i - j) != 1) EXPECT_LT(std::abs(P.A(i, j)), 1e-9 * mx);
    for (int m = 1; m <= 5; ++m) EXPECT_NEAR((P.A(m, m + 1) / P.A(m - 1, m)).real(), m + 1.0, 1e-6);
}

TEST(Moments, GinOEIsRealAfterPhase)
{
    // -i (C - C^T) has real entries: C is Hermitian in z <-> zbar
    auto P = moment_pair(spec(EnsembleKind::GinOE, 2), 6);
    EXPECT_LT(P.A.imag().cwiseAbs().maxCoeff(), 1e-10 * P.A.cwiseAbs().maxCoeff());
}

TEST(Moments, SDressedBaseAndValue)
{
    auto e = spec(EnsembleKind::OE, 1, -1);
    e.s = {0, 0.4};
    auto P = moment_pair(e, 5);
    EXPECT_EQ(P.base, -1);
    auto direct = quad::integrate_real(
        [](double x) { return x == 0 ? 0.0 : std::exp(-0.5 * x * x - 0.4 / (x * x)); },
        [] {
            quad::Resolution r;
            r.zero_cluster = 10;
            r.max_depth = 6;
            return r;
        }());
    // index 0 sits at row 1 when base = -1
    EXPECT_NEAR(P.a(1).real() / direct.value.real(), 1.0, 1e-10);
}

TEST(Moments, TableSizeCoversSeries)
{
    for (int L : {-1, 0, 2})
        for (int charge : {1, 2, 3}) {
            int M = required_table_size(10, charge, L);
            for (const auto& lam : enumerate_partitions(10, charge)) {
                auto h = shifted_indices(lam, charge);
                int base = table_base(L);
                EXPECT_LT(h.front() + L - base, M);
                EXPECT_GE(h.back() + L - base, 0);
            }
        }
}

TEST(Moments, RejectsInvalid)
{
    auto e = spec(EnsembleKind::GinSE);
    e.s = {0, 0.4};
    EXPECT_THROW(moment_pair(e, 4), ValidationError);
    EXPECT_THROW(moment_pair(spec(EnsembleKind::GinUE), 4), std::invalid_argument);
}

TEST(Bimoments, GinUEUndeformedIsDiagonal)
{
    auto e = spec(EnsembleKind::GinUE, 3);
    auto M = complex_bimoment_matrix(e, 3);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
            double expect = j == k ? M_PI * std::tgamma(j + 1) : 0.0;
            EXPECT_NEAR(std::abs(M(j, k) - expect), 0.0, 1e-11) << j << k;
        }
}

TEST(Kernel, PrefactorTwoPoints)
{
    // N = 2: p^0 factors, 1/(p2 - p1)
    EXPECT_NEAR(kernel_prefactor({0.1, -0.1}, 0), 1.0 / (-0.2), 1e-15);
}
