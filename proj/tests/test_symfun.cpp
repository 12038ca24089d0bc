#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rmtau/partitions.hpp"
#include "rmtau/symfun.hpp"

using namespace rmtau;

TEST(CompleteHomogeneous, SingleTime)
{
    CouplingSeq t{0.3};
    for (int n = 0; n < 8; ++n) EXPECT_NEAR(complete_homogeneous(n, t), std::pow(0.3, n) / std::tgamma(n + 1), 1e-15);
    EXPECT_THROW(complete_homogeneous(-1, t), std::invalid_argument);
}

TEST(CompleteHomogeneous, GeneratingFunction)
{
    // sum h_n z^n = exp(sum t_k z^k)
    CouplingSeq t{0.2, -0.1, 0.05};
    double z = 0.7, lhs = 0;
    auto h = complete_homogeneous_table(40, t);
    for (int n = 0; n <= 40; ++n) lhs += h[n] * std::pow(z, n);
    EXPECT_NEAR(lhs, std::exp(potential(z, t)), 1e-14);
}

TEST(Schur, SmallCases)
{
    CouplingSeq t{0.4, 0.3};
    double t1 = 0.4, t2 = 0.3;
    EXPECT_DOUBLE_EQ(schur(Partition{}, t), 1.0);
    EXPECT_NEAR(schur(Partition{2}, t), t1 * t1 / 2 + t2, 1e-15);
    EXPECT_NEAR(schur(Partition{1, 1}, t), t1 * t1 / 2 - t2, 1e-15);
}

TEST(Schur, PowerSumsOfVariables)
{
    // t_n = p_n(x)/n makes s_lambda(t) the Schur polynomial in x
    std::vector<double> x{0.3, -0.5, 0.8};
    std::vector<double> tv(12);
    for (int n = 1; n <= 12; ++n) {
        double p = 0;
        for (double xi : x) p += std::pow(xi, n);
        tv[n - 1] = p / n;
    }
    CouplingSeq t(tv);
    // s_(1,1,1) = e_3 = x1 x2 x3, s_(2,1) via bialternant
    EXPECT_NEAR(schur(Partition{1, 1, 1}, t), x[0] * x[1] * x[2], 1e-14);
    auto bialt = [&](const Partition& lam) {
        auto det3 = [&](auto f) {
            double m[3][3];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) m[i][j] = f(i, j);
            return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                   m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        };
        double num = det3([&](int i, int j) { return std::pow(x[j], lam[i] + 2 - i); });
        double den = det3([&](int i, int j) { return std::pow(x[j], 2 - i); });
        return num / den;
    };
    for (const auto& lam : enumerate_partitions(7, 3)) EXPECT_NEAR(schur(lam, t), bialt(lam), 1e-13) << lam.str();
    // more than 3 rows vanish
    EXPECT_NEAR(schur(Partition{1, 1, 1, 1}, t), 0.0, 1e-15);
}

TEST(Schur, CauchyIdentity)
{
    // sum_lambda s_lambda(t) s_lambda(x) = exp(sum n t_n p_n(x)/n)... with one variable x: sum_n h_n(t) x^n
    CouplingSeq t{0.25, -0.1};
    double x = 0.6, acc = 0;
    SchurEvaluator<double> ev(t, 40);
    for (int n = 0; n <= 30; ++n) acc += ev(Partition{n}) * std::pow(x, n);
    EXPECT_NEAR(acc, std::exp(potential(x, t)), 1e-14);
}

TEST(Schur, ComplexTimes)
{
    ComplexCoupling t{cplx(0.2, 0.1), cplx(-0.05, 0.02)};
    auto s = schur(Partition{2, 1}, t);
    cplx t1 = t[1], t2 = t[2];
    // s_(2,1) = h2 h1 - h3
    cplx h1 = t1, h2 = t1 * t1 / 2.0 + t2, h3 = t1 * t1 * t1 / 6.0 + t1 * t2;
    EXPECT_NEAR(std::abs(s - (h2 * h1 - h3)), 0.0, 1e-16);
}

TEST(Miwa, BracketShift)
{
    CouplingSeq t{0.1, 0.2};
    auto u = bracket_shift(t, +1, 0.5, 5);
    ASSERT_EQ(u.order(), 5);
    for (int n = 1; n <= 5; ++n) EXPECT_NEAR(u[n], t[n] + std::pow(0.5, n) / n, 1e-16);
    auto d = bracket_shift(t, -1, 0.5, 5);
    for (int n = 1; n <= 5; ++n) EXPECT_NEAR(d[n], t[n] - std::pow(0.5, n) / n, 1e-16);
}

TEST(Miwa, InsertsDeterminant)
{
    // exp V(x, t + [a]) = exp V(x, t) / (1 - a x) as K grows
    CouplingSeq t{0.3};
    double a = 0.4, x = 0.9;
    auto u = bracket_shift(t, +1, a, 80);
    EXPECT_NEAR(std::exp(potential(x, u)), std::exp(potential(x, t)) / (1 - a * x), 1e-13);
}

TEST(Coupling, IndexingAndDegree)
{
    CouplingSeq t{0.0, 0.4, 0.0};
    EXPECT_EQ(t.order(), 3);
    EXPECT_EQ(t.degree(), 2);
    EXPECT_EQ(t[7], 0.0);
    EXPECT_TRUE(CouplingSeq{}.is_zero());
}

TEST(CFactor, Definition)
{
    CouplingSeq t{0.3, 0.2}, s{0.5, 0.4};
    EXPECT_NEAR(c_factor(t, s), std::exp(1 * 0.3 * 0.5 + 2 * 0.2 * 0.4), 1e-15);
    EXPECT_EQ(c_factor(t, CouplingSeq{}), 1.0);
}
