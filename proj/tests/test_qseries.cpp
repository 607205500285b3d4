#include <gtest/gtest.h>

#include <random>

#include <selq/qseries.hpp>

using namespace selq;

namespace {

struct Draw {
    std::mt19937 rng;
    std::uniform_real_distribution<double> U{-1.0, 1.0};
    explicit Draw(unsigned seed) : rng(seed) {}
    double real() { return U(rng); }
    cplx unit() { return e_half(U(rng)); }
    cplx q() { return e_half(0.1 + 0.8 * std::fabs(U(rng))); }
};

}  // namespace

TEST(Pochhammer, SmallProducts)
{
    EXPECT_EQ(qpoch({0.3, 0.2}, 0.7, 0), cplx(1.0));
    EXPECT_NEAR(std::abs(qpoch(0.5, 0.5, 2) - 0.375), 0.0, 1e-16);
    EXPECT_THROW(qpoch(0.5, 0.5, -1), domain_error);
}

TEST(Phi, ZeroTerminationIsOne)
{
    TerminatingSeries s{{0.3, 0.7}, {0.2}, 0.5, 0.1, 0};
    auto v = phi_eval(s);
    EXPECT_EQ(v.value, cplx(1.0));
    EXPECT_EQ(v.terms, 1);
}

TEST(Phi, TermCountIsTerminationPlusOne)
{
    cplx q = e_half(0.3);
    TerminatingSeries s{{std::pow(q, -4), e_half(0.11)}, {e_half(0.47)}, q, q, 4};
    EXPECT_EQ(phi_eval(s).terms, 5);
}

TEST(Phi, QChuVandermonde)
{
    // 2phi1(q^-n, b; c; q, q) = (c/b; q)_n / (c; q)_n b^n
    cplx q = e_half(0.29), b = e_half(0.41), c = e_half(-0.63);
    for (int n = 0; n <= 6; ++n) {
        cplx lhs = phi({{std::pow(q, -n), b}, {c}, q, q, n});
        cplx rhs = qpoch(c / b, q, n) / qpoch(c, q, n) * std::pow(b, n);
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-11) << n;
    }
}

TEST(Gauss2F1, Origin)
{
    EXPECT_EQ(gauss_2f1(0.3, -0.2, 1.1, 0.0), cplx(1.0));
}

TEST(Gauss2F1, Logarithm)
{
    const double z = 0.25;
    EXPECT_NEAR(std::abs(gauss_2f1(1.0, 1.0, 2.0, z) + std::log(1 - z) / z), 0.0, 1e-12);
}

TEST(Gauss2F1, ReferenceValues)
{
    struct Row {
        double a, b, c, z, value;
    };
    const Row rows[] = {
        {-0.4, 0.2, 1.3, 0.3, 0.98056283861247636146},  {0.4, -0.8, -0.6, 0.7, 1.5691202183985835552},
        {0.4, 0.2, 0.8, -2.0, 0.88706186626270103441},  {-0.3, 0.6, 1.2, 0.9, 0.80158035941543226667},
        {0.4, -0.2, 0.3, -0.5, 1.1112616987409623139},
    };
    for (auto r : rows) EXPECT_NEAR(gauss_2f1(r.a, r.b, r.c, r.z).real() / r.value - 1.0, 0.0, 1e-13) << r.z;
}

TEST(Gauss2F1, OutsideDiskRejected)
{
    EXPECT_THROW(gauss_2f1(0.3, 0.2, 1.1, 1.5), domain_error);
}

TEST(QRacah, BoundaryValues)
{
    QRacahSpec s{e_half(0.21), e_half(-0.37), e_half(0.52), 5, e_half(0.31)};
    for (int x = 0; x <= 5; ++x) EXPECT_NEAR(std::abs(qracah_w(0, x, s) - 1.0), 0.0, 1e-15);
    for (int n = 0; n <= 5; ++n) EXPECT_NEAR(std::abs(qracah_w(n, 0, s) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(qracah_weight(0, s) - 1.0), 0.0, 1e-15);
    EXPECT_THROW(qracah_w(6, 0, s), domain_error);
}

TEST(QRacah, TotalMassIsFirstNorm)
{
    QRacahSpec s{e_half(0.21), e_half(-0.37), e_half(0.57), 6, e_half(0.31)};
    cplx mass = 0.0;
    for (int x = 0; x <= s.N; ++x) mass += qracah_weight(x, s);
    EXPECT_NEAR(std::abs(mass * qracah_norm(0, s) - 1.0), 0.0, 1e-10);
}

TEST(QRacah, Orthogonality)
{
    Draw d(7);
    for (int N = 1; N <= 8; ++N)
        for (int k = 0; k < 5; ++k) {
            QRacahSpec s{d.unit(), d.unit(), d.unit(), N, d.q()};
            EXPECT_LT(qracah_orthogonality_residual(s), 1e-10) << "N=" << N;
        }
}

TEST(QRacah, SelfDuality)
{
    // Exchanging n and x maps (a, b, c) to (a, c q^{-N-1} / a, a b q^{N+1}).
    Draw d(8);
    for (int N = 1; N <= 8; ++N) {
        QRacahSpec s{d.unit(), d.unit(), d.unit(), N, d.q()};
        QRacahSpec t{s.a, s.c * std::pow(s.q, -N - 1) / s.a, s.a * s.b * std::pow(s.q, N + 1), N, s.q};
        for (int n = 0; n <= N; ++n)
            for (int x = 0; x <= N; ++x)
                EXPECT_NEAR(std::abs(qracah_w(n, x, s) - qracah_w(x, n, t)), 0.0, 1e-10) << N << " " << n << " " << x;
    }
}

TEST(Watson, TrivialOrder)
{
    cplx q = e_half(0.3);
    EXPECT_EQ(watson_check(e_half(0.1), e_half(0.2), e_half(0.3), e_half(0.4), e_half(0.5), 0, q), 0.0);
}

TEST(Watson, RandomDraws)
{
    Draw d(21);
    for (int k = 0; k < 200; ++k) {
        int n = k % 7;
        EXPECT_LT(watson_check(d.unit(), d.unit(), d.unit(), d.unit(), d.unit(), n, d.q()), 1e-10) << k;
    }
}

TEST(Watson, ConnectionSubstitutions)
{
    Draw d(22);
    for (int m = 1; m <= 6; ++m)
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= m; ++j) {
                const double g = d.real(), l1 = d.real(), l2 = d.real(), l3 = d.real(), l23 = l2 + l3;
                const cplx q = e_half(g);
                auto E = [&](double lam, int k) { return e_half(lam + k * g); };
                if (i + j <= m)
                    EXPECT_LT(watson_check(E(-2 * l23, -2 * j + 1 - i), E(2 * l1, m - j), E(-2 * l3, 1 - j),
                                           E(-2 * l23, 1 - m - j), std::pow(q, -j), i, q),
                              1e-10);
                else
                    EXPECT_LT(watson_check(E(-2 * l23, -2 * m + 1 + i), E(2 * l1, i), E(-2 * l3, 1 + i - m),
                                           E(-2 * l23, 1 - m - j), std::pow(q, j - m), m - i, q),
                              1e-10);
            }
}

TEST(Sears, TrivialOrder)
{
    cplx q = e_half(0.3), a1 = e_half(0.1), a2 = e_half(0.2), a3 = e_half(0.3), b1 = e_half(0.4), b2 = e_half(0.6);
    cplx b3 = q * a1 * a2 * a3 / (b1 * b2);
    EXPECT_EQ(sears_check(0, a1, a2, a3, b1, b2, b3, q), 0.0);
}

TEST(Sears, RandomDraws)
{
    Draw d(31);
    for (int k = 0; k < 200; ++k) {
        int n = k % 7;
        cplx q = d.q(), a1 = d.unit(), a2 = d.unit(), a3 = d.unit(), b1 = d.unit(), b2 = d.unit();
        cplx b3 = std::pow(q, 1 - n) * a1 * a2 * a3 / (b1 * b2);
        EXPECT_LT(sears_check(n, a1, a2, a3, b1, b2, b3, q), 1e-10) << k;
    }
}

TEST(Sears, ConnectionSubstitutions)
{
    Draw d(32);
    for (int m = 1; m <= 6; ++m)
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= m; ++j) {
                const double g = d.real(), l1 = d.real(), l2 = d.real(), l3 = d.real();
                const double l12 = l1 + l2, l23 = l2 + l3, l123 = l1 + l2 + l3;
                const cplx q = e_half(g);
                auto E = [&](double lam, int k) { return e_half(lam + k * g); };
                auto Q = [&](int k) { return std::pow(q, k); };
                if (i + j <= m)
                    EXPECT_LT(sears_check(j, Q(-i), E(-2 * l23, 1 - j - m), E(-2 * l12, 1 - i - m), Q(-m),
                                          E(-2 * l2, 1 - i - j), E(-2 * l123, 2 - i - j - m), q),
                              1e-10);
                else
                    EXPECT_LT(sears_check(m - j, E(-2 * l12, 1 - i - m), Q(i - m), E(-2 * l23, 1 - m - j), Q(-m),
                                          E(-2 * l123, 2 - 2 * m), E(-2 * l2, 1 - m), q),
                              1e-10);
            }
}

TEST(Sears, UnbalancedRejected)
{
    cplx q = e_half(0.3);
    EXPECT_THROW(sears_check(2, 0.5, 0.6, 0.7, 0.8, 0.9, 1.1, q), domain_error);
}
