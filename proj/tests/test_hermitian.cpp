#include <gtest/gtest.h>

#include <random>

#include <selq/hermitian.hpp>

#include "support.hpp"

using namespace selq;
using selq::testing::random_chart;

TEST(Monodromy, AroundZeroIsUnitDiagonal)
{
    ExponentChart ch{3, -0.31, 0.22, -0.45, 0.17};
    auto M = monodromy(ch, Singularity::Zero).matrix;
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 3; ++j) {
            if (i == j) EXPECT_NEAR(std::abs(M(i, i)), 1.0, 1e-15);
            else EXPECT_EQ(M(i, j), cplx(0.0));
        }
    EXPECT_THROW(monodromy(ch, Singularity::Infinity), domain_error);
}

TEST(Monodromy, ProductMatchesExponentsAtInfinity)
{
    std::mt19937 rng(1);
    for (int m = 1; m <= 4; ++m) EXPECT_LT(infinity_trace_residual(random_chart(rng, m)), 1e-9) << m;
}

TEST(Monodromy, DegeneratePointDoubledEigenvalue)
{
    // rho = 1: exponents 0 and 1 at the origin give the same phase.
    auto M = monodromy(dtype_chart(1), Singularity::Zero, true).matrix;
    EXPECT_NEAR(std::abs(M(0, 0) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(M(2, 2) - 1.0), 0.0, 1e-14);
}

TEST(DiagonalForm, WeightsMatchInverseSelfIntersections)
{
    std::mt19937 rng(2);
    for (int m = 1; m <= 4; ++m)
        for (int k = 0; k < 5; ++k) EXPECT_LT(diagonal_weight_agreement(random_chart(rng, m)), 1e-11) << m;
}

TEST(DiagonalForm, OneVariableWeights)
{
    ExponentChart ch{1, -0.31, 0.22, -0.45, 0.17};
    const double a = -0.31, b = 0.22, c = -0.45, li = ch.lambda_inf().real();
    cplx w0 = 2.0 / I_unit * sin_pi(li) * sin_pi(b) / sin_pi(-a - c);
    cplx w1 = 2.0 / I_unit * sin_pi(a) * sin_pi(c) / sin_pi(a + c);
    EXPECT_NEAR(std::abs(diagonal_weight(ch, 0) - w0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(diagonal_weight(ch, 1) - w1), 0.0, 1e-14);
}

TEST(DiagonalForm, RealWeightsUpToPhaseForRealCharts)
{
    // i^m w_k is real for real exponents.
    std::mt19937 rng(3);
    for (int m = 1; m <= 4; ++m) {
        auto ch = random_chart(rng, m);
        for (int k = 0; k <= m; ++k) {
            cplx w = std::pow(I_unit, m) * diagonal_weight(ch, k);
            EXPECT_LT(std::fabs(w.imag()), 1e-12 * std::abs(w)) << m << " " << k;
        }
    }
}

TEST(DiagonalForm, InvariantUnderBothLoops)
{
    std::mt19937 rng(4);
    for (int m = 1; m <= 4; ++m) {
        auto ch = random_chart(rng, m);
        auto f = diagonal_form(ch);
        EXPECT_LT(invariance_residual(f, monodromy(ch, Singularity::Zero)).dagger, 1e-15);
        auto r = invariance_residual(f, monodromy(ch, Singularity::One));
        EXPECT_LT(r.dagger, m <= 2 ? 1e-10 : 1e-9) << m;
        EXPECT_EQ(r.leakage, 0.0);
    }
}

TEST(DiagonalForm, WrongWeightsAreNotInvariant)
{
    ExponentChart ch{2, -0.31, 0.22, -0.45, 0.17};
    auto f = diagonal_form(ch);
    f.weights(1) *= 1.1;
    EXPECT_GT(invariance_residual(f, monodromy(ch, Singularity::One)).dagger, 1e-3);
}

TEST(DType, SubspaceIndices)
{
    EXPECT_EQ(dtype_indices(1, FormKind::DTypePairs), (std::vector<int>{0, 1}));
    EXPECT_EQ(dtype_indices(2, FormKind::DTypeEven), (std::vector<int>{0, 2}));
    EXPECT_EQ(dtype_indices(3, FormKind::DTypeEven), (std::vector<int>{0, 2}));
    EXPECT_EQ(dtype_indices(4, FormKind::DTypeEven), (std::vector<int>{0, 2, 4}));
    EXPECT_THROW(dtype_indices(2, FormKind::Diagonal), domain_error);
}

TEST(DType, SubspaceAndFormInvariant)
{
    for (int rho = 1; rho <= 3; ++rho)
        for (auto kind : {FormKind::DTypePairs, FormKind::DTypeEven}) {
            auto r = dtype_invariance_residual(rho, kind);
            double tol = rho <= 2 ? 1e-10 : 1e-9;
            EXPECT_LT(r.subspace_residual, tol) << rho << " " << form_name(kind);
            EXPECT_LT(r.form_residual, tol) << rho << " " << form_name(kind);
        }
}

TEST(DType, PrintedNormDiffersFromSelfIntersection)
{
    // The displayed C_i^2 product agrees with C_i . C_i only at i = 0.
    const auto ch = dtype_chart(2);
    EXPECT_NEAR(std::abs(dtype_printed_ci2(2, 0) / cycle_self_intersection(0, ch) - 1.0), 0.0, 1e-12);
    EXPECT_GT(std::abs(dtype_printed_ci2(2, 1) / cycle_self_intersection(1, ch) - 1.0), 1e-3);
}

TEST(SampleF, OneVariable)
{
    QuadratureConfig cfg;
    ExponentChart ch{1, -0.4, -0.4, -0.4, 0.3};
    auto s = sample_F(ch, 0.5, diagonal_form(ch), cfg);
    EXPECT_LT(s.rel_diff, 1e-6);
    EXPECT_LT(s.imag_ratio, 1e-8);
}

TEST(SampleF, TwoVariables)
{
    QuadratureConfig cfg;
    ExponentChart ch{2, -0.4, -0.4, -0.4, -0.3};
    auto s = sample_F(ch, 0.5, diagonal_form(ch), cfg);
    EXPECT_LT(s.rel_diff, 1e-4);
    EXPECT_LT(s.imag_ratio, 1e-8);
}
