#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qkernel.hpp"
#include "qseries.hpp"

namespace selq {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Variant { SumA, SumB, WellPoised87, Balanced43, RacahUniform };
enum class PairKind { ZeroOne, ZeroInf, Generic };

inline const char* variant_name(Variant v)
{
    switch (v) {
    case Variant::SumA: return "SumA";
    case Variant::SumB: return "SumB";
    case Variant::WellPoised87: return "WellPoised87";
    case Variant::Balanced43: return "Balanced43";
    case Variant::RacahUniform: return "RacahUniform";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s)
{
    for (Variant v : {Variant::SumA, Variant::SumB, Variant::WellPoised87, Variant::Balanced43,
                      Variant::RacahUniform})
        if (s == variant_name(v)) return v;
    throw domain_error("unknown formula variant '" + s + "'");
}

inline const std::vector<Variant>& all_variants()
{
    static const std::vector<Variant> v{Variant::SumA, Variant::SumB, Variant::WellPoised87,
                                        Variant::Balanced43, Variant::RacahUniform};
    return v;
}

/// Connection coefficients p_ij with C_{0,i,0,m-i} = sum_j p_ij C_{m-j,0,j,0}.
struct ConnectionMatrix {
    int m = 0;
    PairKind pair = PairKind::Generic;
    Variant variant = Variant::RacahUniform;
    cplx l1, l2, l3, g;
    CMatrix p;
};

/// Exponents attached to the three finite points z1 < z2 < z3.
struct Lambdas {
    cplx l1, l2, l3, g;
    cplx l12() const { return l1 + l2; }
    cplx l23() const { return l2 + l3; }
    cplx l123() const { return l1 + l2 + l3; }
};

namespace forms {

enum class Regime { Low, High };  // i + j <= m, i + j >= m

namespace detail {

struct Ctx {
    int m, i, j;
    Lambdas L;
    // s(lam + x g), i.e. <e(lam) q^x>_1 / 2i.
    cplx S(cplx lam, double x) const { return sin_pi(lam + x * L.g); }
    // e(lam) q^x
    cplx E(cplx lam, double x) const { return e_half(lam + x * L.g); }
    cplx Q(double x) const { return e_half(x * L.g); }

    cplx den(cplx v, const char* what) const
    {
        if (std::abs(v) < 1e-10)
            throw domain_error(selq::detail::cat("connection: vanishing ", what, " at (i,j)=(", i, ",", j, ")"));
        return v;
    }
};

}  // namespace detail

/// Sine-product double sum, first form.
inline cplx sum_a(int m, const Lambdas& L, int i, int j)
{
    detail::Ctx c{m, i, j, L};
    const cplx l1 = L.l1, l2 = L.l2, l3 = L.l3, l23 = L.l23(), l123 = L.l123();
    cplx tot = 0.0;
    for (int k = 0; k <= m - i; ++k) {
        int l = j - k;
        if (l < 0 || l > i) continue;
        cplx t = (k % 2) ? -1.0 : 1.0;
        for (int r = 1; r <= m - i - k; ++r)
            t *= c.S(l1, (i + r - 1) / 2.0) / c.den(c.S(l23, k + (i + r - 1) / 2.0), "s(l23+..)");
        for (int r = 1; r <= k; ++r)
            t *= c.S(l2, (i + r - 1) / 2.0) / c.den(c.S(l23, k + (i - r - 1) / 2.0), "s(l23+..)");
        for (int r = 1; r <= i - l; ++r)
            t *= c.S(l123, (m + i + k - r - 1) / 2.0) * c.S(0.0, (m - i - k + r) / 2.0) /
                 c.den(c.S(l23, j + (r - 1) / 2.0) * c.S(0.0, r / 2.0), "s(l23+..)s(rg/2)");
        for (int r = 1; r <= l; ++r)
            t *= c.S(l3, (k + r - 1) / 2.0) * c.S(0.0, (k + r) / 2.0) /
                 c.den(c.S(l23, j - (r + 1) / 2.0) * c.S(0.0, r / 2.0), "s(l23+..)s(rg/2)");
        tot += t;
    }
    return (i % 2) ? -tot : tot;
}

/// Sine-product double sum, second form.
inline cplx sum_b(int m, const Lambdas& L, int i, int j)
{
    detail::Ctx c{m, i, j, L};
    const cplx l1 = L.l1, l2 = L.l2, l3 = L.l3, l23 = L.l23(), l123 = L.l123();
    cplx tot = 0.0;
    for (int k = 0; k <= i; ++k) {
        int l = j - k;
        if (l < 0 || l > m - i) continue;
        cplx t = (l % 2) ? -1.0 : 1.0;
        for (int r = 1; r <= i - k; ++r)
            t *= c.S(l123, (m + i - r - 1) / 2.0) / c.den(c.S(l23, k + (m - i + r - 1) / 2.0), "s(l23+..)");
        for (int r = 1; r <= k; ++r)
            t *= c.S(l3, (m - i + r - 1) / 2.0) / c.den(c.S(l23, k + (m - i - r - 1) / 2.0), "s(l23+..)");
        for (int r = 1; r <= m - i - l; ++r)
            t *= c.S(l1, (i - k + r - 1) / 2.0) * c.S(0.0, (i - k + r) / 2.0) /
                 c.den(c.S(l23, j + (r - 1) / 2.0) * c.S(0.0, r / 2.0), "s(l23+..)s(rg/2)");
        for (int r = 1; r <= l; ++r)
            t *= c.S(l2, (k + r - 1) / 2.0) * c.S(0.0, (k + r) / 2.0) /
                 c.den(c.S(l23, j - (r + 1) / 2.0) * c.S(0.0, r / 2.0), "s(l23+..)s(rg/2)");
        tot += t;
    }
    return (i % 2) ? -tot : tot;
}

/// Which argument the very-well-poised 8phi7 uses; only TwelveArg reproduces the sums.
enum class Arg87 { TwelveArg, TwentyThreeArg };

inline cplx well_poised87(int m, const Lambdas& L, int i, int j, Regime reg,
                          Arg87 arg = Arg87::TwelveArg)
{
    detail::Ctx c{m, i, j, L};
    const cplx l1 = L.l1, l2 = L.l2, l3 = L.l3, l23 = L.l23(), l123 = L.l123(), l12 = L.l12();
    const double h = 0.5;
    cplx pre;
    TerminatingSeries t;
    if (reg == Regime::Low) {
        if (i + j > m) throw domain_error("well_poised87: Low regime needs i+j <= m");
        pre = ((i + j) % 2) ? -1.0 : 1.0;
        for (int r = 1; r <= m - i - j; ++r)
            pre *= c.S(l1, (i + r - 1) * h) / c.den(c.S(l23, j + (i + r - 1) * h), "s(l23+..)");
        for (int r = 1; r <= j; ++r)
            pre *= c.S(l2, (i + r - 1) * h) / c.den(c.S(l23, (i + j + r - 2) * h), "s(l23+..)");
        for (int r = 1; r <= i; ++r)
            pre *= c.S(l123, (m + j + r - 2) * h) * c.S(0.0, (m - i - j + r) * h) /
                   c.den(c.S(l23, j + (r - 1) * h) * c.S(0.0, r * h), "s(l23+..)s(rg/2)");
        t.num = {c.E(-l23, -i * h - j + 3 * h), -c.E(-l23, -i * h - j + 3 * h), c.E(2.0 * l1, m - j),
                 c.E(-2.0 * l23, 1 - m - j),    c.E(-2.0 * l23, -2 * j + 1 - i), c.Q(-i),
                 c.E(-2.0 * l3, 1 - j),         c.Q(-j)};
        t.den = {c.E(-l23, -i * h - j + h),    -c.E(-l23, -i * h - j + h), c.E(-2.0 * l2, 1 - i - j),
                 c.E(-2.0 * l23, 2 - i - j),   c.E(-2.0 * l123, 2 - m - i - j), c.Q(m - i - j + 1),
                 c.E(-2.0 * l23, 2 - 2 * j)};
        t.n = std::min(i, j);
    } else {
        if (i + j < m) throw domain_error("well_poised87: High regime needs i+j >= m");
        pre = (m % 2) ? -1.0 : 1.0;
        for (int r = 1; r <= m - i; ++r)
            pre *= c.S(l2, (i + r - 1) * h) / c.den(c.S(l23, (m + r - 2) * h), "s(l23+..)");
        for (int r = 1; r <= m - j; ++r)
            pre *= c.S(l123, (m + j + r - 2) * h) / c.den(c.S(l23, j + (r - 1) * h), "s(l23+..)");
        for (int r = 1; r <= i + j - m; ++r)
            pre *= c.S(l3, (m - i + r - 1) * h) * c.S(0.0, (m - i + r) * h) /
                   c.den(c.S(l23, (m - i + j + r - 2) * h) * c.S(0.0, r * h), "s(l23+..)s(rg/2)");
        t.num = {c.E(-l23, (i + 3) * h - m),   -c.E(-l23, (i + 3) * h - m), c.E(-2.0 * l23, 1 + i - 2 * m),
                 c.E(-2.0 * l23, 1 - m - j),   c.E(2.0 * l1, i),            c.E(-2.0 * l3, 1 + i - m),
                 c.Q(j - m),                   c.Q(i - m)};
        t.den = {c.E(-l23, (i + 1) * h - m),   -c.E(-l23, (i + 1) * h - m), c.E(-2.0 * l23, 2 - m),
                 c.E(-2.0 * l23, 2 - m + i - j), c.E(-2.0 * l123, 2 - 2 * m), c.E(-2.0 * l2, 1 - m),
                 c.Q(1 + i + j - m)};
        t.n = std::min(m - i, m - j);
    }
    t.q = c.Q(1);
    t.z = arg == Arg87::TwelveArg ? c.E(-2.0 * l12, 2 - i) : c.E(-2.0 * l23, 2 - i);
    return pre * phi(t);
}

/// Balanced 4phi3 forms. `alt` selects the second printed form of each regime.
inline cplx balanced43(int m, const Lambdas& L, int i, int j, Regime reg, bool alt = false)
{
    detail::Ctx c{m, i, j, L};
    const cplx l1 = L.l1, l2 = L.l2, l3 = L.l3, l23 = L.l23(), l123 = L.l123(), l12 = L.l12();
    const double h = 0.5;
    cplx common = 1.0;
    for (int r = 1; r <= i; ++r) common *= c.S(0.0, (m - i + r) * h) / c.den(c.S(0.0, r * h), "s(rg/2)");
    cplx den0 = 1.0;
    for (int r = 1; r <= m + 1; ++r) den0 *= c.S(l23, (j + r - 2) * h);
    c.den(den0, "prod s(l23+..)");
    const cplx sgn_ij = ((i + j) % 2) ? -1.0 : 1.0;
    TerminatingSeries t;
    t.q = c.Q(1);
    t.z = t.q;
    auto racah_like = [&] {
        t.num = {c.Q(-j), c.Q(-i), c.E(2.0 * l23, j - 1), c.E(2.0 * l12, i - 1)};
        t.den = {c.Q(-m), c.E(2.0 * l2, 0), c.E(2.0 * l123, m - 1)};
        t.n = std::min(i, j);
    };
    if (reg == Regime::Low) {
        if (i + j > m) throw domain_error("balanced43: Low regime needs i+j <= m");
        cplx num = c.S(l23, j - h);
        if (!alt) {
            for (int r = 1; r <= i; ++r) num *= c.S(l123, (m + j + r - 2) * h);
            for (int r = 1; r <= j; ++r) num *= c.S(l2, (i + r - 1) * h);
            for (int r = 1; r <= m - i - j; ++r) num *= c.S(l1, (i + r - 1) * h);
            t.num = {c.Q(-j), c.Q(-i), c.E(-2.0 * l23, 1 - j - m), c.E(-2.0 * l12, 1 - i - m)};
            t.den = {c.Q(-m), c.E(-2.0 * l2, 1 - i - j), c.E(-2.0 * l123, 2 - i - j - m)};
            t.n = std::min(i, j);
        } else {
            for (int r = 1; r <= i; ++r) num *= c.S(l123, (m + r - 2) * h);
            for (int r = 1; r <= j; ++r) num *= c.S(l2, (r - 1) * h);
            for (int r = 1; r <= m - i - j; ++r) num *= c.S(l1, (i + r - 1) * h);
            racah_like();
        }
        return sgn_ij * common * num / den0 * phi(t);
    }
    if (i + j < m) throw domain_error("balanced43: High regime needs i+j >= m");
    cplx num = c.S(l23, j - h);
    if (!alt) {
        for (int r = 1; r <= m - j; ++r) num *= c.S(l123, (m + j + r - 2) * h);
        for (int r = 1; r <= i + j - m; ++r) num *= c.S(l3, (m - i + r - 1) * h);
        for (int r = 1; r <= m - i; ++r) num *= c.S(l2, (i + r - 1) * h);
        t.num = {c.E(-2.0 * l12, 1 - i - m), c.E(-2.0 * l23, 1 - j - m), c.Q(j - m), c.Q(i - m)};
        t.den = {c.E(-2.0 * l123, 2 - 2 * m), c.E(-2.0 * l2, 1 - m), c.Q(-m)};
        t.n = std::min(m - i, m - j);
        return ((m % 2) ? -1.0 : 1.0) * common * num / den0 * phi(t);
    }
    for (int r = 1; r <= i; ++r) num *= c.S(l123, (m + r - 2) * h);
    for (int r = 1; r <= j; ++r) num *= c.S(l2, (r - 1) * h);
    cplx den = den0;
    for (int r = 1; r <= i + j - m; ++r) den *= c.S(l1, (m - j + r - 1) * h);
    racah_like();
    return sgn_ij * common * num / c.den(den, "s(l1+..)") * phi(t);
}

/// q-Racah form valid for all (i, j); q-Pochhammer prefactor.
inline cplx racah_uniform(int m, const Lambdas& L, int i, int j)
{
    detail::Ctx c{m, i, j, L};
    const cplx l1 = L.l1, l2 = L.l2, l3 = L.l3, l23 = L.l23(), l123 = L.l123(), l12 = L.l12();
    const cplx q = c.Q(1);
    cplx pre = (1.0 - c.E(2.0 * l23, 2 * j - 1)) / c.den(1.0 - c.E(2.0 * l23, j - 1), "1-e(2l23)q^(j-1)");
    pre *= qpoch(c.E(2.0 * l123, m - 1), q, i) / c.den(qpoch(c.E(2.0 * l1, 0), q, i), "(e(2l1);q)_i");
    pre *= qpoch(c.E(2.0 * l1, 0), q, m) / c.den(qpoch(c.E(2.0 * l23, j), q, m), "(e(2l23)q^j;q)_m");
    pre *= qpoch(c.E(2.0 * l2, 0), q, j) / c.den(qpoch(c.E(-2.0 * l1, 1 - m), q, j), "(e(-2l1)q^(1-m);q)_j");
    pre *= qpoch(c.Q(-m), q, i) / c.den(qpoch(q, q, i), "(q;q)_i");
    pre *= e_half(double(-m - j) * l1 + double(m - i - j) * l2 + double(m - i) * l3 + double(i) * L.g);
    TerminatingSeries t{{c.Q(-i), c.E(2.0 * l12, i - 1), c.Q(-j), c.E(2.0 * l23, j - 1)},
                        {c.E(2.0 * l2, 0), c.Q(-m), c.E(2.0 * l123, m - 1)},
                        q,
                        q,
                        std::min(i, j)};
    return pre * phi(t);
}

/// The same q-Racah value with the bracket (sine) prefactor.
inline cplx racah_bracket(int m, const Lambdas& L, int i, int j)
{
    detail::Ctx c{m, i, j, L};
    const cplx l1 = L.l1, l2 = L.l2, l23 = L.l23(), l123 = L.l123(), l12 = L.l12();
    const double h = 0.5;
    cplx num = c.S(l23, j - h), den = 1.0;
    for (int r = 1; r <= i; ++r) num *= c.S(l123, (m + r - 2) * h);
    for (int r = 1; r <= j; ++r) num *= c.S(l2, (r - 1) * h);
    for (int r = 1; r <= m; ++r) num *= c.S(l1, (r - 1) * h);
    for (int r = 1; r <= m + 1; ++r) den *= c.S(l23, (j + r - 2) * h);
    for (int r = 1; r <= i; ++r) den *= c.S(l1, (r - 1) * h);
    for (int r = 1; r <= j; ++r) den *= c.S(l1, (m - j + r - 1) * h);
    cplx pre = ((i + j) % 2) ? -1.0 : 1.0;
    for (int r = 1; r <= i; ++r) pre *= c.S(0.0, (m - i + r) * h) / c.den(c.S(0.0, r * h), "s(rg/2)");
    TerminatingSeries t{{c.Q(-i), c.E(2.0 * l12, i - 1), c.Q(-j), c.E(2.0 * l23, j - 1)},
                        {c.E(2.0 * l2, 0), c.Q(-m), c.E(2.0 * l123, m - 1)},
                        c.Q(1),
                        c.Q(1),
                        std::min(i, j)};
    return pre * num / c.den(den, "bracket denominator") * phi(t);
}

inline cplx entry(int m, const Lambdas& L, int i, int j, Variant v)
{
    switch (v) {
    case Variant::SumA: return sum_a(m, L, i, j);
    case Variant::SumB: return sum_b(m, L, i, j);
    case Variant::WellPoised87: return well_poised87(m, L, i, j, i + j <= m ? Regime::Low : Regime::High);
    case Variant::Balanced43: return balanced43(m, L, i, j, i + j <= m ? Regime::Low : Regime::High);
    case Variant::RacahUniform: return racah_uniform(m, L, i, j);
    }
    return 0.0;
}

}  // namespace forms

inline ConnectionMatrix connect_generic(int m, cplx l1, cplx l2, cplx l3, cplx g, Variant v)
{
    if (m < 1) throw domain_error("connect_generic: m must be >= 1");
    Lambdas L{l1, l2, l3, g};
    ConnectionMatrix r{m, PairKind::Generic, v, l1, l2, l3, g, CMatrix(m + 1, m + 1)};
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
            cplx x = forms::entry(m, L, i, j, v);
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
                throw numeric_error(detail::cat("connection: non-finite entry at (", i, ",", j, ")"));
            r.p(i, j) = x;
        }
    return r;
}

inline void require_generic(const ExponentChart& ch, const char* who)
{
    auto v = genericity_check(ch);
    if (!v.empty())
        throw domain_error(detail::cat(who, ": chart is not generic (", v.front().family, ", i=",
                                       v.front().i, ", value ", v.front().value.real(), ")"));
}

/// p^{(0,1)}: solutions around 0 in terms of those around 1.
inline ConnectionMatrix connect_01(const ExponentChart& ch, Variant v = Variant::SumA,
                                   bool allow_degenerate = false)
{
    if (!allow_degenerate) require_generic(ch, "connect_01");
    auto r = connect_generic(ch.m, ch.a, ch.c, ch.b, ch.g, v);
    r.pair = PairKind::ZeroOne;
    return r;
}

/// p^{(0,inf)}: the same code path with a and c exchanged.
inline ConnectionMatrix connect_0inf(const ExponentChart& ch, Variant v = Variant::SumA,
                                     bool allow_degenerate = false)
{
    if (!allow_degenerate) require_generic(ch, "connect_0inf");
    auto r = connect_generic(ch.m, ch.c, ch.a, ch.b, ch.g, v);
    r.pair = PairKind::ZeroInf;
    return r;
}

inline double max_abs(const CMatrix& a)
{
    return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
}

/// max_ij |sum_x p_ix(a,b,c) p_xj(b,a,c) - delta_ij|, each entry divided by
/// max(1, sum_x |p_ix p_xj|) so that charts with large cancelling products are
/// judged at their rounding level.
inline double inverse_identity_residual(const ExponentChart& ch, Variant v = Variant::SumA)
{
    ExponentChart sw = ch;
    std::swap(sw.a, sw.b);
    const CMatrix A = connect_01(ch, v).p, B = connect_01(sw, v).p;
    const Eigen::MatrixXd scale = A.cwiseAbs() * B.cwiseAbs();
    const CMatrix D = A * B - CMatrix::Identity(ch.m + 1, ch.m + 1);
    double worst = 0.0;
    for (int i = 0; i <= ch.m; ++i)
        for (int j = 0; j <= ch.m; ++j) worst = std::max(worst, std::abs(D(i, j)) / std::max(1.0, scale(i, j)));
    return worst;
}

/// The q-Racah parameters whose orthogonality encodes the inversion identity.
inline QRacahSpec inversion_racah_spec(const ExponentChart& ch)
{
    const cplx q = e_half(ch.g);
    return {e_half(2.0 * ch.c - ch.g), e_half(2.0 * ch.a - ch.g),
            e_half(2.0 * (ch.b + ch.c) + double(ch.m - 1) * ch.g), ch.m, q};
}

// ---------------------------------------------------------------------------
// Degenerate (D-type) point

inline ConnectionMatrix connect_dtype(int rho, Variant v = Variant::SumA)
{
    return connect_01(dtype_chart(rho), v, true);
}

/// Residuals of p_ij = (-1)^i p_{i,m-j} and p_ij = (-1)^j p_{m-i,j}.
inline std::pair<double, double> dtype_symmetry_residual(int rho)
{
    const CMatrix p = connect_dtype(rho).p;
    const int m = 2 * rho;
    double r1 = 0, r2 = 0;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
            r1 = std::max(r1, std::abs(p(i, j) - double(i % 2 ? -1 : 1) * p(i, m - j)));
            r2 = std::max(r2, std::abs(p(i, j) - double(j % 2 ? -1 : 1) * p(m - i, j)));
        }
    return {r1, r2};
}

namespace detail {

struct DTypeSines {
    int rho;
    double D;  // 2(2 rho + 1)
    explicit DTypeSines(int r) : rho(r), D(2.0 * (2 * r + 1)) {}
    double S(double k) const { return sin_pi(k / D); }
    double C(double k) const { return cos_pi(k / D); }
    double brace(int j) const
    {
        const int r = rho;
        return 1.0 - S(2) * S(3) * S(j) * S(j + 1) / (S(1) * S(1) * S(2 * r) * S(2 * r + 2)) +
               S(3) * S(4) * S(j - 1) * S(j) * S(j + 1) * S(j + 2) /
                   (S(2) * S(2 * r) * S(2 * r) * S(1) * S(2 * r - 1) * S(2 * r - 1));
    }
};

}  // namespace detail

/// Closed-form rows of the D-type matrix for i in {0, 1, 2, m-2, m-1, m}.
/// Rows 1 and m-1 use s((2j+1)/(2 rho + 1)); see `dtype_closed_row_printed`.
inline std::vector<double> dtype_closed_row(int rho, int i)
{
    const int m = 2 * rho;
    detail::DTypeSines A(rho);
    std::vector<double> out(m + 1);
    for (int j = 0; j <= m; ++j) {
        double sg = (j % 2) ? -1.0 : 1.0;
        double base = A.S(2 * j + 1);
        double one = A.S(1) * A.S(2 * (2 * j + 1)) / A.S(2);
        if (i == 0) out[j] = sg * base;
        else if (i == m) out[j] = base;
        else if (i == 1) out[j] = -sg * one;
        else if (i == m - 1) out[j] = -one;
        else if (i == 2) out[j] = sg * base * A.brace(j);
        else if (i == m - 2) out[j] = base * A.brace(j);
        else throw domain_error(detail::cat("dtype_closed_row: unsupported row ", i));
    }
    return out;
}

/// Rows 1 and m-1 exactly as printed, kept to report the discrepancy.
inline std::vector<double> dtype_closed_row_printed(int rho, int i)
{
    const int m = 2 * rho;
    if (i != 1 && i != m - 1) return dtype_closed_row(rho, i);
    detail::DTypeSines A(rho);
    std::vector<double> out(m + 1);
    for (int j = 0; j <= m; ++j) {
        double v = A.S(1) * A.S(2 * j + 1) / A.S(2);
        out[j] = (i == 1) ? ((j % 2) ? v : -v) : -v;
    }
    return out;
}

/// Closed-form columns for j in {0, 1, m-1, m}; c(.) is cos(pi .).
inline std::vector<double> dtype_closed_col(int rho, int j)
{
    const int m = 2 * rho;
    detail::DTypeSines A(rho);
    std::vector<double> out(m + 1);
    for (int i = 0; i <= m; ++i) {
        double sg = (i % 2) ? -1.0 : 1.0;
        double cc = A.S(3) * A.C(2 * i + 1) / A.C(1);
        if (j == 0) out[i] = sg * A.S(1);
        else if (j == m) out[i] = A.S(1);
        else if (j == 1) out[i] = -sg * cc;
        else if (j == m - 1) out[i] = -cc;
        else throw domain_error(detail::cat("dtype_closed_col: unsupported column ", j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Derivation path: repeated loop relations, used as an independent check.

namespace derivation {

/// Expand C_{0,i,0,m-i} in the basis C_{m-j,0,j,0} by the two loop relations.
inline CMatrix recurrence_matrix(int m, const Lambdas& L)
{
    const cplx l1 = L.l1, l2 = L.l2, l3 = L.l3, l23 = L.l23(), l123 = L.l123();
    // <e(lam) q^x>_n via the sine identity.
    auto br = [&](cplx lam, double x, int n) -> cplx {
        if (n == 0) return 0.0;
        return 2.0 * I_unit * sin_pi(lam + (x + (n - 1) / 2.0) * L.g) * sin_pi(double(n) * L.g / 2.0) /
               sin_pi(L.g / 2.0);
    };
    const int W = m + 1;
    auto key = [&](int i1, int j1, int i2) { return (i1 * W + j1) * W + i2; };
    std::vector<CVector> memo(W * W * W);
    std::vector<char> have(W * W * W, 0);
    std::function<CVector(int, int, int, int)> ex = [&](int i1, int j1, int i2, int j2) -> CVector {
        int k = key(i1, j1, i2);
        if (have[k]) return memo[k];
        CVector v = CVector::Zero(W);
        if (j2 >= 1) {
            cplx d = br(l23, i2 + j1 / 2.0, j2);
            v = br(l1, j1 / 2.0, i1 + 1) / d * ex(i1 + 1, j1, i2, j2 - 1) -
                br(l2, j1 / 2.0, i2 + 1) / d * ex(i1, j1, i2 + 1, j2 - 1);
        } else if (j1 >= 1) {
            cplx d = br(l23, i2 + j2 / 2.0, j1);
            v = -br(l123, i2 + j1 + j2 / 2.0 - 1, i1 + 1) / d * ex(i1 + 1, j1 - 1, i2, j2) -
                br(l3, j2 / 2.0, i2 + 1) / d * ex(i1, j1 - 1, i2 + 1, j2);
        } else {
            v(i2) = 1.0;
        }
        memo[k] = v;
        have[k] = 1;
        return v;
    };
    CMatrix p(W, W);
    for (int i = 0; i <= m; ++i) p.row(i) = ex(0, i, 0, m - i).transpose();
    return p;
}

}  // namespace derivation

}  // namespace selq
