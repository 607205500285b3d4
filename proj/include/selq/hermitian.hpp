#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "connection.hpp"
#include "integrals.hpp"
#include "qkernel.hpp"

namespace selq {

// ---------------------------------------------------------------------------
// Monodromy

struct MonodromyMatrix {
    Singularity base = Singularity::Zero;
    CMatrix matrix;
};

/// Action on the column of I-solutions of a loop around 0 or 1:
/// M_0 = diag e(2 e_j^(0)), M_1 = P diag e(2 e_j^(1)) P^-1.
inline MonodromyMatrix monodromy(const ExponentChart& ch, Singularity base, bool allow_degenerate = false)
{
    const int n = ch.m + 1;
    if (base == Singularity::Infinity) throw domain_error("monodromy: base must be 0 or 1");
    auto ex = char_exponents(ch, base);
    CVector d(n);
    for (int j = 0; j < n; ++j) d(j) = e_half(2.0 * ex.values[j]);
    if (base == Singularity::Zero) return {base, CMatrix(d.asDiagonal())};
    const CMatrix P = connect_01(ch, Variant::SumA, allow_degenerate).p;
    Eigen::FullPivLU<CMatrix> lu(P);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-12)
        throw numeric_error(detail::cat("monodromy: connection matrix is singular (|det| = ",
                                        std::abs(lu.determinant()), ")"));
    return {base, P * d.asDiagonal() * lu.inverse()};
}

/// |tr(M_0 M_1) - sum_j e(-2 e_j^(inf))|: the loop around both finite points is
/// the inverse loop around infinity.
inline double infinity_trace_residual(const ExponentChart& ch)
{
    const CMatrix M = monodromy(ch, Singularity::Zero).matrix * monodromy(ch, Singularity::One).matrix;
    cplx t = 0.0;
    for (cplx e : char_exponents(ch, Singularity::Infinity).values) t += e_half(-2.0 * e);
    return std::abs(M.trace() - t);
}

// ---------------------------------------------------------------------------
// Forms

enum class FormKind { Diagonal, DTypePairs, DTypeEven };

inline const char* form_name(FormKind k)
{
    switch (k) {
    case FormKind::Diagonal: return "Diagonal";
    case FormKind::DTypePairs: return "DTypePairs";
    case FormKind::DTypeEven: return "DTypeEven";
    }
    return "?";
}

/// F = sum_t weights_t |v_t|^2 with v = subspace * I (rows are combinations
/// of the I-solutions; the identity for the diagonal form).
struct HermitianFormSpec {
    FormKind kind = FormKind::Diagonal;
    BasisTag basis = BasisTag::I;
    int m = 0;
    CMatrix subspace;
    CVector weights;

    CMatrix H() const { return CMatrix(weights.asDiagonal()); }
};

namespace detail {

inline cplx nonzero_sin(cplx x, const char* what, int j)
{
    cplx s = sin_pi(x);
    if (std::abs(s) < 1e-12) throw domain_error(cat("vanishing sine ", what, " at j=", j));
    return s;
}

}  // namespace detail

/// Coefficient of |I_k|^2 in the sine-product form of the diagonal invariant.
inline cplx diagonal_weight(const ExponentChart& ch, int k)
{
    const int m = ch.m;
    if (k < 0 || k > m) throw domain_error(detail::cat("diagonal_weight: k=", k, " outside [0, m]"));
    const cplx a = ch.a, b = ch.b, c = ch.c, h = 0.5 * ch.g, li = ch.lambda_inf();
    cplx w = std::pow(2.0 / I_unit, m) / factorial(m);
    for (int j = 1; j <= k; ++j) {
        double jm1 = j - 1;
        w *= sin_pi(a + jm1 * h) * sin_pi(c + jm1 * h) * sin_pi(double(j) * h);
        w /= detail::nonzero_sin(a + c + double(k + j - 2) * h, "s(a+c+(k+j-2)g/2)", j) *
             detail::nonzero_sin(h, "s(g/2)", j);
    }
    for (int j = 1; j <= m - k; ++j) {
        double jm1 = j - 1;
        w *= sin_pi(li + jm1 * h) * sin_pi(b + jm1 * h) * sin_pi(double(j) * h);
        w /= detail::nonzero_sin(-a - c - double(m - 1) * ch.g + double(m - k + j - 2) * h,
                                 "s(-a-c-(m-1)g+(m-k+j-2)g/2)", j) *
             detail::nonzero_sin(h, "s(g/2)", j);
    }
    return w;
}

/// max_k |w_k (C_k . C_k) - 1|: the sine products against the self-intersections.
inline double diagonal_weight_agreement(const ExponentChart& ch)
{
    double worst = 0.0;
    for (int k = 0; k <= ch.m; ++k)
        worst = std::max(worst, std::abs(diagonal_weight(ch, k) * cycle_self_intersection(k, ch) - 1.0));
    return worst;
}

inline HermitianFormSpec diagonal_form(const ExponentChart& ch)
{
    const int n = ch.m + 1;
    HermitianFormSpec f{FormKind::Diagonal, BasisTag::I, ch.m, CMatrix::Identity(n, n), CVector(n)};
    for (int k = 0; k < n; ++k) f.weights(k) = diagonal_weight(ch, k);
    return f;
}

/// The C_i^2 product displayed with the D-type theorems (kept for the report;
/// it disagrees with C_i . C_i for i >= 1).
inline cplx dtype_printed_ci2(int rho, int i)
{
    if (rho < 1 || i < 0 || i > rho) throw domain_error("dtype_printed_ci2: need rho >= 1, 0 <= i <= rho");
    const int m = 2 * rho;
    const double D = 2.0 * (2 * rho + 1);
    auto f = [&](int j) {
        return sin_pi((-2.0 * rho + j - 2) / D) * sin_pi(1.0 / D) /
               (std::pow(sin_pi((-2.0 * rho + j - 1) / D), 2) * sin_pi(j / D));
    };
    cplx r = factorial(m) * std::pow(0.5 * I_unit, m);
    for (int j = 1; j <= i; ++j) r *= f(j);
    for (int j = 1; j <= 2 * rho - i; ++j) r *= f(j);
    return r;
}

/// Indices i of the combinations I_i + I_{2 rho - i} (or I_rho alone when i = rho).
inline std::vector<int> dtype_indices(int rho, FormKind kind)
{
    std::vector<int> idx;
    if (kind == FormKind::DTypePairs) {
        for (int i = 0; i <= rho; ++i) idx.push_back(i);
    } else if (kind == FormKind::DTypeEven) {
        for (int i = 0; 2 * i < rho; ++i) idx.push_back(2 * i);
        if (rho % 2 == 0) idx.push_back(rho);
    } else {
        throw domain_error("dtype_indices: not a D-type form");
    }
    return idx;
}

/// Weights 1/(2 C_i . C_i) for the pairs and 1/(C_rho . C_rho) for I_rho, with
/// C_i . C_i from the self-intersection formula at the D-type chart.
inline HermitianFormSpec dtype_form(int rho, FormKind kind)
{
    if (rho < 1) throw domain_error("dtype_form: rho must be >= 1");
    const ExponentChart ch = dtype_chart(rho);
    const int m = 2 * rho;
    const auto idx = dtype_indices(rho, kind);
    const int r = int(idx.size());
    HermitianFormSpec f{kind, BasisTag::I, m, CMatrix::Zero(r, m + 1), CVector(r)};
    for (int t = 0; t < r; ++t) {
        const int i = idx[t];
        f.subspace(t, i) += 1.0;
        const cplx cc = cycle_self_intersection(i, ch);
        if (i < rho) {
            f.subspace(t, m - i) += 1.0;
            f.weights(t) = 1.0 / (2.0 * cc);
        } else {
            f.weights(t) = 1.0 / cc;
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Invariance

struct InvarianceResult {
    double dagger = 0.0;     // |R^dag H R - H| / |H|
    double transpose = 0.0;  // |R^T H conj(R) - H| / |H|
    double leakage = 0.0;    // |V M - R V|, zero for the full basis
    double best() const { return std::min(dagger, transpose); }
};

inline InvarianceResult invariance_residual(const HermitianFormSpec& form, const MonodromyMatrix& mono)
{
    const CMatrix& M = mono.matrix;
    if (M.rows() != form.m + 1 || form.subspace.cols() != form.m + 1)
        throw domain_error("invariance_residual: form and monodromy use different bases");
    const CMatrix& V = form.subspace;
    const CMatrix VM = V * M;
    const CMatrix R = VM * V.adjoint() * (V * V.adjoint()).inverse();
    const CMatrix H = form.H();
    const double nh = max_abs(H);
    InvarianceResult r;
    r.dagger = max_abs(R.adjoint() * H * R - H) / nh;
    r.transpose = max_abs(R.transpose() * H * R.conjugate() - H) / nh;
    r.leakage = max_abs(VM - R * V);
    return r;
}

struct DTypeResidual {
    double subspace_residual = 0.0;
    double form_residual = 0.0;
};

/// Leakage of the subspace and invariance of the restricted form under M_0 and M_1.
inline DTypeResidual dtype_invariance_residual(int rho, FormKind kind)
{
    const ExponentChart ch = dtype_chart(rho);
    const auto form = dtype_form(rho, kind);
    DTypeResidual out;
    for (auto base : {Singularity::Zero, Singularity::One}) {
        auto r = invariance_residual(form, monodromy(ch, base, true));
        out.subspace_residual = std::max(out.subspace_residual, r.leakage);
        out.form_residual = std::max(out.form_residual, r.dagger);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampling F at real z

struct FSample {
    double z = 0.0;
    cplx F_I;         // from the I-solutions
    cplx F_J;         // from the J-solutions mapped through the connection matrix
    double rel_diff;  // |F_I - F_J| / |F_I|
    double imag_ratio;
};

/// F = i^m v^dag W v with v = V I; the factor i^m makes F real for real exponents.
inline FSample sample_F(const ExponentChart& ch, double z, const HermitianFormSpec& form,
                        const QuadratureConfig& cfg)
{
    if (ch.m > 2) throw domain_error("sample_F: m must be <= 2");
    if (!(z > 0 && z < 1)) throw domain_error("sample_F: z must lie in (0, 1)");
    const int n = ch.m + 1;
    const auto I = eval_basis_all(ch, z, BasisTag::I, cfg);
    const auto J = eval_basis_all(ch, z, BasisTag::J, cfg);
    if (!I.converged || !J.converged) throw numeric_error("sample_F: quadrature did not converge");
    CVector vi(n), vj(n);
    for (int k = 0; k < n; ++k) {
        vi(k) = I.values[k];
        vj(k) = J.values[k];
    }
    const CMatrix P = connect_01(ch).p;
    const CMatrix H = form.H();
    const cplx ph = std::pow(I_unit, ch.m);
    auto F = [&](const CVector& x) {
        CVector v = form.subspace * x;
        return ph * (v.adjoint() * H * v)(0, 0);
    };
    FSample s;
    s.z = z;
    s.F_I = F(vi);
    s.F_J = F(P * vj);
    s.rel_diff = std::abs(s.F_I - s.F_J) / std::abs(s.F_I);
    s.imag_ratio = std::fabs(s.F_I.imag()) / std::abs(s.F_I);
    return s;
}

}  // namespace selq
