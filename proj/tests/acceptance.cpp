// One line per acceptance criterion; exit status is nonzero if any fails.
// Tolerances are pinned here and do not read the config file.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <selq/hermitian.hpp>

#include "support.hpp"

using namespace selq;
using selq::testing::displayed_dtype;
using selq::testing::displayed_m2;
using selq::testing::random_chart;
using selq::testing::rel_entry_diff;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body)
{
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double worst_entry_diff(const CMatrix& x, const CMatrix& y)
{
    double w = 0.0;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) w = std::max(w, rel_entry_diff(x(i, j), y(i, j)));
    return w;
}

const ExponentChart kDefault1{1, -0.4, -0.4, -0.4, 0.3};
const ExponentChart kChart2{2, -0.4, -0.4, -0.4, -0.3};
const ExponentChart kSystem1{1, -1.25, 0.3, -0.4, 0.3};
const ExponentChart kSystem2{2, -1.25, 0.3, -0.4, 0.3};
ExponentChart asymmetric(int m) { return {m, -0.3, -0.5, -0.45, m == 1 ? 0.3 : -0.3}; }

const double kZGrid[] = {0.2, 0.35, 0.5, 0.65, 0.8};

}  // namespace

int main()
{
    const QuadratureConfig cfg;

    criterion(1, "variant agreement", [] {
        const double tol = 1e-9, budget = 10.0;
        auto t0 = std::chrono::steady_clock::now();
        std::mt19937 rng(101);
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            auto ch = random_chart(rng, 1 + k % 6);
            auto ref = connect_01(ch, Variant::SumA).p;
            for (auto v : all_variants()) worst = std::max(worst, worst_entry_diff(connect_01(ch, v).p, ref));
        }
        double t = elapsed(t0);
        return Outcome{worst < tol && t < budget,
                       fmt("50 charts, m<=6, 5 variants: max dev %.2e < 1e-9, %.2f s < 10 s", worst, t)};
    });

    criterion(2, "two-variable display", [] {
        const double tol = 1e-12;
        std::mt19937 rng(102);
        double worst = 0.0, p11 = 0.0;
        for (int k = 0; k < 20; ++k) {
            auto ch = random_chart(rng, 2);
            auto D1 = displayed_m2(ch, false), D2 = displayed_m2(ch, true);
            p11 = std::max(p11, std::abs(D1(1, 1) - D2(1, 1)));
            worst = std::max(worst, worst_entry_diff(connect_01(ch).p, D1));
        }
        return Outcome{worst < tol && p11 < tol,
                       fmt("20 charts: entry dev %.2e, p11 forms %.2e, both < 1e-12", worst, p11)};
    });

    criterion(3, "inversion", [] {
        const double tol = 1e-9;
        std::mt19937 rng(103);
        double inv = 0.0, orth = 0.0;
        for (int k = 0; k < 30; ++k) {
            auto ch = random_chart(rng, 1 + k % 6);
            inv = std::max(inv, inverse_identity_residual(ch));
            orth = std::max(orth, qracah_orthogonality_residual(inversion_racah_spec(ch)));
        }
        return Outcome{inv < tol && orth < tol,
                       fmt("30 charts, m<=6: P(a,b,c)P(b,a,c)-1 %.2e, q-Racah form %.2e, < 1e-9", inv, orth)};
    });

    criterion(4, "q-series identities", [] {
        const double tol = 1e-10;
        std::mt19937 rng(104);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        auto unit = [&] { return e_half(U(rng)); };
        auto qq = [&] { return e_half(0.1 + 0.8 * std::fabs(U(rng))); };
        double w = 0.0, s = 0.0, o = 0.0;
        for (int k = 0; k < 200; ++k) {
            int n = k % 7;
            w = std::max(w, watson_check(unit(), unit(), unit(), unit(), unit(), n, qq()));
            cplx q = qq(), a1 = unit(), a2 = unit(), a3 = unit(), b1 = unit(), b2 = unit();
            s = std::max(s, sears_check(n, a1, a2, a3, b1, b2, std::pow(q, 1 - n) * a1 * a2 * a3 / (b1 * b2), q));
        }
        for (int N = 1; N <= 8; ++N)
            for (int k = 0; k < 5; ++k)
                o = std::max(o, qracah_orthogonality_residual({unit(), unit(), unit(), N, qq()}));
        char buf[200];
        std::snprintf(buf, sizeof buf, "200 draws n<=6: Watson %.2e, Sears %.2e; orthogonality N<=8 %.2e; < 1e-10", w,
                      s, o);
        return Outcome{w < tol && s < tol && o < tol, buf};
    });

    criterion(5, "quadrature vs closed form", [&] {
        const double tol = 1e-8, budget = 5.0;
        auto t0 = std::chrono::steady_clock::now();
        double worst = 0.0;
        auto run = [&](BasisTag tag, double z) {
            for (int j = 0; j <= 1; ++j) {
                double v = eval_basis(j, kDefault1, z, tag, cfg).value;
                worst = std::max(worst, std::fabs(v / gauss_m1(j, kDefault1, z, tag) - 1.0));
            }
        };
        for (double z : {0.1, 0.3, 0.5}) {
            run(BasisTag::I, z);
            run(BasisTag::J, z);
        }
        for (double z : {-2.0, -1.0, -0.5}) {
            run(BasisTag::I, z);
            run(BasisTag::K, z);
        }
        double t = elapsed(t0);
        return Outcome{worst < tol && t < budget, fmt("m=1, I/J/K bases: rel %.2e < 1e-8, %.2f s < 5 s", worst, t)};
    });

    criterion(6, "numeric connection", [&] {
        const double budget = 120.0;
        double r1 = 0.0, r2 = 0.0;
        for (double z : kZGrid) r1 = std::max(r1, connection_residual_numeric(kDefault1, z, PairKind::ZeroOne, cfg));
        auto t0 = std::chrono::steady_clock::now();
        for (double z : kZGrid) r2 = std::max(r2, connection_residual_numeric(kChart2, z, PairKind::ZeroOne, cfg));
        double t = elapsed(t0);
        char buf[240];
        std::snprintf(buf, sizeof buf,
                      "5 z each: m=1 %.2e < 1e-7; m=2 (g=-0.3, the g=0.3 chart diverges) %.2e < 1e-5, %.1f s < 120 s",
                      r1, r2, t);
        return Outcome{r1 < 1e-7 && r2 < 1e-5 && t < budget, buf};
    });

    criterion(7, "asymptotics", [&] {
        const double tol = 1e-3;
        double worst = 0.0;
        for (int m : {1, 2})
            for (const auto& ch : {asymmetric(m), m == 1 ? kDefault1 : kChart2})
                for (int j = 0; j <= m; ++j) {
                    auto rI = leading_asymptotic(j, ch, BasisTag::I);
                    worst = std::max(worst, asymptotic_residual(j, ch, BasisTag::I, 1e-3, rI, cfg));
                    worst = std::max(worst, asymptotic_residual(j, ch, BasisTag::I, -1e-3, rI, cfg));
                    worst = std::max(worst, asymptotic_residual(j, ch, BasisTag::J, 1 - 1e-3,
                                                                leading_asymptotic(j, ch, BasisTag::J), cfg));
                    worst = std::max(worst, asymptotic_residual(j, ch, BasisTag::K, -1e3,
                                                                leading_asymptotic(j, ch, BasisTag::K), cfg));
                }
        return Outcome{worst < tol, fmt("m<=2, all j, I/J/K at distance 1e-3: rel %.2e < %.0e", worst, tol)};
    });

    criterion(8, "reflections", [&] {
        double r1 = 0.0, r2 = 0.0;
        for (int m : {1, 2}) {
            auto ch = asymmetric(m);
            double r = std::max(reflection_residual(ch, 0.4, Reflection::JFromI, cfg),
                                reflection_residual(ch, -1.5, Reflection::KFromI, cfg));
            (m == 1 ? r1 : r2) = r;
        }
        return Outcome{r1 < 1e-7 && r2 < 1e-5, fmt("J/I and K/I reflections: m=1 %.2e < 1e-7, m=2 %.2e < 1e-5", r1, r2)};
    });

    criterion(9, "differential equations", [&] {
        double r1 = 0.0, r2 = 0.0, rc = 0.0;
        for (double z : {0.3, 0.5, 0.7}) {
            r1 = std::max(r1, ode_residual(kDefault1, z, cfg));
            r2 = std::max(r2, ode_residual(kChart2, z, cfg));
            rc = std::max(rc, ode_residual_closed_form(kDefault1, z));
        }
        char buf[200];
        std::snprintf(buf, sizeof buf, "m=1 %.2e < 1e-6, m=2 %.2e < 1e-4, closed form %.2e < 1e-10", r1, r2, rc);
        return Outcome{r1 < 1e-6 && r2 < 1e-4 && rc < 1e-10, buf};
    });

    criterion(10, "hermitian invariance", [] {
        std::mt19937 rng(110);
        double inv = 0.0, wt = 0.0;
        for (int m = 1; m <= 4; ++m)
            for (int k = 0; k < 5; ++k) {
                auto ch = random_chart(rng, m);
                wt = std::max(wt, diagonal_weight_agreement(ch));
                inv = std::max(inv, invariance_residual(diagonal_form(ch), monodromy(ch, Singularity::One)).dagger);
            }
        return Outcome{inv < 1e-9 && wt < 1e-11,
                       fmt("m<=4, 20 charts: M1^dag H M1 - H %.2e < 1e-9, weights %.2e < 1e-11", inv, wt)};
    });

    criterion(11, "degenerate point", [] {
        double sym = 0.0, disp = 0.0, leak = 0.0, form = 0.0, app = 0.0;
        for (int rho = 1; rho <= 4; ++rho) {
            auto [a, b] = dtype_symmetry_residual(rho);
            sym = std::max({sym, a, b});
            const int m = 2 * rho;
            auto P = connect_dtype(rho).p;
            std::vector<int> rows{0, 1, m - 1, m};
            if (rho >= 2) rows.insert(rows.end(), {2, m - 2});
            for (int i : rows) {
                auto r = dtype_closed_row(rho, i);
                for (int j = 0; j <= m; ++j) app = std::max(app, std::abs(P(i, j) - r[j]));
            }
            for (int j : {0, 1, m - 1, m}) {
                auto c = dtype_closed_col(rho, j);
                for (int i = 0; i <= m; ++i) app = std::max(app, std::abs(P(i, j) - c[i]));
            }
        }
        for (int rho : {1, 2}) disp = std::max(disp, max_abs(connect_dtype(rho).p - displayed_dtype(rho)));
        for (int rho = 1; rho <= 3; ++rho)
            for (auto kind : {FormKind::DTypePairs, FormKind::DTypeEven}) {
                auto r = dtype_invariance_residual(rho, kind);
                leak = std::max(leak, r.subspace_residual);
                form = std::max(form, r.form_residual);
            }
        char buf[300];
        std::snprintf(buf, sizeof buf,
                      "symmetry %.1e<1e-10, displays %.1e<1e-12, leakage %.1e & form %.1e<1e-9, rows/cols %.1e<1e-11",
                      sym, disp, leak, form, app);
        return Outcome{sym < 1e-10 && disp < 1e-12 && leak < 1e-9 && form < 1e-9 && app < 1e-11, buf};
    });

    criterion(12, "first-order system", [&] {
        double r1 = 0.0, r2 = 0.0;
        for (double z : {0.3, 0.5, 0.7}) {
            r1 = std::max(r1, ode_system_residual(kSystem1, z, cfg).max());
            r2 = std::max(r2, ode_system_residual(kSystem2, z, cfg).max());
        }
        return Outcome{r1 < 1e-6 && r2 < 1e-4, fmt("all rows, 3 z: m=1 %.2e < 1e-6, m=2 %.2e < 1e-4", r1, r2)};
    });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures ? 1 : 0;
}
