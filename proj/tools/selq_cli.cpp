// selq: batch computation and verification with JSON reports.
//
//   selq connect --m 2 --a -0.4 --b -0.4 --c -0.4 --g 0.3 --pair 01
//   selq connect --dtype-rho 1
//   selq verify --suite all
//   selq racah --n 2 --x 3 --N 6 --check
//
// Exit codes: 0 all pass, 1 verification failure, 2 input rejection,
// 3 numerical non-convergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <selq/selq.hpp>

#ifndef SELQ_DEFAULT_CONFIG
#define SELQ_DEFAULT_CONFIG "config/defaults.conf"
#endif

using json = nlohmann::ordered_json;
using namespace selq;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kRejected = 2, kNumeric = 3 };

// Raised when a quadrature estimate does not meet its target tolerance.
struct unconverged : numeric_error {
    using numeric_error::numeric_error;
};

// ---------------------------------------------------------------------------
// Settings shared by the subcommands

struct Options {
    std::string config = SELQ_DEFAULT_CONFIG;
    bool config_given = false;
    std::string output;
    std::string csv;
    int threads = 0;
    bool no_timing = false;

    std::optional<int> m;
    std::optional<double> a, b, c, g;
    std::string pair = "01";
    std::string variant = "SumA";
    std::optional<int> dtype_rho;
    bool allow_degenerate = false;

    std::string suite = "all";

    int n = 0, x = 0, N = 6;
    double ra = 0.21, rb = -0.37, rc = 0.57, rg = 0.31;
    bool check = false;
};

class Settings {
public:
    explicit Settings(const Options& o)
    {
        std::ifstream probe(o.config);
        if (probe || o.config_given) kv_ = read_key_values(o.config);
        apply_quadrature_keys(quad, kv_);
        if (o.threads > 0) quad.threads = o.threads;
    }

    double num(const std::string& key, double fallback) const
    {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw domain_error("config: bad value for " + key + ": " + it->second);
        }
    }

    std::vector<double> list(const std::string& key, std::vector<double> fallback) const
    {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw domain_error("config: bad list entry for " + key + ": " + item);
            }
        }
        return out;
    }

    ExponentChart chart(const std::string& prefix, int m, ExponentChart fallback) const
    {
        return {m, num(prefix + ".a", fallback.a.real()), num(prefix + ".b", fallback.b.real()),
                num(prefix + ".c", fallback.c.real()), num(prefix + ".g", fallback.g.real())};
    }

    QuadratureConfig quad;

private:
    std::map<std::string, std::string> kv_;
};

// ---------------------------------------------------------------------------
// Report

class Report {
public:
    explicit Report(std::string command) { doc_["command"] = std::move(command); }

    json& inputs() { return doc_["inputs"]; }
    json& results() { return doc_["results"]; }

    bool residual(const std::string& name, double value, double threshold)
    {
        bool pass = std::isfinite(value) && value < threshold;
        doc_["residuals"][name] = {{"value", value}, {"threshold", threshold}, {"pass", pass}};
        all_pass_ = all_pass_ && pass;
        std::fprintf(stderr, "%s %-44s %.3e < %.1e\n", pass ? "pass" : "FAIL", name.c_str(), value, threshold);
        return pass;
    }

    void error(const std::string& kind, const std::string& msg) { doc_["error"] = {{"kind", kind}, {"message", msg}}; }
    void timing(const std::string& name, double ms) { doc_["timing"][name] = ms; }
    bool all_pass() const { return all_pass_; }

    void write(const Options& o)
    {
        if (!doc_.contains("residuals")) doc_["residuals"] = json::object();
        if (o.no_timing) doc_.erase("timing");
        const std::string text = doc_.dump(2) + "\n";
        if (o.output.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream out(o.output);
        if (!out) throw domain_error("cannot write report to " + o.output);
        out << text;
    }

private:
    json doc_;
    bool all_pass_ = true;
};

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const CMatrix& p)
{
    json rows = json::array();
    for (int i = 0; i < p.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < p.cols(); ++j) row.push_back(complex_json(p(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_csv(const std::string& path, const CMatrix& p)
{
    std::ofstream out(path);
    if (!out) throw domain_error("cannot write CSV to " + path);
    out << "i,j,re,im\n";
    out.precision(17);
    for (int i = 0; i < p.rows(); ++i)
        for (int j = 0; j < p.cols(); ++j) out << i << ',' << j << ',' << p(i, j).real() << ',' << p(i, j).imag() << '\n';
}

json chart_json(const ExponentChart& ch)
{
    return {{"m", ch.m}, {"a", ch.a.real()}, {"b", ch.b.real()}, {"c", ch.c.real()}, {"g", ch.g.real()}};
}

double ms_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

double worst_entry_diff(const CMatrix& x, const CMatrix& y)
{
    double w = 0.0;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) w = std::max(w, std::abs(x(i, j) - y(i, j)) / std::max(1.0, std::abs(y(i, j))));
    return w;
}

/// Seeded generic chart for the randomised checks.
ExponentChart random_chart(std::mt19937& rng, int m)
{
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    for (;;) {
        ExponentChart ch{m, U(rng), U(rng), U(rng), U(rng)};
        if (std::fabs(ch.g.real()) < 0.05 || !genericity_check(ch, 0.02).empty()) continue;
        try {
            for (auto v : all_variants()) {
                (void)connect_01(ch, v);
                (void)connect_01(ExponentChart{m, ch.b, ch.a, ch.c, ch.g}, v);
            }
        } catch (const std::exception&) {
            continue;
        }
        return ch;
    }
}

void require_converged(const SolutionSample& s, const ExponentChart& ch)
{
    if (!s.converged)
        throw unconverged(detail::cat("quadrature for basis ", basis_name(s.tag), " at z=", s.z, ", m=", ch.m,
                                      " did not reach its target tolerance"));
}

// ---------------------------------------------------------------------------
// connect

int cmd_connect(const Options& o, Report& rep)
{
    const Settings st(o);
    ExponentChart ch;
    bool degenerate_ok = o.allow_degenerate;
    if (o.dtype_rho) {
        ch = dtype_chart(*o.dtype_rho);
        degenerate_ok = true;
    } else {
        const int m = o.m.value_or(1);
        if (m < 1) throw domain_error("--m must be >= 1");
        ch = st.chart("chart", m, {m, -0.4, -0.4, -0.4, 0.3});
        if (o.a) ch.a = *o.a;
        if (o.b) ch.b = *o.b;
        if (o.c) ch.c = *o.c;
        if (o.g) ch.g = *o.g;
    }
    if (o.pair != "01" && o.pair != "0inf") throw domain_error("--pair must be 01 or 0inf");
    const Variant v = parse_variant(o.variant);

    rep.inputs() = chart_json(ch);
    rep.inputs()["pair"] = o.pair;
    rep.inputs()["variant"] = o.variant;
    rep.inputs()["allow_degenerate"] = degenerate_ok;
    if (o.dtype_rho) rep.inputs()["dtype_rho"] = *o.dtype_rho;

    const double gtol = st.num("tol.genericity", 1e-9);
    json viol = json::array(), res = json::array();
    for (auto& x : genericity_check(ch, gtol))
        viol.push_back({{"family", x.family}, {"i", x.i}, {"value", x.value.real()}, {"nearest", x.nearest}});
    for (auto& x : exponent_resonances(ch, gtol))
        res.push_back({{"at", x.at == Singularity::Zero ? "0" : x.at == Singularity::One ? "1" : "inf"},
                       {"j", x.j},
                       {"k", x.k},
                       {"difference", x.difference.real()}});
    rep.results()["genericity_violations"] = viol;
    rep.results()["exponent_resonances"] = res;
    if (!degenerate_ok && (!viol.empty() || !res.empty())) {
        std::string why = !viol.empty()
                              ? detail::cat(viol[0]["family"].get<std::string>(), " family at i=",
                                            viol[0]["i"].get<int>(), " equals ", viol[0]["value"].get<double>())
                              : detail::cat("exponents ", res[0]["j"].get<int>(), " and ", res[0]["k"].get<int>(),
                                            " at ", res[0]["at"].get<std::string>(), " differ by an integer");
        throw domain_error("chart is not generic: " + why + " (pass --allow-degenerate to override)");
    }

    auto t0 = std::chrono::steady_clock::now();
    auto build = [&](Variant var) {
        return o.pair == "01" ? connect_01(ch, var, true) : connect_0inf(ch, var, true);
    };
    const CMatrix P = build(v).p;
    rep.results()["matrix"] = matrix_json(P);

    double dev = 0.0;
    json per = json::object();
    for (auto w : all_variants()) {
        try {
            double d = worst_entry_diff(build(w).p, P);
            per[variant_name(w)] = d;
            dev = std::max(dev, d);
        } catch (const domain_error& e) {
            per[variant_name(w)] = std::string("unavailable: ") + e.what();
        }
    }
    rep.results()["variant_deviation"] = per;
    rep.results()["cross_variant_max_deviation"] = dev;
    rep.residual("cross_variant_max_deviation", dev, st.num("tol.variants", 1e-9));
    rep.timing("compute_ms", ms_since(t0));
    if (!o.csv.empty()) write_csv(o.csv, P);
    return rep.all_pass() ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------------------
// verify

void suite_qseries(const Settings& st, Report& rep)
{
    const double tol = st.num("tol.qseries", 1e-10);
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto unit = [&] { return e_half(U(rng)); };
    auto qq = [&] { return e_half(0.1 + 0.8 * std::fabs(U(rng))); };
    double w = 0.0, s = 0.0, o = 0.0, ws = 0.0, ss = 0.0;
    for (int k = 0; k < 200; ++k) {
        int n = k % 7;
        w = std::max(w, watson_check(unit(), unit(), unit(), unit(), unit(), n, qq()));
        cplx q = qq(), a1 = unit(), a2 = unit(), a3 = unit(), b1 = unit(), b2 = unit();
        s = std::max(s, sears_check(n, a1, a2, a3, b1, b2, std::pow(q, 1 - n) * a1 * a2 * a3 / (b1 * b2), q));
    }
    for (int m = 1; m <= 6; ++m)
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= m; ++j) {
                const double g = U(rng), l1 = U(rng), l2 = U(rng), l3 = U(rng);
                const double l12 = l1 + l2, l23 = l2 + l3, l123 = l12 + l3;
                const cplx q = e_half(g);
                auto E = [&](double lam, int k) { return e_half(lam + k * g); };
                auto Q = [&](int k) { return std::pow(q, k); };
                if (i + j <= m) {
                    ws = std::max(ws, watson_check(E(-2 * l23, -2 * j + 1 - i), E(2 * l1, m - j), E(-2 * l3, 1 - j),
                                                   E(-2 * l23, 1 - m - j), Q(-j), i, q));
                    ss = std::max(ss, sears_check(j, Q(-i), E(-2 * l23, 1 - j - m), E(-2 * l12, 1 - i - m), Q(-m),
                                                  E(-2 * l2, 1 - i - j), E(-2 * l123, 2 - i - j - m), q));
                } else {
                    ws = std::max(ws, watson_check(E(-2 * l23, -2 * m + 1 + i), E(2 * l1, i), E(-2 * l3, 1 + i - m),
                                                   E(-2 * l23, 1 - m - j), Q(j - m), m - i, q));
                    ss = std::max(ss, sears_check(m - j, E(-2 * l12, 1 - i - m), Q(i - m), E(-2 * l23, 1 - m - j),
                                                  Q(-m), E(-2 * l123, 2 - 2 * m), E(-2 * l2, 1 - m), q));
                }
            }
    for (int N = 1; N <= 8; ++N)
        for (int k = 0; k < 5; ++k) o = std::max(o, qracah_orthogonality_residual({unit(), unit(), unit(), N, qq()}));
    rep.residual("qseries.watson_random", w, tol);
    rep.residual("qseries.watson_connection_substitution", ws, tol);
    rep.residual("qseries.sears_random", s, tol);
    rep.residual("qseries.sears_connection_substitution", ss, tol);
    rep.residual("qseries.qracah_orthogonality", o, tol);
}

void suite_connection(const Settings& st, Report& rep)
{
    std::mt19937 rng(2025);
    double var = 0.0, inv = 0.0, orth = 0.0, disp = 0.0;
    for (int k = 0; k < 50; ++k) {
        auto ch = random_chart(rng, 1 + k % 6);
        auto ref = connect_01(ch, Variant::SumA).p;
        for (auto v : all_variants()) var = std::max(var, worst_entry_diff(connect_01(ch, v).p, ref));
        inv = std::max(inv, inverse_identity_residual(ch));
        orth = std::max(orth, qracah_orthogonality_residual(inversion_racah_spec(ch)));
    }
    for (int k = 0; k < 20; ++k) {
        auto ch = random_chart(rng, 2);
        const double a = ch.a.real(), b = ch.b.real(), c = ch.c.real(), h = ch.g.real() / 2;
        auto s = [](double x) { return sin_pi(x); };
        cplx p11a = -s(b) * s(a + h) / (s(b + c) * s(b + c + h)) + s(a + b + c + 2 * h) * s(c + h) / (s(b + c + 2 * h) * s(b + c + h));
        cplx p11b = s(c) * s(a + b + c + h) / (s(b + c) * s(b + c + h)) - s(a) * s(b + h) / (s(b + c + 2 * h) * s(b + c + h));
        cplx p02 = s(c) * s(c + h) / (s(b + c + 2 * h) * s(b + c + h));
        auto P = connect_01(ch).p;
        disp = std::max({disp, std::abs(P(1, 1) - p11a), std::abs(P(1, 1) - p11b), std::abs(P(0, 2) - p02)});
    }
    double sym = 0.0, app = 0.0;
    for (int rho = 1; rho <= 4; ++rho) {
        auto [r1, r2] = dtype_symmetry_residual(rho);
        sym = std::max({sym, r1, r2});
        const int m = 2 * rho;
        auto P = connect_dtype(rho).p;
        std::vector<int> rows{0, 1, m - 1, m};
        if (rho >= 2) rows.insert(rows.end(), {2, m - 2});
        for (int i : rows) {
            auto r = dtype_closed_row(rho, i);
            for (int j = 0; j <= m; ++j) app = std::max(app, std::abs(P(i, j) - r[j]));
        }
        for (int j : {0, 1, m - 1, m}) {
            auto col = dtype_closed_col(rho, j);
            for (int i = 0; i <= m; ++i) app = std::max(app, std::abs(P(i, j) - col[i]));
        }
    }
    rep.residual("connection.variant_agreement", var, st.num("tol.variants", 1e-9));
    rep.residual("connection.two_variable_display", disp, 1e-12);
    rep.residual("connection.inversion", inv, st.num("tol.inverse", 1e-9));
    rep.residual("connection.inversion_qracah", orth, st.num("tol.inverse", 1e-9));
    rep.residual("connection.dtype_symmetry", sym, 1e-10);
    rep.residual("connection.dtype_closed_rows_cols", app, 1e-11);
}

void suite_quadrature(const Settings& st, const Options& o, Report& rep)
{
    const auto& cfg = st.quad;
    std::vector<int> ms;
    if (o.m) ms = {*o.m};
    else ms = {1, 2};
    const auto grid = st.list("z_grid", {0.2, 0.35, 0.5, 0.65, 0.8});
    const auto grid_inf = st.list("z_grid_inf", {-3, -2, -1, -0.5, -0.25});
    const auto z_ode = st.list("z_ode", {0.3, 0.5, 0.7});
    json charts = json::object();
    for (int m : ms) {
        if (m < 1 || m > 2) throw domain_error(detail::cat("verify quadrature: --m must be 1 or 2, got ", m));
        const std::string tag = detail::cat("m", m);
        ExponentChart ch = m == 1 ? st.chart("chart", 1, {1, -0.4, -0.4, -0.4, 0.3})
                                  : st.chart("chart_m2", m, {m, -0.4, -0.4, -0.4, -0.3});
        if (o.a) ch.a = *o.a;
        if (o.b) ch.b = *o.b;
        if (o.c) ch.c = *o.c;
        if (o.g) ch.g = *o.g;
        charts[tag] = chart_json(ch);
        require_generic(ch, "verify quadrature");
        auto tol = [&](const char* key, double def1, double def2) {
            return st.num(detail::cat("tol.", key, "_m", m), m == 1 ? def1 : def2);
        };

        // Every basis value at every grid point must converge before residuals mean anything.
        for (double z : grid) {
            require_converged(eval_basis_all(ch, z, BasisTag::I, cfg), ch);
            require_converged(eval_basis_all(ch, z, BasisTag::J, cfg), ch);
        }
        for (double z : grid_inf) {
            require_converged(eval_basis_all(ch, z, BasisTag::I, cfg), ch);
            require_converged(eval_basis_all(ch, z, BasisTag::K, cfg), ch);
        }

        if (m == 1) {
            double cf = 0.0;
            for (double z : grid)
                for (int j = 0; j <= 1; ++j)
                    for (auto b : {BasisTag::I, BasisTag::J})
                        cf = std::max(cf, std::fabs(eval_basis(j, ch, z, b, cfg).value / gauss_m1(j, ch, z, b) - 1));
            for (double z : grid_inf)
                for (int j = 0; j <= 1; ++j)
                    for (auto b : {BasisTag::I, BasisTag::K})
                        cf = std::max(cf, std::fabs(eval_basis(j, ch, z, b, cfg).value / gauss_m1(j, ch, z, b) - 1));
            rep.residual("quadrature.m1.closed_forms", cf, st.num("tol.closed_form", 1e-8));
            double odec = 0.0;
            for (double z : z_ode) odec = std::max(odec, ode_residual_closed_form(ch, z));
            rep.residual("quadrature.m1.ode_closed_form", odec, 1e-10);
        }
        double c01 = 0.0, c0i = 0.0;
        for (double z : grid) c01 = std::max(c01, connection_residual_numeric(ch, z, PairKind::ZeroOne, cfg));
        for (double z : grid_inf) c0i = std::max(c0i, connection_residual_numeric(ch, z, PairKind::ZeroInf, cfg));
        rep.residual("quadrature." + tag + ".connection_01", c01, tol("connection", 1e-7, 1e-5));
        rep.residual("quadrature." + tag + ".connection_0inf", c0i, tol("connection", 1e-7, 1e-5));

        double rj = 0.0, rk = 0.0;
        for (double z : grid) rj = std::max(rj, reflection_residual(ch, z, Reflection::JFromI, cfg));
        for (double z : grid_inf) rk = std::max(rk, reflection_residual(ch, z, Reflection::KFromI, cfg));
        rep.residual("quadrature." + tag + ".reflection_J_I", rj, tol("reflection", 1e-7, 1e-5));
        rep.residual("quadrature." + tag + ".reflection_K_I", rk, tol("reflection", 1e-7, 1e-5));

        double asy = 0.0;
        for (int j = 0; j <= m; ++j) {
            auto aI = leading_asymptotic(j, ch, BasisTag::I);
            asy = std::max(asy, asymptotic_residual(j, ch, BasisTag::I, 1e-3, aI, cfg));
            asy = std::max(asy, asymptotic_residual(j, ch, BasisTag::I, -1e-3, aI, cfg));
            asy = std::max(asy, asymptotic_residual(j, ch, BasisTag::J, 1 - 1e-3, leading_asymptotic(j, ch, BasisTag::J), cfg));
            asy = std::max(asy, asymptotic_residual(j, ch, BasisTag::K, -1e3, leading_asymptotic(j, ch, BasisTag::K), cfg));
        }
        rep.residual("quadrature." + tag + ".asymptotics", asy, st.num("tol.asymptotic", 1e-3));

        double ode = 0.0;
        for (double z : z_ode) ode = std::max(ode, ode_residual(ch, z, cfg));
        rep.residual("quadrature." + tag + ".ode", ode, tol("ode", 1e-6, 1e-4));

        const ExponentChart sc = st.chart("chart_system", m, {m, -1.25, 0.3, -0.4, 0.3});
        charts[tag + "_system"] = chart_json(sc);
        double sys = 0.0;
        for (double z : z_ode) sys = std::max(sys, ode_system_residual(sc, z, cfg).max());
        rep.residual("quadrature." + tag + ".system", sys, tol("system", 1e-6, 1e-4));
    }
    rep.results()["quadrature_charts"] = charts;
}

void suite_hermitian(const Settings& st, const Options& o, Report& rep)
{
    const double tol_inv = st.num("tol.invariance", 1e-9), tol_d = st.num("tol.dtype", 1e-9);
    std::vector<int> rhos;
    if (o.dtype_rho) rhos = {*o.dtype_rho};
    else rhos = {1, 2, 3};
    if (!o.dtype_rho) {
        std::mt19937 rng(2026);
        // M_1 = P D P^-1 loses about log10 cond(P) digits, so draws are limited
        // to well-conditioned connection matrices and the worst one is reported.
        const double max_cond = st.num("hermitian.max_condition", 1e4);
        double inv = 0.0, wt = 0.0, tr = 0.0, worst_cond = 0.0;
        for (int m = 1; m <= 4; ++m)
            for (int k = 0; k < 5; ++k) {
                ExponentChart ch;
                double cond;
                do {
                    ch = random_chart(rng, m);
                    Eigen::JacobiSVD<CMatrix> svd(connect_01(ch).p);
                    const auto& sv = svd.singularValues();
                    cond = sv(0) / sv(sv.size() - 1);
                } while (!(cond <= max_cond));
                worst_cond = std::max(worst_cond, cond);
                wt = std::max(wt, diagonal_weight_agreement(ch));
                inv = std::max(inv, invariance_residual(diagonal_form(ch), monodromy(ch, Singularity::One)).dagger);
                tr = std::max(tr, infinity_trace_residual(ch));
            }
        rep.results()["hermitian_max_condition"] = worst_cond;
        rep.residual("hermitian.diagonal_invariance", inv, tol_inv);
        rep.residual("hermitian.weight_agreement", wt, 1e-11);
        rep.residual("hermitian.trace_at_infinity", tr, 1e-9);
        for (int m : {1, 2}) {
            ExponentChart ch = m == 1 ? st.chart("chart", 1, {1, -0.4, -0.4, -0.4, 0.3})
                                      : st.chart("chart_m2", 2, {2, -0.4, -0.4, -0.4, -0.3});
            auto s = sample_F(ch, 0.5, diagonal_form(ch), st.quad);
            rep.results()[detail::cat("F_m", m, "_z0.5")] = complex_json(s.F_I);
            rep.residual(detail::cat("hermitian.m", m, ".F_I_vs_F_J"), s.rel_diff,
                         st.num(detail::cat("tol.sample_m", m), m == 1 ? 1e-6 : 1e-4));
            rep.residual(detail::cat("hermitian.m", m, ".F_imaginary"), s.imag_ratio, 1e-8);
        }
    }
    for (int rho : rhos) {
        if (rho < 1) throw domain_error("--dtype-rho must be >= 1");
        for (auto kind : {FormKind::DTypePairs, FormKind::DTypeEven}) {
            auto r = dtype_invariance_residual(rho, kind);
            const std::string base = detail::cat("hermitian.rho", rho, ".", form_name(kind));
            rep.residual(base + ".subspace", r.subspace_residual, tol_d);
            rep.residual(base + ".form", r.form_residual, tol_d);
        }
    }
}

int cmd_verify(const Options& o, Report& rep)
{
    const Settings st(o);
    static const std::vector<std::string> suites{"qseries", "connection", "quadrature", "hermitian", "all"};
    if (std::find(suites.begin(), suites.end(), o.suite) == suites.end())
        throw domain_error("unknown suite '" + o.suite + "'");
    rep.inputs()["suite"] = o.suite;
    rep.inputs()["config"] = o.config;
    if (o.m) rep.inputs()["m"] = *o.m;
    if (o.dtype_rho) rep.inputs()["dtype_rho"] = *o.dtype_rho;
    for (auto [name, val] : {std::pair{"a", o.a}, {"b", o.b}, {"c", o.c}, {"g", o.g}})
        if (val) rep.inputs()[name] = *val;
    rep.inputs()["quadrature"] = {{"level", st.quad.level},
                                  {"max_refinement", st.quad.max_refinement},
                                  {"target_rel_tol", st.quad.target_rel_tol},
                                  {"convergence_margin", st.quad.convergence_margin}};
    auto run = [&](const std::string& name, auto&& f) {
        if (o.suite != "all" && o.suite != name) return;
        auto t0 = std::chrono::steady_clock::now();
        f();
        rep.timing(name + "_ms", ms_since(t0));
    };
    run("qseries", [&] { suite_qseries(st, rep); });
    run("connection", [&] { suite_connection(st, rep); });
    run("quadrature", [&] { suite_quadrature(st, o, rep); });
    run("hermitian", [&] { suite_hermitian(st, o, rep); });
    return rep.all_pass() ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------------------
// racah

int cmd_racah(const Options& o, Report& rep)
{
    const Settings st(o);
    rep.inputs() = {{"n", o.n}, {"x", o.x}, {"a", o.ra}, {"b", o.rb}, {"c", o.rc}, {"N", o.N}, {"g", o.rg}};
    if (o.N < 0 || o.n < 0 || o.x < 0 || o.n > o.N || o.x > o.N)
        throw domain_error(detail::cat("racah: need 0 <= n, x <= N (n=", o.n, ", x=", o.x, ", N=", o.N, ")"));
    const QRacahSpec s{e_half(o.ra), e_half(o.rb), e_half(o.rc), o.N, e_half(o.rg)};
    auto t0 = std::chrono::steady_clock::now();
    rep.results()["W"] = complex_json(qracah_w(o.n, o.x, s));
    rep.results()["rho"] = complex_json(qracah_weight(o.x, s));
    rep.results()["h"] = complex_json(qracah_norm(o.n, s));
    if (o.check) {
        const double tol = st.num("tol.qseries", 1e-10);
        rep.residual("racah.orthogonality", qracah_orthogonality_residual(s), tol);
        // (n, x) -> (x, n) with (a, b, c) -> (a, c q^{-N-1} / a, a b q^{N+1})
        const QRacahSpec d{s.a, s.c * std::pow(s.q, -o.N - 1) / s.a, s.a * s.b * std::pow(s.q, o.N + 1), o.N, s.q};
        double dual = 0.0;
        for (int n = 0; n <= o.N; ++n)
            for (int x = 0; x <= o.N; ++x) dual = std::max(dual, std::abs(qracah_w(n, x, s) - qracah_w(x, n, d)));
        rep.results()["W_dual"] = complex_json(qracah_w(o.x, o.n, d));
        rep.residual("racah.duality", dual, tol);
    }
    rep.timing("compute_ms", ms_since(t0));
    return rep.all_pass() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv)
{
    Options o;
    CLI::App app{"Connection matrices, integrals and invariant forms for Selberg-type integrals"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "key=value config file")->each([&](const std::string&) {
            o.config_given = true;
        });
        sub->add_option("--output", o.output, "write the JSON report here (default: stdout)");
        sub->add_option("--threads", o.threads, "worker threads (default: SELQ_THREADS or hardware)");
        sub->add_flag("--no-timing", o.no_timing, "omit timings so reports are byte-stable");
    };
    auto chart_opts = [&](CLI::App* sub) {
        sub->add_option("--m", o.m, "number of integration variables");
        sub->add_option("--a", o.a, "exponent at 0");
        sub->add_option("--b", o.b, "exponent at 1");
        sub->add_option("--c", o.c, "exponent at z");
        sub->add_option("--g", o.g, "exponent of the difference product");
        sub->add_option("--dtype-rho", o.dtype_rho, "use the degenerate chart m = 2 rho");
    };

    auto* connect = app.add_subcommand("connect", "connection matrix for one chart");
    common(connect);
    chart_opts(connect);
    connect->add_option("--pair", o.pair, "01 or 0inf");
    connect->add_option("--variant", o.variant, "SumA, SumB, WellPoised87, Balanced43 or RacahUniform");
    connect->add_flag("--allow-degenerate", o.allow_degenerate, "skip the genericity gate");
    connect->add_option("--csv", o.csv, "also write the matrix as CSV");

    auto* verify = app.add_subcommand("verify", "run identity checks and report residuals");
    common(verify);
    chart_opts(verify);
    verify->add_option("--suite", o.suite, "qseries, connection, quadrature, hermitian or all");

    auto* racah = app.add_subcommand("racah", "q-Racah polynomial, weight and norm");
    common(racah);
    racah->add_option("--n", o.n, "degree");
    racah->add_option("--x", o.x, "grid point");
    racah->add_option("--N", o.N, "grid size");
    racah->add_option("--a", o.ra, "parameter a = e(A)");
    racah->add_option("--b", o.rb, "parameter b = e(B)");
    racah->add_option("--c", o.rc, "parameter c = e(C)");
    racah->add_option("--g", o.rg, "q = e(g)");
    racah->add_flag("--check", o.check, "add orthogonality and duality residuals");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        // The parser may stop before --output is assigned, so look for it by hand.
        Options fallback;
        std::string command = argc > 1 ? argv[1] : "";
        for (int i = 1; i < argc; ++i) {
            std::string s = argv[i];
            if (s == "--output" && i + 1 < argc) fallback.output = argv[i + 1];
            else if (s.rfind("--output=", 0) == 0) fallback.output = s.substr(9);
        }
        Report rep(command);
        rep.error("input", e.what());
        try {
            if (!fallback.output.empty()) rep.write(fallback);
        } catch (const std::exception&) {
        }
        return kRejected;
    }

    const std::string name = connect->parsed() ? "connect" : verify->parsed() ? "verify" : "racah";
    Report rep(name);
    int code = kOk;
    auto t0 = std::chrono::steady_clock::now();
    try {
        if (connect->parsed()) code = cmd_connect(o, rep);
        else if (verify->parsed()) code = cmd_verify(o, rep);
        else code = cmd_racah(o, rep);
    } catch (const domain_error& e) {
        rep.error("input", e.what());
        std::cerr << "error: " << e.what() << "\n";
        code = kRejected;
    } catch (const numeric_error& e) {
        rep.error("numeric", e.what());
        std::cerr << "error: " << e.what() << "\n";
        code = kNumeric;
    } catch (const std::exception& e) {
        rep.error("numeric", e.what());
        std::cerr << "error: " << e.what() << "\n";
        code = kNumeric;
    }
    rep.timing("total_ms", ms_since(t0));
    try {
        rep.write(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRejected;
    }
    return code;
}
