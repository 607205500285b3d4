#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "connection.hpp"
#include "qkernel.hpp"
#include "qseries.hpp"
#include "quadrature.hpp"

namespace selq {

// ---------------------------------------------------------------------------
// Cycles

enum class BasisTag { I, J, K, Raw };

inline const char* basis_name(BasisTag t)
{
    switch (t) {
    case BasisTag::I: return "I";
    case BasisTag::J: return "J";
    case BasisTag::K: return "K";
    case BasisTag::Raw: return "Raw";
    }
    return "?";
}

/// Occupancies (i1, j1, i2, j2) of the four real intervals cut out by the
/// ordered points z1 < z2 < z3.
struct CycleDescriptor {
    std::array<int, 4> occupancy{};
    BasisTag tag = BasisTag::Raw;
    int index = 0;

    int m() const { return occupancy[0] + occupancy[1] + occupancy[2] + occupancy[3]; }
};

/// I_j <-> (0, j, 0, m-j); J_j and K_j <-> (m-j, 0, j, 0).
inline CycleDescriptor basis_cycle(BasisTag tag, int j, int m)
{
    if (m < 1) throw domain_error("basis_cycle: m must be >= 1");
    if (j < 0 || j > m) throw domain_error(detail::cat("basis_cycle: j=", j, " outside [0, ", m, "]"));
    switch (tag) {
    case BasisTag::I: return {{0, j, 0, m - j}, tag, j};
    case BasisTag::J:
    case BasisTag::K: return {{m - j, 0, j, 0}, tag, j};
    case BasisTag::Raw: break;
    }
    throw domain_error("basis_cycle: Raw cycles carry explicit occupancies");
}

// ---------------------------------------------------------------------------
// Configuration

struct QuadratureConfig {
    int level = 4;                  // starting tanh-sinh level, h = 2^-level per axis
    int max_refinement = 4;         // number of halvings of h after the first pass
    double target_rel_tol = 1e-11;  // stop once successive levels agree to this
    double convergence_margin = 0.05;
    long long max_nodes = 60000000;  // refinement stops before a grid exceeds this
    int threads = 0;                 // 0: SELQ_THREADS or hardware concurrency

    void validate() const
    {
        if (!(target_rel_tol >= 1e-12))
            throw domain_error(detail::cat("QuadratureConfig: target_rel_tol=", target_rel_tol, " < 1e-12"));
        if (!(convergence_margin > 0)) throw domain_error("QuadratureConfig: margin must be positive");
        if (level < 1 || level > 12) throw domain_error("QuadratureConfig: level outside [1, 12]");
        if (max_refinement < 1) throw domain_error("QuadratureConfig: max_refinement must be >= 1");
    }
};

/// Plain key=value lines; '#' starts a comment; blank lines ignored.
inline std::map<std::string, std::string> read_key_values(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw domain_error(detail::cat("cannot open config file ", path));
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw domain_error(detail::cat(path, ":", lineno, ": expected key=value"));
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline void apply_quadrature_keys(QuadratureConfig& cfg, const std::map<std::string, std::string>& kv)
{
    auto num = [&](const char* key, auto& field) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        try {
            field = static_cast<std::decay_t<decltype(field)>>(std::stod(it->second));
        } catch (const std::exception&) {
            throw domain_error(detail::cat("config: bad value for ", key, ": ", it->second));
        }
    };
    num("quad.level", cfg.level);
    num("quad.max_refinement", cfg.max_refinement);
    num("quad.target_rel_tol", cfg.target_rel_tol);
    num("quad.convergence_margin", cfg.convergence_margin);
    num("quad.max_nodes", cfg.max_nodes);
    num("quad.threads", cfg.threads);
    cfg.validate();
}

// ---------------------------------------------------------------------------
// Observables: rational functions multiplying u(t) under the integral.

/// Named singular points of the integrand.
enum Point : int { Origin = 0, One = 1, ZPoint = 2 };

/// coef * prod_v prod_p (t_v - p)^(-pw[v][p]).
struct Monomial {
    double coef = 1.0;
    std::array<std::array<std::uint8_t, 3>, 3> pw{};
};

using Observable = std::vector<Monomial>;

inline Observable obs_one() { return {Monomial{}}; }

/// sum_v (t_v - p)^(-k).
inline Observable obs_power_sum(int m, Point p, int k)
{
    Observable o;
    for (int v = 0; v < m; ++v) {
        Monomial mo;
        mo.pw[v][p] = std::uint8_t(k);
        o.push_back(mo);
    }
    return o;
}

inline Observable obs_mul(const Observable& x, const Observable& y)
{
    Observable r;
    for (const auto& a : x)
        for (const auto& b : y) {
            Monomial c;
            c.coef = a.coef * b.coef;
            for (int v = 0; v < 3; ++v)
                for (int p = 0; p < 3; ++p) c.pw[v][p] = std::uint8_t(a.pw[v][p] + b.pw[v][p]);
            r.push_back(c);
        }
    return r;
}

inline Observable obs_scale(Observable x, double s)
{
    for (auto& mo : x) mo.coef *= s;
    return x;
}

inline Observable obs_add(Observable x, const Observable& y)
{
    x.insert(x.end(), y.begin(), y.end());
    return x;
}

/// d^k/dz^k u = D_k u for k <= 3, from d/dz (t - z)^c = -c (t - z)^{-1} (t - z)^c.
inline Observable obs_z_derivative(int m, double c, int k)
{
    if (k == 0) return obs_one();
    Observable S1 = obs_power_sum(m, ZPoint, 1), S2 = obs_power_sum(m, ZPoint, 2),
               S3 = obs_power_sum(m, ZPoint, 3);
    switch (k) {
    case 1: return obs_scale(S1, -c);
    case 2: return obs_add(obs_scale(obs_mul(S1, S1), c * c), obs_scale(S2, -c));
    case 3:
        return obs_add(obs_add(obs_scale(obs_mul(obs_mul(S1, S1), S1), -c * c * c),
                               obs_scale(obs_mul(S1, S2), 3 * c * c)),
                       obs_scale(S3, -2 * c));
    default: throw domain_error("obs_z_derivative: order above 3");
    }
}

/// phi~_i = sum over permutations of prod_{s<=i} t^-1 prod_{s>i} (t-1)^-1,
/// written as i!(m-i)! times the sum over i-subsets.
inline Observable obs_phi(int m, int i)
{
    if (i < 0 || i > m) throw domain_error(detail::cat("phi: i=", i, " outside [0, ", m, "]"));
    Observable o;
    double mult = factorial(i) * factorial(m - i);
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        if (__builtin_popcount(mask) != i) continue;
        Monomial mo;
        mo.coef = mult;
        for (int v = 0; v < m; ++v) mo.pw[v][(mask >> v) & 1u ? Origin : One] = 1;
        o.push_back(mo);
    }
    return o;
}

// ---------------------------------------------------------------------------
// Integration over one cycle

/// Exponents and positions of the three named points (origin, one, z).
struct PointData {
    std::array<double, 3> pos{0.0, 1.0, 0.0};
    std::array<double, 3> lam{};
};

inline PointData point_data(const ExponentChart& ch, double z)
{
    if (!ch.is_real()) throw domain_error("quadrature: exponents must be real");
    if (!std::isfinite(z) || z == 0.0 || z == 1.0)
        throw domain_error(detail::cat("quadrature: z=", z, " coincides with a singular point"));
    return {{0.0, 1.0, z}, {ch.a.real(), ch.b.real(), ch.c.real()}};
}

struct Estimate {
    double value = 0.0;
    double error = 0.0;
    int level = 0;
    bool converged = false;
};

namespace detail {

struct Geometry {
    std::array<int, 3> named{};  // named point at sorted slot q
    std::array<double, 3> P{};   // sorted positions
};

inline Geometry sort_points(const PointData& pd)
{
    Geometry G;
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int x, int y) { return pd.pos[x] < pd.pos[y]; });
    for (int q = 0; q < 3; ++q) {
        G.named[q] = idx[q];
        G.P[q] = pd.pos[idx[q]];
    }
    if (G.P[0] == G.P[1] || G.P[1] == G.P[2]) throw domain_error("quadrature: coincident singular points");
    return G;
}

}  // namespace detail

/// Empty when every collision and escape exponent clears the margin;
/// otherwise the first violated inequality, spelled out.
inline std::optional<std::string> convergence_violation(const std::array<int, 4>& occ, const PointData& pd,
                                                        double g, const std::vector<Observable>& obs,
                                                        double margin)
{
    const auto G = detail::sort_points(pd);
    const int m = occ[0] + occ[1] + occ[2] + occ[3];
    static const char* pname[3] = {"0", "1", "z"};

    for (int q = 0; q < 3; ++q) {
        int np = G.named[q];
        int extra = 0;
        for (const auto& o : obs)
            for (const auto& mo : o)
                for (int v = 0; v < m; ++v) extra = std::max<int>(extra, mo.pw[v][np]);
        double lam = pd.lam[np] - extra;
        int n = occ[q] + occ[q + 1];
        for (int k = 1; k <= n; ++k) {
            double e = k * (lam + 1.0) + binom(k, 2) * g;
            if (!(e > margin))
                return detail::cat(k, " variable(s) meeting t=", pname[np], ": ", k, "*(", lam, "+1) + ",
                                   binom(k, 2), "*g = ", e, " must exceed the margin ", margin);
        }
    }
    int n_inf = occ[0] + occ[3];
    if (n_inf > 0) {
        int decay = 1 << 20;
        for (const auto& o : obs)
            for (const auto& mo : o)
                for (int v = 0; v < m; ++v) {
                    int s = mo.pw[v][0] + mo.pw[v][1] + mo.pw[v][2];
                    decay = std::min(decay, s);
                }
        if (obs.empty()) decay = 0;
        double L = pd.lam[0] + pd.lam[1] + pd.lam[2] - decay;
        for (int k = 1; k <= n_inf; ++k) {
            double e = k * (L + (m - k) * g + 1.0) + binom(k, 2) * g;
            if (!(e < -margin))
                return detail::cat(k, " variable(s) escaping to infinity: ", k, "*(", L, " + ", m - k,
                                   "*g + 1) + ", binom(k, 2), "*g = ", e, " must be below -", margin);
        }
    }
    for (int grp = 0; grp < 4; ++grp)
        for (int k = 2; k <= occ[grp]; ++k) {
            double e = binom(k, 2) * g + (k - 1);
            if (!(e > margin))
                return detail::cat(k, " variables colliding inside one interval: ", binom(k, 2), "*g + ", k - 1,
                                   " = ", e, " must exceed the margin ", margin);
        }
    return std::nullopt;
}

namespace detail {

// Evaluates m! * integral over the ordered domain of u(t) * obs_k(t) on one grid.
class CycleIntegrator {
public:
    CycleIntegrator(const std::array<int, 4>& occ, const PointData& pd, double g, const std::vector<Observable>& obs)
        : occ_(occ), pd_(pd), g_(g), obs_(obs), G_(sort_points(pd))
    {
        m_ = occ[0] + occ[1] + occ[2] + occ[3];
        if (m_ < 1 || m_ > 3) throw domain_error(detail::cat("quadrature: m=", m_, " outside [1, 3]"));
        for (int q = 0; q < 3; ++q)
            for (int r = q + 1; r < 3; ++r) lpd_[q][r] = std::log(G_.P[r] - G_.P[q]);
        for (int q = 0; q < 3; ++q) lam_sorted_[q] = pd.lam[G_.named[q]];
        scale_left_ = std::max(1.0, G_.P[1] - G_.P[0]);
        scale_right_ = std::max(1.0, G_.P[2] - G_.P[1]);
        int v = 0;
        for (int grp = 0; grp < 4; ++grp) {
            base_[grp] = v;
            for (int k = 0; k < occ[grp]; ++k) group_of_[v++] = grp;
        }
    }

    int m() const { return m_; }

    std::vector<double> run(const std::vector<quad::Node>& nodes, int threads) const
    {
        const std::size_t N = nodes.size(), K = obs_.size();
        std::vector<std::vector<double>> rows(N, std::vector<double>(K, 0.0));
        quad::parallel_for(N, threads, [&](std::size_t i0) { rows[i0] = row(nodes, i0); });
        std::vector<double> out(K);
        std::vector<double> col(N);
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t i = 0; i < N; ++i) col[i] = rows[i][k];
            out[k] = factorial(m_) * quad::pairwise_sum(col.data(), N);
        }
        return out;
    }

private:
    struct VarGeo {
        double ldlo = 0, ldhi = 0, lgap_up = 0;
    };

    // Inner sums for a fixed outer node, in a fixed order.
    std::vector<double> row(const std::vector<quad::Node>& nodes, std::size_t i0) const
    {
        const std::size_t N = nodes.size(), K = obs_.size();
        std::vector<CompensatedSum> acc(K);
        std::array<std::size_t, 3> idx{i0, 0, 0};
        std::vector<double> vals(K);
        std::size_t inner = 1;
        for (int a = 1; a < m_; ++a) inner *= N;
        for (std::size_t t = 0; t < inner; ++t) {
            std::size_t r = t;
            for (int a = m_ - 1; a >= 1; --a) {
                idx[a] = r % N;
                r /= N;
            }
            point(nodes, idx, vals);
            for (std::size_t k = 0; k < K; ++k) acc[k].add(vals[k]);
        }
        std::vector<double> out(K);
        for (std::size_t k = 0; k < K; ++k) out[k] = acc[k].value().real();
        return out;
    }

    void point(const std::vector<quad::Node>& nodes, const std::array<std::size_t, 3>& idx,
               std::vector<double>& vals) const
    {
        std::array<VarGeo, 3> geo{};
        double ljac = 0.0;
        int axis = 0;
        for (int grp = 0; grp < 4; ++grp) {
            const int k = occ_[grp], b = base_[grp];
            if (k == 0) continue;
            if (grp == 1 || grp == 2) {
                // Product form anchored at the lower endpoint.
                const double lL = lpd_[grp - 1][grp];
                double ly = 0.0, lom = quad::neg_inf;
                for (int r = 0; r < k; ++r) {
                    const auto& nd = nodes[idx[axis++]];
                    const int v = b + k - 1 - r;
                    const double lgap = lL + ly + nd.l1x;
                    ljac += lL + ly + nd.lw;
                    lom = quad::log_add(lom, ly + nd.l1x);
                    ly += nd.lx;
                    geo[v].ldlo = lL + ly;
                    geo[v].ldhi = lL + lom;
                    if (r >= 1) geo[v].lgap_up = lgap;
                }
            } else {
                // t = p +- l (1/s - 1), with s a product of nodes.
                const double ll = std::log(grp == 3 ? scale_right_ : scale_left_);
                double ls = 0.0, l1s = quad::neg_inf;
                for (int r = 0; r < k; ++r) {
                    const auto& nd = nodes[idx[axis++]];
                    const double ls_new = ls + nd.lx;
                    l1s = quad::log_add(l1s, ls + nd.l1x);
                    ljac += ll + ls + nd.lw - 2.0 * ls_new;
                    const double ldist = ll + l1s - ls_new;
                    const double lgap = ll + nd.l1x - ls_new;
                    if (grp == 3) {
                        const int v = b + r;
                        geo[v].ldlo = ldist;
                        if (r >= 1) geo[v - 1].lgap_up = lgap;
                    } else {
                        const int v = b + k - 1 - r;
                        geo[v].ldhi = ldist;
                        if (r >= 1) geo[v].lgap_up = lgap;
                    }
                    ls = ls_new;
                }
            }
        }

        // Log distances to the named points, with the sign of (t_v - p).
        std::array<std::array<double, 3>, 3> ld{};
        std::array<std::array<int, 3>, 3> neg{};
        double lu = ljac;
        for (int v = 0; v < m_; ++v) {
            const int grp = group_of_[v];
            for (int q = 0; q < 3; ++q) {
                double l;
                if (q < grp) {
                    const int lo = grp - 1;
                    l = q == lo ? geo[v].ldlo : quad::log_add(geo[v].ldlo, lpd_[q][lo]);
                } else {
                    l = q == grp ? geo[v].ldhi : quad::log_add(geo[v].ldhi, lpd_[grp][q]);
                }
                const int np = G_.named[q];
                ld[v][np] = l;
                neg[v][np] = q >= grp;
                lu += lam_sorted_[q] * l;
            }
        }
        for (int v = 0; v < m_; ++v)
            for (int w = v + 1; w < m_; ++w) {
                const int gv = group_of_[v], gw = group_of_[w];
                double l;
                if (gv == gw) {
                    l = quad::neg_inf;
                    for (int s = v; s < w; ++s) l = quad::log_add(l, geo[s].lgap_up);
                } else {
                    l = quad::log_add(geo[v].ldhi, geo[w].ldlo);
                    if (gw - 1 > gv) l = quad::log_add(l, lpd_[gv][gw - 1]);
                }
                lu += g_ * l;
            }

        for (std::size_t k = 0; k < obs_.size(); ++k) {
            double s = 0.0;
            for (const auto& mo : obs_[k]) {
                double le = lu;
                int sign = 0;
                for (int v = 0; v < m_; ++v)
                    for (int p = 0; p < 3; ++p)
                        if (int e = mo.pw[v][p]) {
                            le -= e * ld[v][p];
                            sign += e * neg[v][p];
                        }
                double t = mo.coef * std::exp(le);
                s += (sign & 1) ? -t : t;
            }
            vals[k] = s;
        }
    }

    std::array<int, 4> occ_;
    PointData pd_;
    double g_;
    std::vector<Observable> obs_;
    Geometry G_;
    int m_ = 0;
    std::array<std::array<double, 3>, 3> lpd_{};
    std::array<double, 3> lam_sorted_{};
    double scale_left_ = 1, scale_right_ = 1;
    std::array<int, 4> base_{};
    std::array<int, 3> group_of_{};
};

}  // namespace detail

/// m! * (ordered-domain integral) of u(t) * obs_k(t) for each observable, with
/// standard loading: every base factor |t - p|, |t_j - t_i| taken positive.
inline std::vector<Estimate> integrate_cycle(const std::array<int, 4>& occ, const PointData& pd, double g,
                                             const std::vector<Observable>& obs, const QuadratureConfig& cfg)
{
    cfg.validate();
    if (auto v = convergence_violation(occ, pd, g, obs, cfg.convergence_margin))
        throw domain_error("integral does not converge absolutely: " + *v);
    detail::CycleIntegrator integ(occ, pd, g, obs);
    const int threads = quad::thread_count(cfg.threads);
    // Past log x ~ -40/margin the neglected tail is below e^-40.
    const double two_u_max = std::max(80.0, 40.0 / cfg.convergence_margin);

    std::vector<Estimate> est(obs.size());
    std::vector<double> prev;
    for (int lev = cfg.level; lev <= cfg.level + cfg.max_refinement; ++lev) {
        auto nodes = quad::tanh_sinh_nodes(lev, two_u_max);
        if (!prev.empty() && std::pow(double(nodes.size()), integ.m()) > double(cfg.max_nodes)) break;
        auto cur = integ.run(nodes, threads);
        if (!prev.empty()) {
            double scale = 0.0;
            for (double x : cur) scale = std::max(scale, std::fabs(x));
            bool all = true;
            for (std::size_t k = 0; k < cur.size(); ++k) {
                est[k].value = cur[k];
                est[k].error = std::fabs(cur[k] - prev[k]);
                est[k].level = lev;
                est[k].converged =
                    est[k].error <= cfg.target_rel_tol * std::max(std::fabs(cur[k]), 1e-3 * scale);
                all = all && est[k].converged;
            }
            if (all) break;
        } else {
            for (std::size_t k = 0; k < cur.size(); ++k) est[k] = {cur[k], INFINITY, lev, false};
        }
        prev = cur;
    }
    return est;
}

inline std::vector<Estimate> integrate_cycle(const CycleDescriptor& cyc, const ExponentChart& ch, double z,
                                             const std::vector<Observable>& obs, const QuadratureConfig& cfg)
{
    if (cyc.m() != ch.m)
        throw domain_error(detail::cat("cycle occupies ", cyc.m(), " variables but the chart has m=", ch.m));
    return integrate_cycle(cyc.occupancy, point_data(ch, z), ch.g.real(), obs, cfg);
}

// ---------------------------------------------------------------------------
// Basis values

inline void check_basis_z(BasisTag tag, double z)
{
    bool ok = true;
    switch (tag) {
    case BasisTag::I: ok = (z > 0 && z < 1) || z < 0; break;
    case BasisTag::J: ok = z > 0 && z < 1; break;
    case BasisTag::K: ok = z < 0; break;
    case BasisTag::Raw: ok = z != 0 && z != 1; break;
    }
    if (!ok) throw domain_error(detail::cat("basis ", basis_name(tag), " is not defined at z=", z));
}

/// I_j, J_j or K_j at real z by quadrature (m <= 3).
inline Estimate eval_basis(int j, const ExponentChart& ch, double z, BasisTag tag, const QuadratureConfig& cfg)
{
    if (ch.m > 3) throw domain_error(detail::cat("eval_basis: m=", ch.m, " exceeds 3"));
    check_basis_z(tag, z);
    return integrate_cycle(basis_cycle(tag, j, ch.m), ch, z, {obs_one()}, cfg)[0];
}

/// One value per j = 0..m.
struct SolutionSample {
    double z = 0.0;
    BasisTag tag = BasisTag::I;
    std::vector<double> values;
    std::vector<double> errors;
    bool converged = true;
};

inline SolutionSample eval_basis_all(const ExponentChart& ch, double z, BasisTag tag, const QuadratureConfig& cfg)
{
    SolutionSample s{z, tag, {}, {}, true};
    for (int j = 0; j <= ch.m; ++j) {
        auto e = eval_basis(j, ch, z, tag, cfg);
        s.values.push_back(e.value);
        s.errors.push_back(e.error);
        s.converged = s.converged && e.converged;
    }
    return s;
}

// ---------------------------------------------------------------------------
// m = 1 closed forms (Gauss)

inline double gauss_m1(int j, const ExponentChart& ch, double z, BasisTag tag)
{
    if (ch.m != 1) throw domain_error("gauss_m1: m must be 1");
    if (j < 0 || j > 1) throw domain_error("gauss_m1: j must be 0 or 1");
    check_basis_z(tag, z);
    const cplx a = ch.a, b = ch.b, c = ch.c, s = a + b + c;
    cplx r;
    switch (tag) {
    case BasisTag::I:
        if (j == 0) r = beta_fn(b + 1.0, -s - 1.0) * gauss_2f1(-c, -s - 1.0, -a - c, z);
        else r = beta_fn(a + 1.0, c + 1.0) * std::pow(std::fabs(z), a + c + 1.0) * gauss_2f1(-b, a + 1.0, a + c + 2.0, z);
        break;
    case BasisTag::J:
        if (j == 0) r = beta_fn(a + 1.0, -s - 1.0) * gauss_2f1(-c, -s - 1.0, -b - c, 1.0 - z);
        else
            r = beta_fn(b + 1.0, c + 1.0) * std::pow(1.0 - z, b + c + 1.0) *
                gauss_2f1(-a, b + 1.0, b + c + 2.0, 1.0 - z);
        break;
    case BasisTag::K:
        if (j == 0)
            r = beta_fn(c + 1.0, -s - 1.0) * std::pow(-1.0 / z, -s - 1.0) * gauss_2f1(-b, -s - 1.0, -a - b, 1.0 / z);
        else r = beta_fn(a + 1.0, b + 1.0) * std::pow(-1.0 / z, -c) * gauss_2f1(-c, a + 1.0, a + b + 2.0, 1.0 / z);
        break;
    case BasisTag::Raw: throw domain_error("gauss_m1: no closed form for Raw cycles");
    }
    return r.real();
}

// ---------------------------------------------------------------------------
// Leading asymptotics

struct Asymptotic {
    double coefficient = 0.0;
    double exponent = 0.0;
};

/// I_j ~ coeff |z|^exp (z -> 0), J_j ~ coeff (1-z)^exp (z -> 1),
/// K_j ~ coeff (-1/z)^exp (z -> -infinity).
/// The Selberg factor over (0, z) carries (a+1, c+1); for K_j the m-j variables
/// below z carry (lambda_inf - 1, c+1) and the exponent is e_{m-j} at infinity.
inline Asymptotic leading_asymptotic(int j, const ExponentChart& ch, BasisTag tag)
{
    const int m = ch.m;
    if (j < 0 || j > m) throw domain_error(detail::cat("leading_asymptotic: j=", j, " outside [0, ", m, "]"));
    const cplx a = ch.a, b = ch.b, c = ch.c, h = 0.5 * ch.g, li = ch.lambda_inf();
    cplx coef, ex;
    switch (tag) {
    case BasisTag::I:
        coef = factorial(m) * selberg(j, a + 1.0, c + 1.0, h) * selberg(m - j, li - 1.0, b + 1.0, h);
        ex = char_exponents(ch, Singularity::Zero).values[j];
        break;
    case BasisTag::J:
        coef = factorial(m) * selberg(j, b + 1.0, c + 1.0, h) * selberg(m - j, li - 1.0, a + 1.0, h);
        ex = char_exponents(ch, Singularity::One).values[j];
        break;
    case BasisTag::K:
        coef = factorial(m) * selberg(m - j, li - 1.0, c + 1.0, h) * selberg(j, a + 1.0, b + 1.0, h);
        ex = char_exponents(ch, Singularity::Infinity).values[m - j];
        break;
    case BasisTag::Raw: throw domain_error("leading_asymptotic: Raw cycles have no fixed exponent");
    }
    return {coef.real(), ex.real()};
}

/// The coefficients exactly as displayed: S_j(a+1, b+1, g/2) for I, and for K
/// the display's S_j(lambda_inf - 1, b+1) S_{m-j}(a+1, b+1) with exponent e_j.
inline Asymptotic leading_asymptotic_printed(int j, const ExponentChart& ch, BasisTag tag)
{
    const int m = ch.m;
    if (j < 0 || j > m) throw domain_error("leading_asymptotic_printed: j out of range");
    const cplx a = ch.a, b = ch.b, h = 0.5 * ch.g, li = ch.lambda_inf();
    switch (tag) {
    case BasisTag::I:
        return {(factorial(m) * selberg(j, a + 1.0, b + 1.0, h) * selberg(m - j, li - 1.0, b + 1.0, h)).real(),
                char_exponents(ch, Singularity::Zero).values[j].real()};
    case BasisTag::K:
        return {(factorial(m) * selberg(j, li - 1.0, b + 1.0, h) * selberg(m - j, a + 1.0, b + 1.0, h)).real(),
                char_exponents(ch, Singularity::Infinity).values[j].real()};
    default: return leading_asymptotic(j, ch, tag);
    }
}

/// |value / (coeff * local^exp) - 1| at a point near the singularity.
inline double asymptotic_residual(int j, const ExponentChart& ch, BasisTag tag, double z, const Asymptotic& as,
                                  const QuadratureConfig& cfg)
{
    const double v = eval_basis(j, ch, z, tag, cfg).value;
    double local = tag == BasisTag::I ? std::fabs(z) : tag == BasisTag::J ? 1.0 - z : -1.0 / z;
    return std::fabs(v / (as.coefficient * std::pow(local, as.exponent)) - 1.0);
}

// ---------------------------------------------------------------------------
// Reflections and the numeric connection identity

enum class Reflection { JFromI, KFromI };

/// JFromI: J_j(a,b,c; z) = I_j(b,a,c; 1-z), 0 < z < 1.
/// KFromI: K_j(a,b,c; z) = (-z)^{(a+b+c+1)m + C(m,2)g} I_j(a,c,b; 1/z), z < 0.
inline double reflection_residual(const ExponentChart& ch, double z, Reflection kind, const QuadratureConfig& cfg)
{
    double worst = 0.0;
    for (int j = 0; j <= ch.m; ++j) {
        double lhs, rhs;
        if (kind == Reflection::JFromI) {
            ExponentChart sw{ch.m, ch.b, ch.a, ch.c, ch.g};
            lhs = eval_basis(j, ch, z, BasisTag::J, cfg).value;
            rhs = eval_basis(j, sw, 1.0 - z, BasisTag::I, cfg).value;
        } else {
            ExponentChart sw{ch.m, ch.a, ch.c, ch.b, ch.g};
            double ex = ((ch.a + ch.b + ch.c + 1.0) * double(ch.m) + binom(ch.m, 2) * ch.g).real();
            lhs = eval_basis(j, ch, z, BasisTag::K, cfg).value;
            rhs = std::pow(-z, ex) * eval_basis(j, sw, 1.0 / z, BasisTag::I, cfg).value;
        }
        worst = std::max(worst, std::fabs(lhs - rhs) / std::max(std::fabs(lhs), std::fabs(rhs)));
    }
    return worst;
}

/// max_i |I_i - sum_j p_ij X_j| / max(|I_i|, max_j |p_ij X_j|), with X = J
/// (0 < z < 1) or X = K (z < 0) and p from the closed-form connection matrix.
inline double connection_residual_numeric(const ExponentChart& ch, double z, PairKind pair,
                                          const QuadratureConfig& cfg)
{
    const bool inf = pair == PairKind::ZeroInf;
    const ConnectionMatrix P = inf ? connect_0inf(ch, Variant::SumA) : connect_01(ch, Variant::SumA);
    auto I = eval_basis_all(ch, z, BasisTag::I, cfg);
    auto X = eval_basis_all(ch, z, inf ? BasisTag::K : BasisTag::J, cfg);
    double worst = 0.0;
    for (int i = 0; i <= ch.m; ++i) {
        cplx s = 0.0;
        double scale = std::fabs(I.values[i]);
        for (int j = 0; j <= ch.m; ++j) {
            cplx t = P.p(i, j) * X.values[j];
            scale = std::max(scale, std::abs(t));
            s += t;
        }
        worst = std::max(worst, std::abs(s - I.values[i]) / scale);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Differential equations

struct OdeTerms {
    std::vector<cplx> terms;
    double residual() const
    {
        cplx s = 0.0;
        double scale = 0.0;
        for (auto t : terms) {
            s += t;
            scale = std::max(scale, std::abs(t));
        }
        return std::abs(s) / scale;
    }
};

/// Terms of the scalar equation for m = 1 (hypergeometric) or m = 2
/// (Dotsenko-Fateev), given the derivatives d[0..m+1] of a solution at z.
inline OdeTerms ode_terms(const ExponentChart& ch, double z, const std::vector<cplx>& d)
{
    const cplx a = ch.a, b = ch.b, c = ch.c, g = ch.g;
    if (ch.m == 1) {
        if (d.size() < 3) throw domain_error("ode_terms: need derivatives up to order 2");
        return {{z * (z - 1) * d[2], (a + c - (a + b + 2.0 * c) * z) * d[1], c * (a + b + c + 1.0) * d[0]}};
    }
    if (ch.m == 2) {
        if (d.size() < 4) throw domain_error("ode_terms: need derivatives up to order 3");
        cplx K1 = -g - 3.0 * b - 3.0 * c, K2 = -g - 3.0 * a - 3.0 * c;
        cplx L1 = (b + c) * (2.0 * b + 2.0 * c + g + 1.0), L2 = (a + c) * (2.0 * a + 2.0 * c + g + 1.0);
        cplx L3 = (b + c) * (2.0 * a + 2.0 * c + g + 1.0) + (a + c) * (2.0 * b + 2.0 * c + g + 1.0) +
                  (c - 1.0) * (a + b + c) + (3.0 * c + g) * (a + b + c + g + 1.0);
        cplx M1 = -c * (2.0 * b + 2.0 * c + g + 1.0) * (2.0 * a + 2.0 * b + 2.0 * c + g + 2.0);
        cplx M2 = -c * (2.0 * a + 2.0 * c + g + 1.0) * (2.0 * a + 2.0 * b + 2.0 * c + g + 2.0);
        double w = z * (z - 1);
        return {{w * w * d[3], (K1 * z + K2 * (z - 1)) * w * d[2],
                 (L1 * z * z + L2 * (z - 1) * (z - 1) + L3 * w) * d[1], (M1 * z + M2 * (z - 1)) * d[0]}};
    }
    throw domain_error(detail::cat("ode_terms: no explicit equation for m=", ch.m));
}

/// The scalar equation applied to I_0 (0 < z < 1), or to J_0 when `tag` is J;
/// derivatives come from differentiating under the integral sign, so the
/// cycle must stay away from t = z.
inline double ode_residual(const ExponentChart& ch, double z, const QuadratureConfig& cfg,
                           BasisTag tag = BasisTag::I)
{
    if (ch.m != 1 && ch.m != 2) throw domain_error("ode_residual: m must be 1 or 2");
    if (tag != BasisTag::I && tag != BasisTag::J) throw domain_error("ode_residual: basis must be I or J");
    if (!(z > 0 && z < 1)) throw domain_error("ode_residual: z must lie in (0, 1)");
    std::vector<Observable> obs;
    for (int k = 0; k <= ch.m + 1; ++k) obs.push_back(obs_z_derivative(ch.m, ch.c.real(), k));
    auto est = integrate_cycle(basis_cycle(tag, 0, ch.m), ch, z, obs, cfg);
    std::vector<cplx> d;
    for (const auto& e : est) d.push_back(e.value);
    return ode_terms(ch, z, d).residual();
}

/// The hypergeometric equation applied to the Gauss form of I_0 (m = 1).
inline double ode_residual_closed_form(const ExponentChart& ch, double z)
{
    if (ch.m != 1) throw domain_error("ode_residual_closed_form: m must be 1");
    const cplx a = ch.a, b = ch.b, c = ch.c;
    cplx A = -c, B = -a - b - c - 1.0, C = -a - c;
    cplx pre = beta_fn(b + 1.0, -a - b - c - 1.0);
    std::vector<cplx> d(3);
    d[0] = pre * gauss_2f1(A, B, C, z);
    d[1] = pre * A * B / C * gauss_2f1(A + 1.0, B + 1.0, C + 1.0, z);
    d[2] = pre * A * (A + 1.0) * B * (B + 1.0) / (C * (C + 1.0)) * gauss_2f1(A + 2.0, B + 2.0, C + 2.0, z);
    return ode_terms(ch, z, d).residual();
}

/// <phi~_i> over a cycle.
inline Estimate phi_pairing(int i, const CycleDescriptor& cyc, const ExponentChart& ch, double z,
                            const QuadratureConfig& cfg)
{
    return integrate_cycle(cyc, ch, z, {obs_phi(ch.m, i)}, cfg)[0];
}

struct SystemReport {
    std::vector<double> residual;  // per equation i = 0..m
    double max() const { return *std::max_element(residual.begin(), residual.end()); }
};

/// The first-order system for <phi~_i> on the cycle `cyc` (which must avoid
/// t = z). Row i uses the general display; at i = 0 and i = m it reduces to
/// the two boundary equations.
inline SystemReport ode_system_residual(const ExponentChart& ch, double z, const QuadratureConfig& cfg,
                                        std::optional<CycleDescriptor> cyc = std::nullopt)
{
    const int m = ch.m;
    if (m < 1 || m > 2) throw domain_error("ode_system_residual: m must be 1 or 2");
    const CycleDescriptor C = cyc ? *cyc : basis_cycle(BasisTag::I, 0, m);
    std::vector<Observable> obs;
    const Observable D1 = obs_z_derivative(m, ch.c.real(), 1);
    for (int i = 0; i <= m; ++i) obs.push_back(obs_phi(m, i));
    for (int i = 0; i <= m; ++i) obs.push_back(obs_mul(obs_phi(m, i), D1));
    auto est = integrate_cycle(C, ch, z, obs, cfg);
    std::vector<double> P(m + 1), D(m + 1);
    for (int i = 0; i <= m; ++i) {
        P[i] = est[i].value;
        D[i] = est[m + 1 + i].value;
    }
    const double a = ch.a.real(), b = ch.b.real(), c = ch.c.real(), g = ch.g.real();
    SystemReport rep;
    for (int i = 0; i <= m; ++i) {
        double t0 = 0.0, t1 = 0.0;
        if (i > 0) t0 = i / z * ((a + c + (i - 1) * g / 2) * P[i] + (b + (m - i) * g / 2) * P[i - 1]);
        if (i < m) t1 = (m - i) / (z - 1) * ((b + c + (m - i - 1) * g / 2) * P[i] + (a + i * g / 2) * P[i + 1]);
        double scale = std::max({std::fabs(D[i]), std::fabs(t0), std::fabs(t1)});
        rep.residual.push_back(std::fabs(D[i] - t0 - t1) / scale);
    }
    return rep;
}

}  // namespace selq
