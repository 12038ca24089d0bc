#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ensemble.hpp"
#include "quad.hpp"
#include "skewlin.hpp"
#include "symfun.hpp"

namespace rmtau {

// -mult*V(1/x,s); -inf at x = 0 when s != 0
inline double log_s_factor(double x, const CouplingSeq& s, double mult)
{
    if (s.is_zero()) return 0.0;
    if (x == 0.0) return -INFINITY;
    return -mult * potential(1.0 / x, s);
}

inline double log_s_factor(cplx z, const CouplingSeq& s, double mult)
{
    if (s.is_zero()) return 0.0;
    if (z == 0.0) return -INFINITY;
    return -mult * potential(1.0 / z, s).real();
}

// ensemble weights; t is passed explicitly (zero for moment tables)
struct Weights {
    static double oe(double x, const CouplingSeq& t, const CouplingSeq& s)
    {
        return std::exp(-0.5 * x * x + potential(x, t) + log_s_factor(x, s, 1.0));
    }
    static double se(double x, const CouplingSeq& t, const CouplingSeq& s)
    {
        return std::exp(-x * x + 2.0 * potential(x, t) + log_s_factor(x, s, 2.0));
    }
    // erfc(sqrt2 Im z) e^{-Re z^2} e^{2Re V}
    static double ginoe_c(cplx z, const CouplingSeq& t, const CouplingSeq& s)
    {
        double x = z.real(), y = z.imag();
        return std::exp(-x * x + y * y + quad::log_erfc(std::sqrt(2.0) * y) + 2.0 * potential(z, t).real() +
                        log_s_factor(z, s, 2.0));
    }
    static double ginse(cplx z, const CouplingSeq& t, const CouplingSeq& s)
    {
        return std::exp(-std::norm(z) + 2.0 * potential(z, t).real() + log_s_factor(z, s, 2.0));
    }
};

inline std::string spec_digest(const EnsembleSpec& e, bool with_t)
{
    std::ostringstream os;
    os.precision(17);
    os << to_string(e.kind) << ";L=" << e.L << ";alpha=" << e.alpha << ";beta=" << e.beta << ";s=";
    for (double v : e.s.values()) os << v << ',';
    if (with_t) {
        os << ";t=";
        for (double v : e.t.values()) os << v << ',';
    }
    return os.str();
}

inline quad::Resolution moment_resolution(const EnsembleSpec& e)
{
    quad::Resolution r;
    r.rel_tol = 1e-13;
    r.order = 12;
    r.panel_width = 1.0;
    r.max_depth = 6;
    if (!e.s.is_zero()) r.zero_cluster = 10;
    return r;
}

inline int table_base(int L) { return std::min(0, L); }

namespace detail {

template <class W>
double line_extent(W&& w, int deg)
{
    return quad::detect_extent([&](double x) {
        double g = std::pow(std::max(1.0, x), deg);
        return std::max(w(x), w(-x)) * g;
    });
}

template <class W>
std::pair<double, double> plane_extents(W&& w, int deg)
{
    double X = quad::detect_extent([&](double x) {
        double m = 0;
        for (double y : {0.25, 0.5, 1.0, 2.0}) m = std::max({m, w(cplx(x, y)), w(cplx(-x, y))});
        return m * std::pow(std::max(1.0, x), deg);
    });
    double Y = quad::detect_extent([&](double y) {
        double m = 0;
        for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) m = std::max(m, w(cplx(x, y)));
        return m * std::pow(std::max(1.0, y), deg);
    });
    return {X, Y};
}

inline void powers(double x, int base, int n, std::vector<double>& out)
{
    out.resize(n);
    double p = std::pow(x, base);
    for (int k = 0; k < n; ++k) out[k] = p, p *= x;
}

inline void powers(cplx z, int base, int n, CVector& out)
{
    out.resize(n);
    cplx p = std::pow(z, base);
    for (int k = 0; k < n; ++k) out(k) = p, p *= z;
}

struct Table {
    CMatrix A;
    CVector a;
    Eigen::MatrixXd scaleA;
    Eigen::VectorXd scalea;
};

template <class F>
Table refine_table(F&& at_depth, const quad::Resolution& res, const char* what)
{
    Table prev = at_depth(0);
    double worst = 0;
    for (int d = 1; d <= res.max_depth; ++d) {
        Table cur = at_depth(d);
        worst = 0;
        for (Eigen::Index i = 0; i < cur.A.rows(); ++i)
            for (Eigen::Index j = 0; j < cur.A.cols(); ++j)
                if (cur.scaleA(i, j) > 0)
                    worst = std::max(worst, std::abs(cur.A(i, j) - prev.A(i, j)) / cur.scaleA(i, j));
        for (Eigen::Index i = 0; i < cur.a.size(); ++i)
            if (cur.scalea(i) > 0) worst = std::max(worst, std::abs(cur.a(i) - prev.a(i)) / cur.scalea(i));
        if (worst <= res.rel_tol) return cur;
        prev = std::move(cur);
    }
    throw quad::QuadratureError(std::string(what) + ": moment table did not converge (residual " +
                                    std::to_string(worst) + ")",
                                {});
}

// A_nm = int int x^n y^m sgn(x-y) w w, a_n = int x^n w, via A_nm = int x^n w (2F_m(x) - M_m)
template <class W>
Table sgn_moments(W&& w, int base, int M, double X, const quad::Resolution& res, int depth)
{
    const quad::Rule& r = quad::gauss_legendre(res.order);
    double width = std::ldexp(res.panel_width, -depth);
    int cluster = res.zero_cluster > 0 ? res.zero_cluster + 2 * depth : 0;
    auto panels = quad::make_panels(-X, X, width, cluster);

    std::vector<double> nx, nw;  // node, quadrature weight * w(node)
    std::vector<std::vector<double>> F;
    std::vector<double> cum(M, 0.0), absmom(M, 0.0), pw;
    std::uint64_t evals = 0;
    for (const auto& P : panels) {
        std::vector<double> xs, ws;
        quad::append_nodes(P, r, xs, ws);
        std::vector<double> inc(M, 0.0);
        for (std::size_t j = 0; j < xs.size(); ++j) {
            double wx = w(xs[j]);
            ++evals;
            // partial integral over [P.a, x_j]
            std::vector<double> part(M, 0.0), ix, iw;
            quad::append_nodes({P.a, xs[j]}, r, ix, iw);
            for (std::size_t k = 0; k < ix.size(); ++k) {
                double c = iw[k] * w(ix[k]);
                ++evals;
                if (c == 0) continue;
                powers(ix[k], base, M, pw);
                for (int m = 0; m < M; ++m) part[m] += c * pw[m];
            }
            std::vector<double> Fx(M);
            for (int m = 0; m < M; ++m) Fx[m] = cum[m] + part[m];
            F.push_back(std::move(Fx));
            nx.push_back(xs[j]);
            nw.push_back(ws[j] * wx);
            powers(xs[j], base, M, pw);
            for (int m = 0; m < M; ++m) {
                inc[m] += ws[j] * wx * pw[m];
                absmom[m] += ws[j] * wx * std::abs(pw[m]);
            }
        }
        for (int m = 0; m < M; ++m) cum[m] += inc[m];
    }
    quad::evaluation_counter() += evals;

    Table T;
    T.A = CMatrix::Zero(M, M);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, M);
    for (std::size_t j = 0; j < nx.size(); ++j) {
        if (nw[j] == 0) continue;
        powers(nx[j], base, M, pw);
        for (int n = 0; n < M; ++n) {
            double c = nw[j] * pw[n];
            for (int m = 0; m < M; ++m) A(n, m) += c * (2.0 * F[j][m] - cum[m]);
        }
    }
    T.A = A.cast<cplx>();
    T.a = Eigen::Map<Eigen::VectorXd>(cum.data(), M).cast<cplx>();
    T.scalea = Eigen::Map<Eigen::VectorXd>(absmom.data(), M);
    T.scaleA = T.scalea * T.scalea.transpose();
    return T;
}

// mu_k = int x^k w for k = kmin .. kmin+count-1
template <class W>
Table line_moments(W&& w, int kmin, int count, double X, const quad::Resolution& res, int depth)
{
    auto g = quad::real_grid(-X, X, res, depth);
    Table T;
    T.a = CVector::Zero(count);
    T.scalea = Eigen::VectorXd::Zero(count);
    std::vector<double> pw;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        double x = g.nodes[i].real();
        double c = g.weights[i] * w(x);
        if (c == 0) continue;
        powers(x, kmin, count, pw);
        for (int k = 0; k < count; ++k) {
            T.a(k) += c * pw[k];
            T.scalea(k) += c * std::abs(pw[k]);
        }
    }
    quad::evaluation_counter() += g.nodes.size();
    T.A = CMatrix::Zero(0, 0);
    T.scaleA = Eigen::MatrixXd::Zero(0, 0);
    return T;
}

// R_nm = int_{C+} z^n zbar^m g(z) d^2z
template <class G>
Table plane_moments(G&& g, int base, int M, double X, double Y, const quad::Resolution& res, int depth)
{
    auto grid = quad::halfplane_grid(X, Y, res, depth);
    Table T;
    T.A = CMatrix::Zero(M, M);
    Eigen::VectorXd absk = Eigen::VectorXd::Zero(2 * M - 1);
    CVector zp;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        cplx z = grid.nodes[i];
        cplx c = grid.weights[i] * g(z);
        if (c == 0.0) continue;
        powers(z, base, M, zp);
        T.A.noalias() += (c * zp) * zp.conjugate().transpose();
        double r = std::abs(z), ac = std::abs(c), p = std::pow(r, 2 * base);
        for (int k = 0; k < 2 * M - 1; ++k) absk(k) += ac * p, p *= r;
    }
    quad::evaluation_counter() += grid.nodes.size();
    T.scaleA = Eigen::MatrixXd(M, M);
    for (int n = 0; n < M; ++n)
        for (int m = 0; m < M; ++m) T.scaleA(n, m) = absk(n + m);
    T.a = CVector::Zero(0);
    T.scalea = Eigen::VectorXd::Zero(0);
    return T;
}

} // namespace detail

// Un-symmetrized tables, exposed for diagnostics
struct RawMoments {
    int base = 0;
    CMatrix real;     // OE sgn table or SE (n-m)/2 mu table
    CVector border;   // OE a_n
    CMatrix complex;  // GinOE C_nm or GinSE R_nm
};

inline RawMoments raw_moments(const EnsembleSpec& e, int M, const quad::Resolution& res)
{
    RawMoments R;
    R.base = table_base(e.L);
    const int base = R.base;
    const CouplingSeq t0;
    const CouplingSeq& s = e.s;
    const int deg = 2 * (base + M) + 2;
    if (e.kind == EnsembleKind::OE || e.kind == EnsembleKind::GinOE) {
        auto w = [&](double x) { return Weights::oe(x, t0, s); };
        double X = detail::line_extent(w, deg);
        auto T = detail::refine_table([&](int d) { return detail::sgn_moments(w, base, M, X, res, d); }, res,
                                      "real-sector moments");
        R.real = T.A;
        R.border = T.a;
    }
    if (e.kind == EnsembleKind::SE) {
        auto w = [&](double x) { return Weights::se(x, t0, s); };
        double X = detail::line_extent(w, deg);
        int kmin = 2 * base - 1, count = 2 * M;
        auto T = detail::refine_table(
            [&](int d) {
                auto w2 = [&](double x) { return w(x); };
                auto tab = detail::line_moments(w2, kmin, count, X, res, d);
                if (s.is_zero() && kmin < 0) tab.a(0) = 0.0, tab.scalea(0) = 0.0;  // only hit with n = m
                return tab;
            },
            res, "SE moments");
        R.real = CMatrix::Zero(M, M);
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                if (i != j) R.real(i, j) = 0.5 * double(i - j) * T.a(i + j + 2 * base - 1 - kmin);
        R.border = CVector::Zero(M);
    }
    if (e.kind == EnsembleKind::GinOE) {
        auto w = [&](cplx z) { return Weights::ginoe_c(z, t0, s); };
        auto [X, Y] = detail::plane_extents(w, deg);
        auto T = detail::refine_table(
            [&](int d) { return detail::plane_moments(w, base, M, X, Y, res, d); }, res, "GinOE complex moments");
        R.complex = T.A;
    }
    if (e.kind == EnsembleKind::GinSE) {
        auto w = [&](cplx z) { return Weights::ginse(z, t0, s); };
        auto [X, Y] = detail::plane_extents(w, deg + 1);
        auto g = [&](cplx z) { return w(z) * (z - std::conj(z)); };
        auto T = detail::refine_table(
            [&](int d) {
                auto tab = detail::plane_moments(g, base, M, X, Y, res, d);
                return tab;
            },
            res, "GinSE moments");
        R.complex = T.A;
    }
    return R;
}

inline CMatrix skew_part(const CMatrix& A) { return 0.5 * (A - A.transpose()); }

inline SkewPair moment_pair(const EnsembleSpec& e, int M, const quad::Resolution& res)
{
    if (e.kind == EnsembleKind::GinUE) throw std::invalid_argument("moment_pair: GinUE uses bimoment determinants");
    quad::require_valid(e);
    if (M <= 0) throw std::invalid_argument("moment_pair: size must be positive");
    RawMoments R = raw_moments(e, M, res);
    SkewPair P;
    P.base = R.base;
    P.offset_hint = e.L;
    P.provenance = spec_digest(e, false) + ";M=" + std::to_string(M) + ";res=" + res.digest();
    const cplx I(0, 1);
    switch (e.kind) {
    case EnsembleKind::OE:
        P.A = e.beta * skew_part(R.real);
        P.a = e.beta * R.border;
        break;
    case EnsembleKind::GinOE:
        // -2i * skew(C) = -i (C - C^T)
        P.A = e.alpha * (-I) * (R.complex - R.complex.transpose()) + e.beta * skew_part(R.real);
        P.a = e.beta * R.border;
        break;
    case EnsembleKind::SE:
        P.A = e.beta * skew_part(R.real);
        P.a = CVector::Zero(M);
        break;
    case EnsembleKind::GinSE:
        P.A = e.alpha * skew_part(R.complex);
        P.a = CVector::Zero(M);
        break;
    default: break;
    }
    return P;
}

inline SkewPair moment_pair(const EnsembleSpec& e, int M) { return moment_pair(e, M, moment_resolution(e)); }

// table size covering every h_i + L for weight <= W at the given charge
inline int required_table_size(int W, int charge, int L)
{
    int top = W + charge - 1 + L;  // largest h_1 + L
    return std::max(1, top - table_base(L) + 1);
}

using MomentProvider = std::function<SkewPair(const EnsembleSpec&, int)>;

inline MomentProvider default_moments()
{
    return [](const EnsembleSpec& e, int M) { return moment_pair(e, M); };
}

// ---- kernel matrices ----

enum class KernelVariant { AbsDiff, Sign };

inline std::string to_string(KernelVariant v) { return v == KernelVariant::AbsDiff ? "|x-y|" : "sgn(x-y)"; }

struct KernelMatrix {
    std::vector<double> p;
    CMatrix K;
    CMatrix Kstar;
    EnsembleKind kind = EnsembleKind::OE;
    KernelVariant variant = KernelVariant::AbsDiff;
};

namespace detail {

// int int_{x>y} F(x,y) over [-X,X]^2 using a common panel lattice
template <class F>
cplx chamber2(F&& f, double X, const quad::Resolution& res, int depth)
{
    const quad::Rule& r = quad::gauss_legendre(res.order);
    double width = std::ldexp(res.panel_width, -depth);
    auto panels = quad::make_panels(-X, X, width, 0);
    cplx acc = 0;
    std::uint64_t evals = 0;
    for (std::size_t k = 0; k < panels.size(); ++k) {
        std::vector<double> xs, ws;
        quad::append_nodes(panels[k], r, xs, ws);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            std::vector<double> ys, vs;
            for (std::size_t q = 0; q < k; ++q) quad::append_nodes(panels[q], r, ys, vs);
            quad::append_nodes({panels[k].a, xs[i]}, r, ys, vs);
            cplx inner = 0;
            for (std::size_t j = 0; j < ys.size(); ++j) inner += vs[j] * cplx(f(xs[i], ys[j]));
            evals += ys.size();
            acc += ws[i] * inner;
        }
    }
    quad::evaluation_counter() += evals;
    return acc;
}

// insertions 1/(1 - p x) are only integrable short of the pole; cut at 0.97/|p| like the oracle does
inline double pole_limited_extent(double X, const std::vector<double>& p, const char*)
{
    double pm = 0;
    for (double q : p) pm = std::max(pm, std::abs(q));
    if (pm == 0) return X;
    return std::min(X, 0.97 / pm);
}

} // namespace detail

// K*_nm per kind; unit_denominators drops the 1/(1 - x p) factors (undeformed normalization)
inline KernelMatrix kernel_matrix(const EnsembleSpec& e, const std::vector<double>& p,
                                  KernelVariant variant = KernelVariant::AbsDiff, bool unit_denominators = false)
{
    quad::require_valid(e);
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (p[i] == p[j]) throw std::invalid_argument("kernel_matrix: coincident points p_i");
    KernelMatrix km;
    km.p = p;
    km.kind = e.kind;
    km.variant = variant;
    km.Kstar = CMatrix::Zero(n, n);
    km.K = CMatrix::Zero(n, n);
    quad::Resolution res;
    res.rel_tol = 1e-11;
    res.max_depth = 4;
    if (!e.s.is_zero()) res.zero_cluster = 10;
    const int L = e.L;
    auto den = [&](auto x, int i) {
        using X = decltype(x);
        return unit_denominators ? X(1.0) : X(1.0) - x * p[i];
    };

    auto real_part = [&](int a, int b) -> cplx {
        auto w = [&](double x) { return std::pow(x, L) * Weights::oe(x, e.t, e.s); };
        double X = detail::line_extent([&](double x) { return std::abs(w(x)); }, 2);
        X = detail::pole_limited_extent(X, p, "kernel_matrix");
        auto g = [&](double x, double y) {
            return w(x) * w(y) / (den(x, a) * den(y, a) * den(x, b) * den(y, b));
        };
        auto integrand = [&](double x, double y) {
            // x > y on the chamber
            if (variant == KernelVariant::AbsDiff) return 2.0 * (x - y) * g(x, y);
            return g(x, y) - g(y, x);
        };
        // the sgn form can cancel to zero, so convergence is judged against the size of the weight
        double mass = std::abs(quad::integrate_interval([&](double x) { return std::abs(w(x)); }, -X, X, res).value);
        quad::Resolution r2 = res;
        r2.abs_tol = 1e-12 * mass * mass;
        return quad::refine([&](int d) { return detail::chamber2(integrand, X, r2, d); }, r2, "kernel K*").value;
    };

    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            cplx v = 0;
            switch (e.kind) {
            case EnsembleKind::OE: v = real_part(a, b); break;
            case EnsembleKind::GinOE: {
                auto w = [&](cplx z) {
                    return std::pow(std::norm(z), L) * Weights::ginoe_c(z, e.t, e.s);
                };
                auto f = [&](cplx z) {
                    cplx zb = std::conj(z);
                    return (z - zb) * w(z) / (den(z, a) * den(zb, a) * den(z, b) * den(zb, b));
                };
                auto [X, Y] = detail::plane_extents([&](cplx z) { return w(z); }, 2);
                X = detail::pole_limited_extent(X, p, "kernel_matrix");
                quad::Resolution r2 = res;
                r2.extent = X, r2.extent_y = Y;
                v = quad::integrate_halfplane(f, r2).value + real_part(a, b);
                break;
            }
            case EnsembleKind::SE: {
                auto f = [&](double x) {
                    return std::pow(x, 2 * L) * Weights::se(x, e.t, e.s) /
                           std::pow(den(x, a) * den(x, b), 2);
                };
                double X = detail::line_extent([&](double x) { return Weights::se(x, e.t, e.s); }, 2 * L + 2);
                X = detail::pole_limited_extent(X, p, "kernel_matrix");
                quad::Resolution r1 = res;
                r1.extent = X;
                v = quad::integrate_real(f, r1).value;
                break;
            }
            case EnsembleKind::GinSE: {
                auto w = [&](cplx z) { return std::pow(std::norm(z), L) * Weights::ginse(z, e.t, e.s); };
                auto f = [&](cplx z) {
                    cplx zb = std::conj(z);
                    return (z - zb) * (z - zb) * w(z) / (den(z, a) * den(zb, a) * den(z, b) * den(zb, b));
                };
                auto [X, Y] = detail::plane_extents([&](cplx z) { return w(z); }, 4);
                X = detail::pole_limited_extent(X, p, "kernel_matrix");
                quad::Resolution r2 = res;
                r2.extent = X, r2.extent_y = Y;
                v = quad::integrate_halfplane(f, r2).value;
                break;
            }
            default: throw std::invalid_argument("kernel_matrix: unsupported kind");
            }
            km.Kstar(a, b) = km.Kstar(b, a) = v;
        }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) km.K(a, b) = (p[b] - p[a]) * km.Kstar(a, b);
    return km;
}

// prod p_i^{(L+1)(2-N)} / prod_{i>j}(p_i - p_j)
inline double kernel_prefactor(const std::vector<double>& p, int L)
{
    const int N = static_cast<int>(p.size());
    double num = 1, den = 1;
    for (int i = 0; i < N; ++i) {
        num *= std::pow(p[i], (L + 1) * (2 - N));
        for (int j = 0; j < i; ++j) den *= p[i] - p[j];
    }
    return num / den;
}

// ---- complex Ginibre bimoments ----

inline CMatrix complex_bimoment_matrix(const EnsembleSpec& e, int N)
{
    if (e.kind != EnsembleKind::GinUE) throw std::invalid_argument("complex_bimoment_matrix: kind must be GinUE");
    quad::require_valid(e);
    auto w = [&](cplx z) {
        cplx ex = potential(z, e.t) + potential(std::conj(z), e.t_prime) - std::norm(z);
        return std::exp(ex);
    };
    int deg = 2 * (N + e.L1 - e.L2) + 2;
    // extents over the full plane: probe both half-planes
    auto mag = [&](cplx z) { return std::max(std::abs(w(z)), std::abs(w(std::conj(z)))); };
    auto [X, Y] = detail::plane_extents(mag, deg);
    double R = std::max(X, Y);
    quad::Resolution res;
    res.rel_tol = 1e-13;
    res.max_depth = 5;
    auto at_depth = [&](int d) {
        detail::Table T;
        T.A = CMatrix::Zero(N, N);
        T.scaleA = Eigen::MatrixXd::Zero(N, N);
        auto lx = quad::make_line(-R, R, res, d);
        CVector zp, zq;
        for (std::size_t i = 0; i < lx.x.size(); ++i)
            for (std::size_t j = 0; j < lx.x.size(); ++j) {
                cplx z(lx.x[i], lx.x[j]);
                cplx c = lx.w[i] * lx.w[j] * w(z);
                detail::powers(z, e.L1, N, zp);
                detail::powers(std::conj(z), -e.L2, N, zq);
                T.A.noalias() += (c * zp) * zq.transpose();
                double r = std::abs(z);
                for (int a = 0; a < N; ++a)
                    for (int b = 0; b < N; ++b)
                        T.scaleA(a, b) += std::abs(c) * std::pow(r, a + b + e.L1 - e.L2);
            }
        quad::evaluation_counter() += lx.x.size() * lx.x.size();
        T.a = CVector::Zero(0);
        T.scalea = Eigen::VectorXd::Zero(0);
        return T;
    };
    return detail::refine_table(at_depth, res, "GinUE bimoments").A;
}

} // namespace rmtau
