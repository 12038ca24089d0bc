#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "ensemble.hpp"

namespace rmtau::quad {

using cplx = std::complex<double>;

inline double erfc(double x) { return std::erfc(x); }

// log erfc(x), asymptotic beyond the underflow of erfc
inline double log_erfc(double x)
{
    if (x < 25.0) return std::log(std::erfc(x));
    double x2 = x * x, s = 1.0, term = 1.0;
    for (int k = 1; k < 8; ++k) {
        term *= -(2.0 * k - 1) / (2.0 * x2);
        s += term;
    }
    return -x2 - std::log(x * std::sqrt(M_PI)) + std::log(s);
}

// counts integrand evaluations made through this module (cache tests read it)
inline std::atomic<std::uint64_t>& evaluation_counter()
{
    static std::atomic<std::uint64_t> c{0};
    return c;
}

struct Rule {
    std::vector<double> x, w;
};

namespace detail {

inline Rule make_gauss_legendre(int n)
{
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = 0;
            for (int k = 1; k <= n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1, p1 = 0;
        for (int k = 1; k <= n; ++k) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1 - z * z) * dp * dp);
    }
    return r;
}

// Golub-Welsch; weights are for the plain integrand, i.e. w_i e^{x_i^2}
inline Rule make_gauss_hermite(int n)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule r;
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.x.push_back(x);
        r.w.push_back(std::sqrt(M_PI) * v * v * std::exp(x * x));
    }
    // symmetrize
    for (int i = 0; i < n / 2; ++i) {
        double x = 0.5 * (r.x[n - 1 - i] - r.x[i]);
        double w = 0.5 * (r.w[i] + r.w[n - 1 - i]);
        r.x[i] = -x, r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = w;
    }
    if (n % 2) r.x[n / 2] = 0.0;
    return r;
}

template <class Make>
const Rule& cached_rule(std::map<int, Rule>& cache, int n, Make make)
{
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make(n)).first;
    return it->second;
}

} // namespace detail

inline const Rule& gauss_legendre(int n)
{
    static std::map<int, Rule> cache;
    return detail::cached_rule(cache, n, detail::make_gauss_legendre);
}

inline const Rule& gauss_hermite(int n)
{
    static std::map<int, Rule> cache;
    return detail::cached_rule(cache, n, detail::make_gauss_hermite);
}

struct Resolution {
    double rel_tol = 1e-12;
    double abs_tol = 0.0;
    int order = 12;
    double panel_width = 1.0;
    int zero_cluster = 0;   // geometric panels toward 0 (for s-deformed weights)
    int max_depth = 5;
    double extent = 0.0;    // 0: detect from the integrand
    double extent_y = 0.0;  // half-plane height, 0: detect

    std::string digest() const
    {
        char buf[200];
        std::snprintf(buf, sizeof buf, "rt=%.17g,at=%.17g,o=%d,pw=%.17g,zc=%d,md=%d,x=%.17g,y=%.17g",
                      rel_tol, abs_tol, order, panel_width, zero_cluster, max_depth, extent, extent_y);
        return buf;
    }
};

enum class Domain { RealLine, HalfPlane };

struct QuadratureGrid {
    Domain domain = Domain::RealLine;
    std::vector<cplx> nodes;
    std::vector<double> weights;
    Resolution resolution;
    int depth = 0;
};

struct Estimate {
    cplx value{};
    double error = 0;
    int depth = 0;
};

struct QuadratureError : std::runtime_error {
    Estimate best;
    QuadratureError(const std::string& what, Estimate b) : std::runtime_error(what), best(b) {}
};

struct Panel {
    double a, b;
};

// Panels covering [lo, hi] with the given breakpoints; optional geometric refinement toward 0.
inline std::vector<Panel> make_panels(double lo, double hi, double width, int cluster,
                                      const std::vector<double>& breaks = {})
{
    std::set<double> pts{lo, hi};
    for (double b : breaks)
        if (b > lo && b < hi) pts.insert(b);
    if (cluster > 0 && lo < 0 && hi > 0) pts.insert(0.0);
    std::vector<double> p(pts.begin(), pts.end());
    std::vector<Panel> out;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        double a = p[k], b = p[k + 1];
        int m = std::max(1, static_cast<int>(std::ceil((b - a) / width - 1e-9)));
        double h = (b - a) / m;
        for (int j = 0; j < m; ++j) {
            double pa = a + j * h, pb = (j == m - 1) ? b : a + (j + 1) * h;
            bool at_zero_left = cluster > 0 && pa == 0.0;
            bool at_zero_right = cluster > 0 && pb == 0.0;
            if (at_zero_left) {
                double len = pb - pa, s = std::ldexp(len, -cluster);
                out.push_back({0.0, s});
                for (int c = cluster; c >= 1; --c) out.push_back({std::ldexp(len, -c), std::ldexp(len, -c + 1)});
            } else if (at_zero_right) {
                double len = pb - pa;
                for (int c = 1; c <= cluster; ++c) out.push_back({-std::ldexp(len, -c + 1), -std::ldexp(len, -c)});
                out.push_back({-std::ldexp(len, -cluster), 0.0});
            } else {
                out.push_back({pa, pb});
            }
        }
    }
    return out;
}

inline void append_nodes(const Panel& P, const Rule& r, std::vector<double>& xs, std::vector<double>& ws)
{
    double c = 0.5 * (P.a + P.b), h = 0.5 * (P.b - P.a);
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        xs.push_back(c + h * r.x[i]);
        ws.push_back(h * r.w[i]);
    }
}

struct Line {
    std::vector<double> x, w;
};

inline Line make_line(double lo, double hi, const Resolution& res, int depth,
                      const std::vector<double>& breaks = {})
{
    Line l;
    const Rule& r = gauss_legendre(res.order);
    double width = std::ldexp(res.panel_width, -depth);
    int cluster = res.zero_cluster > 0 ? res.zero_cluster + 2 * depth : 0;
    for (const auto& P : make_panels(lo, hi, width, cluster, breaks)) append_nodes(P, r, l.x, l.w);
    return l;
}

inline QuadratureGrid real_grid(double lo, double hi, const Resolution& res, int depth)
{
    QuadratureGrid g;
    g.domain = Domain::RealLine;
    g.resolution = res;
    g.depth = depth;
    Line l = make_line(lo, hi, res, depth);
    for (std::size_t i = 0; i < l.x.size(); ++i) g.nodes.emplace_back(l.x[i], 0.0), g.weights.push_back(l.w[i]);
    return g;
}

inline QuadratureGrid halfplane_grid(double X, double Y, const Resolution& res, int depth)
{
    QuadratureGrid g;
    g.domain = Domain::HalfPlane;
    g.resolution = res;
    g.depth = depth;
    Resolution ry = res;
    ry.zero_cluster = 0;
    Line lx = make_line(-X, X, res, depth), ly = make_line(0.0, Y, ry, depth);
    for (std::size_t i = 0; i < lx.x.size(); ++i)
        for (std::size_t j = 0; j < ly.x.size(); ++j) {
            g.nodes.emplace_back(lx.x[i], ly.x[j]);
            g.weights.push_back(lx.w[i] * ly.w[j]);
        }
    return g;
}

template <class F>
cplx apply(const QuadratureGrid& g, F&& f)
{
    cplx acc = 0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if constexpr (std::is_invocable_v<F&, cplx>)
            acc += g.weights[i] * cplx(f(g.nodes[i]));
        else
            acc += g.weights[i] * cplx(f(g.nodes[i].real()));
    }
    evaluation_counter() += g.nodes.size();
    return acc;
}

// smallest X with |f| below tail*peak on every probe beyond X
template <class F>
double detect_extent(F&& probe, double step = 0.25, double max_x = 60.0, double tail = 1e-22)
{
    double peak = 0;
    std::vector<double> vals;
    for (double x = 0; x <= max_x; x += step) {
        double v = probe(x);
        vals.push_back(v);
        peak = std::max(peak, v);
    }
    if (peak == 0) return step;
    for (std::size_t k = vals.size(); k-- > 0;)
        if (vals[k] >= tail * peak) return std::min(max_x, (k + 2) * step);
    return step;
}

template <class F>
Estimate refine(F&& at_depth, const Resolution& res, const char* what)
{
    cplx prev = at_depth(0);
    Estimate e{prev, std::abs(prev), 0};
    for (int d = 1; d <= res.max_depth; ++d) {
        cplx cur = at_depth(d);
        double err = std::abs(cur - prev);
        e = {cur, err, d};
        if (err <= std::max(res.rel_tol * std::abs(cur), res.abs_tol)) return e;
        prev = cur;
    }
    throw QuadratureError(std::string(what) + ": no convergence after max subdivisions (best " +
                              std::to_string(std::abs(e.value)) + ", residual " + std::to_string(e.error) + ")",
                          e);
}

template <class F>
Estimate integrate_real(F&& f, const Resolution& res = {})
{
    double X = res.extent;
    if (X <= 0) {
        auto probe = [&](double x) { return std::max(std::abs(cplx(f(x))), std::abs(cplx(f(-x)))); };
        X = detect_extent(probe);
    }
    return refine([&](int d) { return apply(real_grid(-X, X, res, d), f); }, res, "integrate_real");
}

// integral over [lo, hi] (no extent detection)
template <class F>
Estimate integrate_interval(F&& f, double lo, double hi, const Resolution& res = {})
{
    return refine([&](int d) { return apply(real_grid(lo, hi, res, d), f); }, res, "integrate_interval");
}

template <class F>
Estimate integrate_halfplane(F&& f, const Resolution& res = {})
{
    double X = res.extent, Y = res.extent_y;
    if (X <= 0) {
        auto probe = [&](double x) {
            double m = 0;
            for (double y : {0.25, 0.5, 1.0, 2.0})
                m = std::max({m, std::abs(cplx(f(cplx(x, y)))), std::abs(cplx(f(cplx(-x, y))))});
            return m;
        };
        X = detect_extent(probe);
    }
    if (Y <= 0) {
        auto probe = [&](double y) {
            double m = 0;
            for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) m = std::max(m, std::abs(cplx(f(cplx(x, y)))));
            return m;
        };
        Y = detect_extent(probe);
    }
    return refine([&](int d) { return apply(halfplane_grid(X, Y, res, d), f); }, res, "integrate_halfplane");
}

struct Validation {
    bool ok = true;
    std::string reason;
    explicit operator bool() const { return ok; }
};

namespace detail {

// top-degree analysis on the real line for exponent -g x^2 + m V(x,t)
inline Validation real_line_ok(const CouplingSeq& t, double g, double m)
{
    int K = t.degree();
    if (K > 2) {
        if (K % 2) return {false, "odd top degree " + std::to_string(K) + " of V(x,t) grows at infinity"};
        if (t[K] >= 0) return {false, "top coefficient t_" + std::to_string(K) + " is not negative"};
        return {};
    }
    if (K == 2 && -g + m * t[2] >= 0) return {false, "t_2 cancels the Gaussian decay"};
    return {};
}

// exponent -gx x^2 - gy y^2 + m Re V(z,t)
inline Validation plane_ok(const CouplingSeq& t, double gx, double gy, double m)
{
    int K = t.degree();
    if (K > 2) return {false, "Re z^" + std::to_string(K) + " is unbounded above in the plane"};
    if (K == 2 && (-gx + m * t[2] >= 0 || -gy - m * t[2] >= 0))
        return {false, "t_2 cancels the Gaussian decay in the plane"};
    return {};
}

inline Validation zero_ok(const CouplingSeq& s, int L)
{
    if (s.is_zero()) {
        if (L < 0) return {false, "L < 0 with s = 0 leaves a pole at 0"};
        return {};
    }
    int K = s.degree();
    if (K % 2) return {false, "odd top index " + std::to_string(K) + " of V(1/x,s) blows up at 0"};
    if (s[K] <= 0) return {false, "top coefficient s_" + std::to_string(K) + " is not positive"};
    return {};
}

} // namespace detail

inline Validation convergence_validate(EnsembleKind kind, const CouplingSeq& t, const CouplingSeq& s, int L)
{
    using detail::plane_ok;
    using detail::real_line_ok;
    Validation v;
    switch (kind) {
    case EnsembleKind::OE: v = real_line_ok(t, 0.5, 1.0); break;
    case EnsembleKind::SE: v = real_line_ok(t, 1.0, 2.0); break;
    case EnsembleKind::GinOE:
        v = real_line_ok(t, 0.5, 1.0);
        if (v) v = plane_ok(t, 1.0, 1.0, 2.0);
        break;
    case EnsembleKind::GinSE:
    case EnsembleKind::GinUE: v = plane_ok(t, 1.0, 1.0, 2.0); break;
    }
    if (!v) return v;
    bool complex_kind = kind == EnsembleKind::GinOE || kind == EnsembleKind::GinSE || kind == EnsembleKind::GinUE;
    if (complex_kind && !s.is_zero())
        return {false, "s != 0 makes e^{-2Re V(1/z,s)} unbounded near 0 in the plane"};
    return detail::zero_ok(s, L);
}

// GinUE: weight e^{V(z,t)+V(zbar,t')-|z|^2}, insertions z^{L1} zbar^{-L2}
inline Validation validate_ginue(const EnsembleSpec& e)
{
    if (!e.s.is_zero() || !e.s_prime.is_zero())
        return {false, "s, s' != 0 not supported for the complex Ginibre bimoments"};
    int K = std::max(e.t.degree(), e.t_prime.degree());
    if (K > 2) return {false, "deformation degree above 2 is unbounded in the plane"};
    if (std::abs(e.t[2] + e.t_prime[2]) >= 1.0) return {false, "|t_2 + t'_2| >= 1 cancels the Gaussian decay"};
    if (e.L1 < 0 || e.L2 > 0) return {false, "L1 >= 0 and L2 <= 0 required without s-regularization"};
    return {};
}

inline Validation validate(const EnsembleSpec& e)
{
    if (e.N < 0) return {false, "N must be nonnegative"};
    if (e.alpha < 0 || e.alpha > 1 || e.beta < 0 || e.beta > 1) return {false, "alpha, beta must lie in [0,1]"};
    if (e.kind == EnsembleKind::GinUE) return validate_ginue(e);
    return convergence_validate(e.kind, e.t, e.s, e.L);
}

inline void require_valid(const EnsembleSpec& e)
{
    auto v = validate(e);
    if (!v) throw ValidationError("rejected parameters: " + v.reason);
}

} // namespace rmtau::quad
