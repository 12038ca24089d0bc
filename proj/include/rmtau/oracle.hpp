#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "moments.hpp"
#include "tauseries.hpp"

namespace rmtau {

enum class OracleMethod { Quadrature, MonteCarlo, ExactDiscrete };

struct OracleResult {
    cplx value{};
    double error = 0;
    OracleMethod method = OracleMethod::Quadrature;
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;
};

namespace detail {

struct ChamberLevel {
    std::vector<quad::Panel> panels;
    std::vector<std::vector<double>> x, wf;  // per full panel: nodes, quadrature weight * factor
};

// int_{x_1 > ... > x_N} leaf(x) prod f(x_i) over [-X, X]
template <class F, class Leaf>
cplx chamber(int N, F&& f, Leaf&& leaf, double X, const quad::Resolution& res, int depth)
{
    if (N == 0) return leaf(nullptr);
    const quad::Rule& r = quad::gauss_legendre(res.order);
    double width = std::ldexp(res.panel_width, -depth);
    int cluster = res.zero_cluster > 0 ? res.zero_cluster + 2 * depth : 0;
    ChamberLevel C;
    C.panels = quad::make_panels(-X, X, width, cluster);
    const int P = static_cast<int>(C.panels.size());
    C.x.resize(P);
    C.wf.resize(P);
    std::uint64_t evals = 0;
    for (int k = 0; k < P; ++k) {
        std::vector<double> ws;
        quad::append_nodes(C.panels[k], r, C.x[k], ws);
        for (std::size_t i = 0; i < ws.size(); ++i) C.wf[k].push_back(ws[i] * f(C.x[k][i]));
        evals += ws.size();
    }
    std::vector<double> xs(N);
    cplx acc = 0;
    std::function<void(int, int, double, double)> rec = [&](int level, int kcap, double xcap, double prod) {
        if (level == N) {
            acc += prod * cplx(leaf(xs.data()));
            return;
        }
        for (int k = 0; k < kcap; ++k)
            for (std::size_t i = 0; i < C.x[k].size(); ++i) {
                if (C.wf[k][i] == 0) continue;
                xs[level] = C.x[k][i];
                rec(level + 1, k, C.x[k][i], prod * C.wf[k][i]);
            }
        if (kcap < P) {
            std::vector<double> px, pw;
            quad::append_nodes({C.panels[kcap].a, xcap}, r, px, pw);
            for (std::size_t i = 0; i < px.size(); ++i) {
                double v = pw[i] * f(px[i]);
                ++evals;
                if (v == 0) continue;
                xs[level] = px[i];
                rec(level + 1, kcap, px[i], prod * v);
            }
        }
    };
    rec(0, P, X, 1.0);
    quad::evaluation_counter() += evals;
    return acc;
}

inline double vandermonde(const double* x, int N)
{
    double d = 1;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) d *= x[i] - x[j];
    return d;
}

// abs Vandermonde of a point set
inline double abs_vandermonde(const std::vector<cplx>& z)
{
    double d = 1;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j) d *= std::abs(z[i] - z[j]);
    return d;
}

inline quad::Resolution oracle_resolution(const EnsembleSpec& e)
{
    quad::Resolution r;
    r.rel_tol = 1e-10;
    r.order = 12;
    r.panel_width = 1.0;
    r.max_depth = 3;
    if (!e.s.is_zero()) r.zero_cluster = 10;
    return r;
}

inline double max_abs(const std::vector<double>& p)
{
    double m = 0;
    for (double v : p) m = std::max(m, std::abs(v));
    return m;
}

// Gauss-Hermite line for weight e^{-a x^2 + b x}: nodes and weights (weight folded in)
inline quad::Line hermite_line(double a, double b, int n)
{
    const quad::Rule& r = quad::gauss_hermite(n);
    quad::Line l;
    double sa = std::sqrt(a), x0 = b / (2 * a), c = std::exp(b * b / (4 * a)) / sa;
    for (int i = 0; i < n; ++i) {
        double u = r.x[i];
        // r.w includes e^{u^2}; undo it, the Gaussian is exact here
        l.x.push_back(u / sa + x0);
        l.w.push_back(r.w[i] * std::exp(-u * u) * c);
    }
    return l;
}

} // namespace detail

// Per-eigenvalue insertion g(lambda); complex eigenvalues of a conjugate pair receive g(z) g(zbar).
using Insertion = std::function<cplx(cplx)>;

inline OracleResult eigen_integral(const EnsembleSpec& e, const Insertion& ins = nullptr, double max_extent = 0)
{
    quad::require_valid(e);
    const int N = e.N, L = e.L;
    auto res = detail::oracle_resolution(e);
    auto g = [&](double x) -> double { return ins ? ins(cplx(x, 0)).real() : 1.0; };
    auto clamp = [&](double X) { return max_extent > 0 ? std::min(X, max_extent) : X; };
    OracleResult out;
    out.method = OracleMethod::Quadrature;

    switch (e.kind) {
    case EnsembleKind::OE: {
        if (N > 3) throw std::invalid_argument("eigen_integral: N <= 3 for OE");
        auto f = [&](double x) { return std::pow(x, L) * Weights::oe(x, e.t, e.s) * g(x); };
        double X = clamp(detail::line_extent([&](double x) { return Weights::oe(x, e.t, e.s); }, 2 * N + L + 2));
        auto leaf = [&](const double* x) { return detail::vandermonde(x, N); };
        auto est = quad::refine([&](int d) { return detail::chamber(N, f, leaf, X, res, d); }, res, "OE oracle");
        out.value = est.value;
        out.error = est.error;
        return out;
    }
    case EnsembleKind::SE: {
        if (N > 3) throw std::invalid_argument("eigen_integral: N <= 3 for SE");
        auto f = [&](double x) {
            double gx = g(x);
            return std::pow(x, 2 * L) * Weights::se(x, e.t, e.s) * gx * gx;
        };
        double X = clamp(detail::line_extent([&](double x) { return Weights::se(x, e.t, e.s); }, 4 * N + 2 * L + 2));
        auto leaf = [&](const double* x) {
            double v = detail::vandermonde(x, N);
            return v * v * v * v;
        };
        double fact = (N == 3) ? 6 : (N == 2 ? 2 : 1);
        auto est = quad::refine([&](int d) { return fact * detail::chamber(N, f, leaf, X, res, d); }, res,
                                "SE oracle");
        out.value = est.value;
        out.error = est.error;
        return out;
    }
    case EnsembleKind::GinOE: {
        if (N > 2) throw std::invalid_argument("eigen_integral: N <= 2 for GinOE");
        auto f = [&](double x) { return std::pow(x, L) * Weights::oe(x, e.t, e.s) * g(x); };
        double X = clamp(detail::line_extent([&](double x) { return Weights::oe(x, e.t, e.s); }, 2 * N + L + 2));
        auto leaf = [&](const double* x) { return detail::vandermonde(x, N); };
        auto real = quad::refine([&](int d) { return detail::chamber(N, f, leaf, X, res, d); }, res,
                                 "GinOE real sector");
        out.value = std::pow(e.beta, (N + 1) / 2) * real.value;
        out.error = real.error;
        if (N == 2 && e.alpha != 0) {
            auto wc = [&](cplx z) {
                cplx gi = ins ? ins(z) * ins(std::conj(z)) : cplx(1.0);
                return 2.0 * z.imag() * std::pow(std::norm(z), L) * Weights::ginoe_c(z, e.t, e.s) * gi;
            };
            auto [Xc, Yc] = detail::plane_extents([&](cplx z) { return Weights::ginoe_c(z, e.t, e.s); }, 2 * L + 3);
            quad::Resolution rc = res;
            rc.zero_cluster = 0;
            rc.extent = clamp(Xc);
            rc.extent_y = Yc;
            auto cpx = quad::integrate_halfplane(wc, rc);
            out.value += e.alpha * cpx.value;
            out.error += e.alpha * cpx.error;
        }
        return out;
    }
    case EnsembleKind::GinSE: {
        if (N > 3) throw std::invalid_argument("eigen_integral: N <= 3 for GinSE");
        // integrand over C^N (reflection y -> -y leaves it invariant), divided by 2^N.
        // Gaussian part e^{-(1-2t2)x^2 + 2t1 x - (1+2t2) y^2} is integrated exactly by scaled Gauss-Hermite.
        double t1 = e.t[1], t2 = e.t[2];
        auto poly = [&](const std::vector<cplx>& z) {
            double v = 1;
            for (std::size_t i = 0; i < z.size(); ++i) {
                double y2 = 2 * z[i].imag();
                v *= y2 * y2 * std::pow(std::norm(z[i]), L);
                for (std::size_t j = i + 1; j < z.size(); ++j)
                    v *= std::norm(z[i] - z[j]) * std::norm(z[i] - std::conj(z[j]));
            }
            return v;
        };
        auto run = [&](int n) {
            auto lx = detail::hermite_line(1 - 2 * t2, 2 * t1, n);
            auto ly = detail::hermite_line(1 + 2 * t2, 0.0, n);
            std::vector<cplx> pts;
            std::vector<double> pw;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    pts.emplace_back(lx.x[i], ly.x[j]);
                    pw.push_back(lx.w[i] * ly.w[j]);
                }
            const std::size_t m = pts.size();
            std::vector<cplx> gi(m, 1.0);
            if (ins)
                for (std::size_t k = 0; k < m; ++k) gi[k] = ins(pts[k]) * ins(std::conj(pts[k]));
            cplx acc = 0;
            std::vector<cplx> z(N);
            std::vector<std::size_t> idx(N, 0);
            // odometer over C^N
            std::uint64_t count = 0;
            while (true) {
                double w = 1;
                cplx gg = 1;
                for (int a = 0; a < N; ++a) {
                    z[a] = pts[idx[a]];
                    w *= pw[idx[a]];
                    gg *= gi[idx[a]];
                }
                acc += w * poly(z) * gg;
                ++count;
                int a = 0;
                while (a < N && ++idx[a] == m) idx[a++] = 0;
                if (a == N) break;
            }
            quad::evaluation_counter() += count;
            return acc / std::pow(2.0, N);
        };
        int n = ins ? 20 : 2 * N + L + 4;
        if (N == 3 && ins) n = 12;
        cplx v1 = run(n), v2 = run(n + 6);
        out.value = v2;
        out.error = std::abs(v2 - v1);
        return out;
    }
    default: throw std::invalid_argument("eigen_integral: unsupported kind");
    }
}

// Insertion prod_i det(1 - p_i X)^{-1}, with the determinant of the full matrix realization
inline OracleResult det_average_lhs(const EnsembleSpec& e, const std::vector<double>& p)
{
    if (p.empty()) return eigen_integral(e);
    Insertion ins = [p](cplx z) {
        cplx v = 1;
        for (double q : p) v /= (1.0 - q * z);
        return v;
    };
    double pole = 1.0 / detail::max_abs(p);
    return eigen_integral(e, ins, 0.97 * pole);
}

// GinUE: int_{C^N} |Delta|^2 prod z^{L1} zbar^{-L2} e^{V(z,t)+V(zbar,t')-|z|^2} d^2z, N <= 2
inline OracleResult ginue_eigen_integral(const EnsembleSpec& e)
{
    if (e.kind != EnsembleKind::GinUE) throw std::invalid_argument("ginue_eigen_integral: kind must be GinUE");
    quad::require_valid(e);
    if (e.N > 2) throw std::invalid_argument("ginue_eigen_integral: N <= 2");
    auto w = [&](cplx z) {
        return std::pow(z, e.L1) * std::pow(std::conj(z), -e.L2) *
               std::exp(potential(z, e.t) + potential(std::conj(z), e.t_prime) - std::norm(z));
    };
    double t2 = 0.5 * (e.t[2] + e.t_prime[2]);
    double t1 = 0.5 * (e.t[1] + e.t_prime[1]);
    // |w| = e^{-(1-2t2)x^2 + 2 t1 x - (1+2t2) y^2 ...}; GH on that envelope, remaining factor smooth
    auto run = [&](int n) {
        auto lx = detail::hermite_line(1 - 2 * t2, 2 * t1, n);
        auto ly = detail::hermite_line(1 + 2 * t2, 0.0, n);
        std::vector<cplx> pts, val;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx z(lx.x[i], ly.x[j]);
                double env = std::exp(-(1 - 2 * t2) * z.real() * z.real() + 2 * t1 * z.real() -
                                      (1 + 2 * t2) * z.imag() * z.imag());
                pts.push_back(z);
                val.push_back(lx.w[i] * ly.w[j] * w(z) / env);
            }
        cplx acc = 0;
        if (e.N == 1)
            for (auto v : val) acc += v;
        else
            for (std::size_t a = 0; a < pts.size(); ++a)
                for (std::size_t b = 0; b < pts.size(); ++b) acc += val[a] * val[b] * std::norm(pts[a] - pts[b]);
        quad::evaluation_counter() += pts.size() * (e.N == 1 ? 1 : pts.size());
        return acc;
    };
    OracleResult out;
    cplx v1 = run(24), v2 = run(32);
    out.value = v2;
    out.error = std::abs(v2 - v1);
    return out;
}

// ---- Haar Monte Carlo ----

struct HaarPayload {
    enum Kind { Schur, ExpTrace } kind = Schur;
    Partition lambda;
    CouplingSeq t;
    int max_power() const { return kind == Schur ? std::max(1, lambda.weight()) : std::max(1, t.order()); }
};

namespace detail {

inline Eigen::MatrixXd haar_orthogonal(int N, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Eigen::MatrixXd G(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) G(i, j) = nd(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < N; ++j)
        if (R(j, j) < 0) Q.col(j) = -Q.col(j);
    return Q;
}

// unitary symplectic 2n x 2n via quaternionic Gram-Schmidt: columns q_k and J conj(q_k)
inline Eigen::MatrixXcd haar_symplectic(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    const int m = 2 * n;
    Eigen::MatrixXcd U(m, m);
    auto Jbar = [&](const Eigen::VectorXcd& v) {
        Eigen::VectorXcd w(m);
        for (int i = 0; i < n; ++i) {
            w(i) = -std::conj(v(n + i));
            w(n + i) = std::conj(v(i));
        }
        return w;
    };
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXcd v(m);
        for (int i = 0; i < m; ++i) v(i) = cplx(nd(rng), nd(rng));
        for (int j = 0; j < k; ++j) {
            v -= U.col(j) * U.col(j).dot(v);
            v -= U.col(n + j) * U.col(n + j).dot(v);
        }
        v /= v.norm();
        U.col(k) = v;
        U.col(n + k) = Jbar(v);
    }
    return U;
}

template <class Mat>
std::vector<double> power_traces(const Mat& U, int K)
{
    std::vector<double> p(K + 1, 0.0);
    Mat P = U;
    for (int k = 1; k <= K; ++k) {
        p[k] = std::real(P.trace());
        if (k < K) P = P * U;
    }
    return p;
}

inline double payload_value(const HaarPayload& pl, const std::vector<double>& p)
{
    if (pl.kind == HaarPayload::ExpTrace) {
        double e = 0;
        for (int m = 1; m <= pl.t.order(); ++m) e += pl.t[m] * p[m];
        return std::exp(e);
    }
    std::vector<double> tv(p.size() - 1);
    for (std::size_t n = 1; n < p.size(); ++n) tv[n - 1] = p[n] / double(n);
    return schur(pl.lambda, CouplingSeq(tv));
}

} // namespace detail

// n is N for O(N) and n for Sp(2n)
inline OracleResult haar_expectation_mc(Group group, int n, const HaarPayload& payload, std::uint64_t samples,
                                        std::uint64_t seed, int shards = 4)
{
    if (samples < 1) throw std::invalid_argument("haar_expectation_mc: samples >= 1");
    shards = std::max(1, shards);
    const int K = payload.max_power();
    std::vector<double> sum(shards, 0.0), sum2(shards, 0.0);
    std::vector<std::uint64_t> cnt(shards, 0);
    auto work = [&](int s) {
        std::seed_seq sq{seed, static_cast<std::uint64_t>(s)};
        std::mt19937_64 rng(sq);
        std::uint64_t my = samples / shards + (static_cast<std::uint64_t>(s) < samples % shards ? 1 : 0);
        for (std::uint64_t i = 0; i < my; ++i) {
            std::vector<double> p;
            if (group == Group::Orthogonal)
                p = detail::power_traces(detail::haar_orthogonal(n, rng), K);
            else
                p = detail::power_traces(detail::haar_symplectic(n, rng), K);
            double v = detail::payload_value(payload, p);
            sum[s] += v;
            sum2[s] += v * v;
        }
        cnt[s] = my;
    };
    std::vector<std::thread> th;
    for (int s = 0; s < shards; ++s) th.emplace_back(work, s);
    for (auto& t : th) t.join();
    double S = 0, S2 = 0;
    std::uint64_t C = 0;
    for (int s = 0; s < shards; ++s) S += sum[s], S2 += sum2[s], C += cnt[s];
    double mean = S / C;
    double var = C > 1 ? (S2 - C * mean * mean) / (C - 1) : 0.0;
    OracleResult r;
    r.value = mean;
    r.error = std::sqrt(std::max(0.0, var) / C);
    r.method = OracleMethod::MonteCarlo;
    r.seed = seed;
    r.samples = samples;
    return r;
}

// ---- discrete measures ----

struct Atom {
    cplx point;  // Im > 0: complex atom (paired with its conjugate)
    double weight;
};

// exact constant relating the eigenvalue sum to the series for each kind
inline double series_normalization(EnsembleKind k, int N)
{
    double f = 1;
    for (int i = 2; i <= N; ++i) f *= i;
    switch (k) {
    case EnsembleKind::SE: return f * std::pow(2.0, N);
    case EnsembleKind::GinSE: return std::pow(-2.0, N);
    default: return 1.0;
    }
}

inline SkewPair atomic_moment_pair(EnsembleKind kind, const std::vector<Atom>& atoms, int base, int M, double alpha,
                                   double beta)
{
    SkewPair P;
    P.base = base;
    P.A = CMatrix::Zero(M, M);
    P.a = CVector::Zero(M);
    CVector zp, wp;
    const cplx I(0, 1);
    CMatrix C = CMatrix::Zero(M, M);
    for (const auto& x : atoms) {
        if (x.point.imag() != 0) continue;
        detail::powers(x.point, base, M, zp);
        if (kind == EnsembleKind::OE || kind == EnsembleKind::GinOE) {
            P.a += beta * x.weight * zp;
            for (const auto& y : atoms) {
                if (y.point.imag() != 0) continue;
                double sg = (x.point.real() > y.point.real()) - (x.point.real() < y.point.real());
                if (sg == 0) continue;
                detail::powers(y.point, base, M, wp);
                P.A += (beta * sg * x.weight * y.weight) * zp * wp.transpose();
            }
        } else if (kind == EnsembleKind::SE) {
            for (int n = 0; n < M; ++n)
                for (int m = 0; m < M; ++m)
                    if (n != m)
                        P.A(n, m) += beta * 0.5 * double(n - m) * x.weight *
                                     std::pow(x.point, base + n + base + m - 1);
        }
    }
    for (const auto& z : atoms) {
        if (z.point.imag() <= 0) continue;
        detail::powers(z.point, base, M, zp);
        if (kind == EnsembleKind::GinOE)
            C += z.weight * zp * zp.conjugate().transpose();
        else if (kind == EnsembleKind::GinSE)
            C += (z.weight * (z.point - std::conj(z.point))) * zp * zp.conjugate().transpose();
    }
    if (kind == EnsembleKind::GinOE) P.A += alpha * (-I) * (C - C.transpose());
    if (kind == EnsembleKind::GinSE) P.A += alpha * skew_part(C);
    P.A = skew_part(P.A);
    return P;
}

namespace detail {

template <class F>
void for_each_subset(int n, int k, F&& f)
{
    std::vector<int> idx(k);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            f(idx);
            return;
        }
        for (int i = start; i < n; ++i) {
            idx[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
}

} // namespace detail

struct DiscreteResult {
    cplx lhs, rhs;
};

// eigenvalue sum over atoms vs the Schur/Pfaffian series with atomic moments
inline DiscreteResult discrete_consistency(EnsembleKind kind, const std::vector<Atom>& atoms, int N, int L,
                                           const CouplingSeq& t, int W, double alpha = 1.0, double beta = 1.0)
{
    if (atoms.size() < 1 || atoms.size() > 8) throw std::invalid_argument("discrete_consistency: 1..8 atoms");
    if (kind == EnsembleKind::GinUE) throw std::invalid_argument("discrete_consistency: GinUE not supported");
    std::vector<Atom> reals, cpx;
    for (const auto& a : atoms) (a.point.imag() > 0 ? cpx : reals).push_back(a);
    for (const auto& a : atoms)
        if (a.point.imag() < 0) throw std::invalid_argument("discrete_consistency: complex atoms live in C+");
    // per-atom factors
    auto real_factor = [&](const Atom& a, double mult, int pw) {
        double x = a.point.real();
        return a.weight * std::pow(x, pw) * std::exp(mult * potential(x, t));
    };
    auto cpx_factor = [&](const Atom& a) {
        cplx z = a.point;
        return a.weight * std::pow(std::norm(z), L) * std::exp(2.0 * potential(z, t).real());
    };

    cplx lhs = 0;
    const int nr = static_cast<int>(reals.size()), nc = static_cast<int>(cpx.size());
    switch (kind) {
    case EnsembleKind::OE:
    case EnsembleKind::GinOE: {
        for (int k = 0; 2 * k <= N; ++k) {
            if (kind == EnsembleKind::OE && k > 0) break;
            int r = N - 2 * k;
            if (r > nr || k > nc) continue;
            double sector = std::pow(alpha, k) * std::pow(beta, (r + 1) / 2);
            detail::for_each_subset(nc, k, [&](const std::vector<int>& ci) {
                detail::for_each_subset(nr, r, [&](const std::vector<int>& ri) {
                    std::vector<cplx> pts;
                    // ordered chamber: Delta of decreasing reals is positive, use |Delta|
                    cplx w = sector;
                    for (int i : ri) {
                        pts.push_back(reals[i].point.real());
                        w *= real_factor(reals[i], 1.0, L);
                    }
                    for (int i : ci) {
                        pts.push_back(cpx[i].point);
                        pts.push_back(std::conj(cpx[i].point));
                        w *= cpx_factor(cpx[i]);
                    }
                    lhs += w * detail::abs_vandermonde(pts);
                });
            });
        }
        break;
    }
    case EnsembleKind::SE: {
        // full space over N-tuples = N! * subsets
        double fact = 1;
        for (int i = 2; i <= N; ++i) fact *= i;
        detail::for_each_subset(nr, N, [&](const std::vector<int>& ri) {
            std::vector<cplx> pts;
            double w = fact;
            for (int i : ri) {
                pts.push_back(reals[i].point.real());
                w *= real_factor(reals[i], 2.0, 2 * L);
            }
            double d = detail::abs_vandermonde(pts);
            lhs += w * d * d * d * d;
        });
        break;
    }
    case EnsembleKind::GinSE: {
        detail::for_each_subset(nc, N, [&](const std::vector<int>& ci) {
            std::vector<cplx> pts;
            double w = 1;
            for (int i : ci) {
                pts.push_back(cpx[i].point);
                pts.push_back(std::conj(cpx[i].point));
                w *= cpx_factor(cpx[i]) * 2.0 * cpx[i].point.imag();
            }
            lhs += w * detail::abs_vandermonde(pts);
        });
        break;
    }
    default: break;
    }

    EnsembleSpec spec;
    spec.kind = kind;
    spec.N = N;
    spec.L = L;
    spec.alpha = alpha;
    spec.beta = beta;
    int charge = spec.charge();
    int base = table_base(L);
    SkewPair P = atomic_moment_pair(kind, atoms, base, required_table_size(W, charge, L), alpha, beta);
    P.offset_hint = L;
    TauApprox tau = tau_from_pair(P, spec, charge, W);
    int K = std::max(t.order(), W + charge + 1);
    cplx rhs = series_normalization(kind, N) * tau.evaluate(t.resized(K));
    return {lhs, rhs};
}

} // namespace rmtau
