#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "moments.hpp"
#include "partitions.hpp"
#include "skewlin.hpp"
#include "symfun.hpp"

namespace rmtau {

namespace detail {

// Neumaier summation, real and imaginary parts separately
struct CompensatedSum {
    double sr = 0, cr = 0, si = 0, ci = 0;
    static void add(double& s, double& c, double v)
    {
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    void operator+=(cplx v)
    {
        add(sr, cr, v.real());
        add(si, ci, v.imag());
    }
    cplx value() const { return {sr + cr, si + ci}; }
};

} // namespace detail

struct TauApprox {
    EnsembleSpec spec;
    int W = 0;
    int charge = 0;
    int L = 0;
    std::vector<Partition> partitions;  // canonical order
    std::vector<cplx> coeffs;

    template <class T>
    cplx evaluate(const Coupling<T>& t) const
    {
        int top = W + charge + 1;
        SchurEvaluator<T> ev(t, top);
        detail::CompensatedSum acc;
        for (std::size_t i = 0; i < partitions.size(); ++i) {
            if (coeffs[i] == 0.0) continue;
            acc += coeffs[i] * cplx(ev(partitions[i]));
        }
        return acc.value();
    }
};

inline TauApprox tau_from_pair(const SkewPair& pair, const EnsembleSpec& spec, int charge, int W)
{
    if (W < 0) throw std::invalid_argument("tau_series: W must be nonnegative");
    TauApprox T;
    T.spec = spec;
    T.W = W;
    T.charge = charge;
    T.L = spec.L;
    T.partitions = enumerate_partitions(W, charge);
    T.coeffs.reserve(T.partitions.size());
    for (const auto& lam : T.partitions) T.coeffs.push_back(abar(shifted_indices(lam, charge), spec.L, pair));
    return T;
}

inline TauApprox tau_series(const EnsembleSpec& spec, int W, const MomentProvider& moments = default_moments())
{
    quad::require_valid(spec);
    int charge = spec.charge();
    SkewPair pair = moments(spec, required_table_size(W, charge, spec.L));
    return tau_from_pair(pair, spec, charge, W);
}

// taus at charges lo..hi sharing one moment table; negative charges are identically zero
struct TauFamily {
    std::map<int, TauApprox> by_charge;

    template <class T>
    cplx operator()(int charge, const Coupling<T>& t) const
    {
        if (charge < 0) return 0.0;
        auto it = by_charge.find(charge);
        if (it == by_charge.end()) throw std::out_of_range("TauFamily: charge not built");
        return it->second.evaluate(t);
    }
};

inline TauFamily tau_family(const EnsembleSpec& spec, int W, int lo, int hi,
                            const MomentProvider& moments = default_moments())
{
    quad::require_valid(spec);
    SkewPair pair = moments(spec, required_table_size(W, hi, spec.L));
    TauFamily F;
    for (int c = std::max(0, lo); c <= hi; ++c) F.by_charge.emplace(c, tau_from_pair(pair, spec, c, W));
    return F;
}

enum class Group { Orthogonal, Symplectic };

inline std::string to_string(Group g) { return g == Group::Orthogonal ? "orthogonal" : "symplectic"; }

// Orthogonal: lambda even, l <= N.  Symplectic (Sp(2n), N = n): conjugate even, l <= 2n.
inline bool group_predicate(Group g, const Partition& lam, int N)
{
    if (g == Group::Orthogonal) return lam.length() <= N && lam.all_parts_even();
    return lam.length() <= 2 * N && conjugate(lam).all_parts_even();
}

inline double group_series(Group g, int N, const CouplingSeq& t, int W)
{
    if (W < 0) throw std::invalid_argument("group_series: W must be nonnegative");
    SchurEvaluator<double> ev(t, 2 * W + 2);
    detail::CompensatedSum acc;
    for (const auto& lam : enumerate_partitions(W, W))
        if (group_predicate(g, lam, N)) acc += ev(lam);
    return acc.value().real();
}

struct HirotaReport {
    std::array<cplx, 4> terms{};  // three left terms, right side
    cplx residual{};
    double max_term = 0;
    double relative = 0;
};

// -b/(a-b) tN(t+[1/b]) tN+1(t+[1/a]) - a/(b-a) tN(t+[1/a]) tN+1(t+[1/b])
//   + 1/(ab) tN+2(t+[1/a]+[1/b]) tN-1(t)  =  tN+1(t+[1/a]+[1/b]) tN(t)
template <class Tau>
HirotaReport hirota_residual(const Tau& tau, int N, const CouplingSeq& t, cplx a, cplx b, int K)
{
    if (a == b) throw std::invalid_argument("Hirota shift points must be distinct");
    if (a == 0.0 || b == 0.0) throw std::invalid_argument("Hirota shift points must be nonzero");
    K = std::max(K, t.order());
    ComplexCoupling tc = t.cast<cplx>().resized(K);
    auto ta = bracket_shift(tc, +1, 1.0 / a, K);
    auto tb = bracket_shift(tc, +1, 1.0 / b, K);
    auto tab = bracket_shift(ta, +1, 1.0 / b, K);
    HirotaReport r;
    r.terms[0] = -b / (a - b) * tau(N, tb) * tau(N + 1, ta);
    r.terms[1] = -a / (b - a) * tau(N, ta) * tau(N + 1, tb);
    r.terms[2] = 1.0 / (a * b) * tau(N + 2, tab) * tau(N - 1, tc);
    r.terms[3] = tau(N + 1, tab) * tau(N, tc);
    r.residual = r.terms[0] + r.terms[1] + r.terms[2] - r.terms[3];
    for (auto v : r.terms) r.max_term = std::max(r.max_term, std::abs(v));
    r.relative = r.max_term > 0 ? std::abs(r.residual) / r.max_term : std::nan("");
    return r;
}

struct WaveReport {
    int degree = 0;
    std::vector<cplx> samples;       // lambda^deg tau(t - [1/lambda]) / tau(t)
    std::vector<cplx> coefficients;  // fitted, increasing powers of lambda
    double deviation = 0;            // max |fit - sample| / max |sample|
    cplx leading{};                  // coefficient of lambda^deg, 1 in exact arithmetic
};

inline WaveReport wave_polynomial_check(const TauApprox& tau, const CouplingSeq& t, const std::vector<cplx>& lambdas)
{
    const int deg = tau.charge;
    int K = std::max(t.order(), tau.W + tau.charge + 1);
    ComplexCoupling tc = t.cast<cplx>().resized(K);
    cplx base = tau.evaluate(tc);
    if (std::abs(base) < 1e-12) throw std::domain_error("tau vanishes at base point");
    WaveReport r;
    r.degree = deg;
    for (cplx lam : lambdas) {
        auto ts = bracket_shift(tc, -1, 1.0 / lam, K);
        r.samples.push_back(std::pow(lam, deg) * tau.evaluate(ts) / base);
    }
    const int n = static_cast<int>(lambdas.size());
    const int cols = std::min(deg + 1, n);
    Eigen::MatrixXcd V(n, cols);
    Eigen::VectorXcd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < cols; ++j) V(i, j) = std::pow(lambdas[i], j);
        y(i) = r.samples[i];
    }
    Eigen::VectorXcd c = V.colPivHouseholderQr().solve(y);
    Eigen::VectorXcd fit = V * c;
    double ymax = y.cwiseAbs().maxCoeff();
    r.deviation = ymax > 0 ? (fit - y).cwiseAbs().maxCoeff() / ymax : 0.0;
    for (int j = 0; j < cols; ++j) r.coefficients.push_back(c(j));
    if (cols == deg + 1) r.leading = c(deg);
    return r;
}

} // namespace rmtau
