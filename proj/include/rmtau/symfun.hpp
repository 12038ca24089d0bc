#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "partitions.hpp"

namespace rmtau {

using cplx = std::complex<double>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

// t = (t_1, ..., t_K); order K is part of the value, entries beyond K are zero.
template <class T>
class Coupling {
public:
    Coupling() = default;
    Coupling(std::initializer_list<T> v) : v_(v) {}
    explicit Coupling(std::vector<T> v) : v_(std::move(v)) {}
    static Coupling zeros(int K) { return Coupling(std::vector<T>(K, T(0))); }

    int order() const { return static_cast<int>(v_.size()); }
    // 1-based
    T operator[](int n) const { return (n >= 1 && n <= order()) ? v_[n - 1] : T(0); }
    const std::vector<T>& values() const { return v_; }

    // highest n with t_n != 0, 0 if none
    int degree() const
    {
        for (int n = order(); n >= 1; --n)
            if (v_[n - 1] != T(0)) return n;
        return 0;
    }
    bool is_zero() const { return degree() == 0; }

    Coupling resized(int K) const
    {
        std::vector<T> w(K, T(0));
        for (int n = 1; n <= std::min(K, order()); ++n) w[n - 1] = (*this)[n];
        return Coupling(std::move(w));
    }

    template <class U>
    Coupling<U> cast() const
    {
        return Coupling<U>(std::vector<U>(v_.begin(), v_.end()));
    }

    friend Coupling operator+(const Coupling& a, const Coupling& b)
    {
        int K = std::max(a.order(), b.order());
        std::vector<T> w(K);
        for (int n = 1; n <= K; ++n) w[n - 1] = a[n] + b[n];
        return Coupling(std::move(w));
    }
    friend bool operator==(const Coupling&, const Coupling&) = default;

private:
    std::vector<T> v_;
};

using CouplingSeq = Coupling<double>;
using ComplexCoupling = Coupling<cplx>;

template <class X, class T>
auto potential(const X& x, const Coupling<T>& t)
{
    using R = decltype(X() * T());
    R acc(0);
    for (int n = t.order(); n >= 1; --n) acc = (acc + t[n]) * x;
    return acc;
}

// h_0..h_nmax via n h_n = sum_k k t_k h_{n-k}
template <class T>
std::vector<T> complete_homogeneous_table(int nmax, const Coupling<T>& t)
{
    std::vector<T> h(nmax + 1, T(0));
    h[0] = T(1);
    for (int n = 1; n <= nmax; ++n) {
        T acc(0);
        for (int k = 1; k <= std::min(n, t.order()); ++k) acc += double(k) * t[k] * h[n - k];
        h[n] = acc / double(n);
    }
    return h;
}

template <class T>
T complete_homogeneous(int n, const Coupling<T>& t)
{
    if (n < 0) throw std::invalid_argument("complete_homogeneous: n < 0");
    return complete_homogeneous_table(n, t)[n];
}

namespace detail {

// determinant by LU with partial pivoting, a is row-major n*n and gets destroyed
template <class T>
T lu_determinant(std::vector<T>& a, int n)
{
    T det(1);
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(a[k * n + k]);
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > best) best = std::abs(a[i * n + k]), piv = i;
        if (best == 0.0) return T(0);
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            det = -det;
        }
        det *= a[k * n + k];
        for (int i = k + 1; i < n; ++i) {
            T f = a[i * n + k] / a[k * n + k];
            if (f == T(0)) continue;
            for (int j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    return det;
}

} // namespace detail

// Jacobi-Trudi on a precomputed h table; h must reach lam[0] + length - 1
template <class T>
T schur_from_h(const Partition& lam, const std::vector<T>& h)
{
    const int l = lam.length();
    if (l == 0) return T(1);
    auto H = [&](int m) -> T { return (m < 0 || m >= static_cast<int>(h.size())) ? T(0) : h[m]; };
    if (lam[0] + l - 1 >= static_cast<int>(h.size()))
        throw std::invalid_argument("schur_from_h: h table too short");
    if (l == 1) return H(lam[0]);
    std::vector<T> a(l * l);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) a[i * l + j] = H(lam[i] - i + j);
    return detail::lu_determinant(a, l);
}

template <class T>
T schur(const Partition& lam, const Coupling<T>& t)
{
    if (lam.empty()) return T(1);
    auto h = complete_homogeneous_table(lam[0] + lam.length() - 1, t);
    return schur_from_h(lam, h);
}

// reuses one h table for many partitions
template <class T>
class SchurEvaluator {
public:
    SchurEvaluator(const Coupling<T>& t, int max_index) : h_(complete_homogeneous_table(max_index, t)) {}
    T operator()(const Partition& lam) const { return schur_from_h(lam, h_); }
    const std::vector<T>& h() const { return h_; }

private:
    std::vector<T> h_;
};

template <class W, class P>
struct MiwaAtom {
    W weight;
    P point;
};

// t'_n = t_n - scale (1/n) sum_i a_i p_i^n, n = 1..K
template <class T, class W, class P>
auto miwa_shift(const Coupling<T>& t, const std::vector<MiwaAtom<W, P>>& atoms, double scale, int K)
{
    using R = std::conditional_t<is_complex<T>::value || is_complex<W>::value || is_complex<P>::value,
                                 cplx, double>;
    std::vector<R> out(K);
    for (int n = 1; n <= K; ++n) {
        R acc = R(t[n]);
        for (const auto& at : atoms) acc -= R(scale / n) * R(at.weight) * R(std::pow(at.point, n));
        out[n - 1] = acc;
    }
    return Coupling<R>(std::move(out));
}

// t + sign*[a]: t_n + sign a^n / n
template <class T, class P>
auto bracket_shift(const Coupling<T>& t, int sign, P a, int K)
{
    std::vector<MiwaAtom<double, P>> at{{-double(sign), a}};
    return miwa_shift(t, at, 1.0, K);
}

inline double c_factor(const CouplingSeq& t, const CouplingSeq& s)
{
    double e = 0;
    for (int n = 1; n <= std::min(t.order(), s.order()); ++n) e += n * t[n] * s[n];
    return std::exp(e);
}

} // namespace rmtau
