#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rmtau::fock {

using cplx = std::complex<double>;

// modes lo <= i < hi are dynamical; below lo frozen occupied, from hi up frozen empty
struct FockWindow {
    int lo = -8, hi = 8;

    FockWindow() = default;
    FockWindow(int l, int h) : lo(l), hi(h)
    {
        if (!(lo < 0 && 0 <= hi)) throw std::invalid_argument("FockWindow: need lo < 0 <= hi");
        if (hi - lo > 64) throw std::invalid_argument("FockWindow: at most 64 dynamical modes");
    }
    int width() const { return hi - lo; }
    bool contains(int i) const { return i >= lo && i < hi; }
    std::uint64_t bit(int i) const { return std::uint64_t(1) << (i - lo); }
};

inline constexpr double prune_threshold = 1e-15;

class FockVector {
public:
    explicit FockVector(FockWindow w) : win_(w) {}

    const FockWindow& window() const { return win_; }
    const std::map<std::uint64_t, cplx>& amplitudes() const { return amp_; }
    bool is_zero() const { return amp_.empty(); }

    void add(std::uint64_t state, cplx v)
    {
        if (v == 0.0) return;
        auto& a = amp_[state];
        a += v;
        if (std::abs(a) < prune_threshold) amp_.erase(state);
    }
    cplx at(std::uint64_t state) const
    {
        auto it = amp_.find(state);
        return it == amp_.end() ? cplx(0) : it->second;
    }

    // occupied count minus the sea baseline (-lo)
    int charge_of(std::uint64_t state) const { return std::popcount(state) + win_.lo; }

    FockVector& operator+=(const FockVector& o)
    {
        for (const auto& [s, v] : o.amp_) add(s, v);
        return *this;
    }
    FockVector operator*(cplx c) const
    {
        FockVector r(win_);
        for (const auto& [s, v] : amp_) r.add(s, v * c);
        return r;
    }

private:
    FockWindow win_;
    std::map<std::uint64_t, cplx> amp_;
};

inline std::uint64_t vacuum_state(int L, const FockWindow& w)
{
    if (L < w.lo || L > w.hi) throw std::invalid_argument("charged_vacuum: window too small for charge " + std::to_string(L));
    std::uint64_t s = 0;
    for (int i = w.lo; i < L; ++i) s |= w.bit(i);
    return s;
}

inline FockVector charged_vacuum(int L, const FockWindow& w)
{
    FockVector v(w);
    v.add(vacuum_state(L, w), 1.0);
    return v;
}

enum class Op { Psi, PsiDag, Phi };

struct ModeOp {
    Op op;
    int mode = 0;
};

namespace detail {
// (-1)^{# occupied modes above i}
inline double sign_above(std::uint64_t state, int i, const FockWindow& w)
{
    int k = i - w.lo + 1;
    std::uint64_t above = k >= 64 ? 0 : (state >> k);
    return std::popcount(above) % 2 ? -1.0 : 1.0;
}
} // namespace detail

inline FockVector apply(const ModeOp& o, const FockVector& v)
{
    const auto& w = v.window();
    FockVector r(w);
    if (o.op == Op::Phi) {
        for (const auto& [s, a] : v.amplitudes()) r.add(s, a * ((v.charge_of(s) % 2 ? -1.0 : 1.0) / std::sqrt(2.0)));
        return r;
    }
    if (!w.contains(o.mode)) throw std::out_of_range("fock apply: mode " + std::to_string(o.mode) + " outside window");
    std::uint64_t b = w.bit(o.mode);
    for (const auto& [s, a] : v.amplitudes()) {
        bool occ = s & b;
        if (o.op == Op::Psi && !occ) r.add(s | b, a * detail::sign_above(s, o.mode, w));
        if (o.op == Op::PsiDag && occ) r.add(s & ~b, a * detail::sign_above(s, o.mode, w));
    }
    return r;
}

// sum_m v_m psi_m + sum_m u_m psi^dag_m + c phi
struct LinearForm {
    std::map<int, cplx> psi, psid;
    cplx phi = 0;

    LinearForm& operator+=(const LinearForm& o)
    {
        for (auto [m, c] : o.psi) psi[m] += c;
        for (auto [m, c] : o.psid) psid[m] += c;
        phi += o.phi;
        return *this;
    }
};

inline LinearForm mode(Op op, int m, cplx c = 1.0)
{
    LinearForm f;
    if (op == Op::Psi) f.psi[m] = c;
    if (op == Op::PsiDag) f.psid[m] = c;
    if (op == Op::Phi) f.phi = c;
    return f;
}

// psi(z) = sum_i psi_i z^i over the window
inline LinearForm psi_field(cplx z, const FockWindow& w)
{
    LinearForm f;
    for (int i = w.lo; i < w.hi; ++i) f.psi[i] = std::pow(z, i);
    return f;
}

// psi^dag(z) = sum_i psi^dag_{-i-1} z^i over the window
inline LinearForm psid_field(cplx z, const FockWindow& w)
{
    LinearForm f;
    for (int m = w.lo; m < w.hi; ++m) f.psid[m] = std::pow(z, -m - 1);
    return f;
}

inline FockVector apply(const LinearForm& f, const FockVector& v)
{
    FockVector r(v.window());
    for (auto [m, c] : f.psi)
        if (c != 0.0) r += apply(ModeOp{Op::Psi, m}, v) * c;
    for (auto [m, c] : f.psid)
        if (c != 0.0) r += apply(ModeOp{Op::PsiDag, m}, v) * c;
    if (f.phi != 0.0) r += apply(ModeOp{Op::Phi, 0}, v) * f.phi;
    return r;
}

// sum_k c_k f_k g_k
struct Bilinear {
    std::vector<std::pair<cplx, std::pair<LinearForm, LinearForm>>> terms;
};

using WordItem = std::variant<LinearForm, Bilinear>;

inline FockVector apply(const WordItem& item, const FockVector& v)
{
    if (auto f = std::get_if<LinearForm>(&item)) return apply(*f, v);
    const auto& q = std::get<Bilinear>(item);
    FockVector r(v.window());
    for (const auto& [c, fg] : q.terms) r += apply(fg.first, apply(fg.second, v)) * c;
    return r;
}

// <bra| w_1 ... w_n |ket>, rightmost item acts first
inline cplx vev(int bra_charge, const std::vector<WordItem>& word, int ket_charge, const FockWindow& w)
{
    FockVector v = charged_vacuum(ket_charge, w);
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        v = fock::apply(*it, v);
        if (v.is_zero()) return 0.0;
    }
    if (bra_charge < w.lo || bra_charge > w.hi) throw std::out_of_range("vev: bra charge outside window");
    return v.at(vacuum_state(bra_charge, w));
}

} // namespace rmtau::fock
