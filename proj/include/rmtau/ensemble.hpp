#pragma once

#include <stdexcept>
#include <string>

#include "symfun.hpp"

namespace rmtau {

enum class EnsembleKind { OE, GinOE, SE, GinSE, GinUE };

inline std::string to_string(EnsembleKind k)
{
    switch (k) {
    case EnsembleKind::OE: return "OE";
    case EnsembleKind::GinOE: return "GinOE";
    case EnsembleKind::SE: return "SE";
    case EnsembleKind::GinSE: return "GinSE";
    case EnsembleKind::GinUE: return "GinUE";
    }
    return "?";
}

inline bool parse_kind(const std::string& s, EnsembleKind& out)
{
    for (auto k : {EnsembleKind::OE, EnsembleKind::GinOE, EnsembleKind::SE, EnsembleKind::GinSE,
                   EnsembleKind::GinUE})
        if (to_string(k) == s) {
            out = k;
            return true;
        }
    return false;
}

inline bool is_symplectic(EnsembleKind k) { return k == EnsembleKind::SE || k == EnsembleKind::GinSE; }

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::OE;
    int N = 1;
    int L = 0;
    CouplingSeq t, s;
    double alpha = 1.0, beta = 1.0;
    // GinUE only
    int L1 = 0, L2 = 0;
    CouplingSeq t_prime, s_prime;

    // Pfaffian size / fermion charge
    int charge() const { return is_symplectic(kind) ? 2 * N : N; }

    EnsembleSpec with_ts(CouplingSeq tt, CouplingSeq ss) const
    {
        EnsembleSpec e = *this;
        e.t = std::move(tt);
        e.s = std::move(ss);
        return e;
    }
    EnsembleSpec with_N(int n) const
    {
        EnsembleSpec e = *this;
        e.N = n;
        return e;
    }
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace rmtau
