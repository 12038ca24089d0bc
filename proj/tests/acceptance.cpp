// One PASS/FAIL line per acceptance criterion. Exit status counts failures that are not
// listed in `documented` below.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "rmtau/fock.hpp"
#include "rmtau/hub.hpp"
#include "rmtau/skewlin.hpp"

using namespace rmtau;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double max_imag_ratio = 0;  // collected for criterion 11
int imag_samples = 0;

void note_reality(const Verdict& v)
{
    auto it = v.metrics.find("imag_ratio");
    if (it == v.metrics.end()) return;
    max_imag_ratio = std::max(max_imag_ratio, it->second);
    ++imag_samples;
}

std::string fmt(const char* f, double x)
{
    char b[64];
    std::snprintf(b, sizeof b, f, x);
    return b;
}

CMatrix random_skew(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    CMatrix A = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            A(i, j) = cplx(g(rng), g(rng));
            A(j, i) = -A(i, j);
        }
    return A;
}

Outcome c1_pfaffian()
{
    std::mt19937_64 rng(1);
    double worst_det = 0, worst_comb = 0;
    for (int n = 2; n <= 12; n += 2)
        for (int rep = 0; rep < 20; ++rep) {
            CMatrix A = random_skew(n, rng);
            cplx pf = pfaffian(A), det = A.determinant();
            worst_det = std::max(worst_det, std::abs(pf * pf - det) / std::abs(det));
            if (n <= 8) worst_comb = std::max(worst_comb, std::abs(pf - pfaffian_combinatorial(A)) / std::max(1.0, std::abs(pf)));
        }
    return {worst_det < 1e-9 && worst_comb < 1e-12,
            "Pf^2 vs det " + fmt("%.1e", worst_det) + ", elimination vs combinatorial " + fmt("%.1e", worst_comb)};
}

Outcome c2_ginse_moments()
{
    EnsembleSpec e;
    e.kind = EnsembleKind::GinSE;
    e.N = 1;
    SkewPair P = moment_pair(e, 7);
    double mx = P.A.cwiseAbs().maxCoeff(), off = 0, ratio = 0;
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            if (std::abs(i - j) != 1) off = std::max(off, std::abs(P.A(i, j)) / mx);
    for (int m = 1; m <= 5; ++m) ratio = std::max(ratio, std::abs(P.A(m, m + 1) / P.A(m - 1, m) - double(m + 1)));
    return {off < 1e-9 && ratio < 1e-6, "off-superdiagonal " + fmt("%.1e", off) + ", ratio deviation " + fmt("%.1e", ratio)};
}

Outcome c3_series_ratios()
{
    int total = 0, passed = 0;
    double worst = 0;
    std::string failures;
    auto run = [&](EnsembleKind k, int N, int L, CouplingSeq t, CouplingSeq s, double tol) {
        Experiment x;
        x.comparison = Comparison::SeriesVsOracle;
        x.spec.kind = k;
        x.spec.N = N;
        x.spec.L = L;
        x.spec.t = t;
        x.spec.s = s;
        x.W = 12;
        x.tol = tol;
        Verdict v = run_experiment(x);
        note_reality(v);
        ++total;
        if (v.pass)
            ++passed;
        else
            failures += " " + to_string(k) + "/N" + std::to_string(N) + "/L" + std::to_string(L) + "(" + v.detail + ")";
        if (std::isfinite(v.error)) worst = std::max(worst, v.error / tol);
    };
    const CouplingSeq ta{0.3}, tb{0.1, -0.05};
    for (auto k : {EnsembleKind::OE, EnsembleKind::SE, EnsembleKind::GinSE, EnsembleKind::GinOE})
        for (int N = 1; N <= 2; ++N)
            for (int L = 0; L <= 1; ++L)
                for (const auto& t : {ta, tb}) run(k, N, L, t, {}, 1e-4);
    for (auto k : {EnsembleKind::OE, EnsembleKind::SE})
        for (int L = 0; L <= 1; ++L)
            for (const auto& t : {ta, tb}) run(k, 1, L, t, {0, 0.4}, 1e-3);
    return {passed == total, std::to_string(passed) + "/" + std::to_string(total) + " ratios within tolerance, worst error/tol " +
                                 fmt("%.2g", worst) + failures};
}

Outcome c4_anchor()
{
    Experiment x;
    x.spec.kind = EnsembleKind::SE;
    x.spec.N = 1;
    x.spec.t = {0.3};
    x.W = 12;
    x.tol = 1e-6;
    Verdict v = run_experiment(x);
    double err = std::abs(v.metrics["ratio_series"] / std::exp(0.09) - 1.0);
    return {err < 1e-6, "|R/e^{0.09} - 1| = " + fmt("%.1e", err)};
}

Outcome c5_discrete()
{
    double worst = 0;
    bool ok = true;
    for (auto k : {EnsembleKind::OE, EnsembleKind::SE, EnsembleKind::GinOE, EnsembleKind::GinSE})
        for (int N = 1; N <= 3; ++N) {
            Experiment x;
            x.comparison = Comparison::DiscreteExact;
            x.spec.kind = k;
            x.spec.N = N;
            x.spec.t = {0.15, -0.05};
            x.W = 24;
            x.tol = 1e-10;
            x.trials = 50;
            x.seed = 1000 + 10 * static_cast<int>(k) + N;
            Verdict v = run_experiment(x);
            ok = ok && v.pass;
            worst = std::max(worst, v.error);
        }
    return {ok, "worst relative mismatch over 12 x 50 configurations " + fmt("%.1e", worst)};
}

Outcome c6_kernel()
{
    bool ok = true;
    std::string d;
    for (auto k : {EnsembleKind::OE, EnsembleKind::SE}) {
        Experiment x;
        x.comparison = Comparison::KernelVsOracle;
        x.spec.kind = k;
        x.spec.N = k == EnsembleKind::SE ? 1 : 2;  // two points p <-> fermion charge 2
        x.p = {0.1, -0.1};
        x.tol = 1e-4;
        Verdict v = run_experiment(x);
        ok = ok && v.pass;
        d += " " + to_string(k) + ": err " + fmt("%.1e", v.error) + ", " + v.detail + ";";
    }
    return {ok, d};
}

Outcome c7_groups()
{
    bool ok = true;
    double worst_z = 0;
    int checked = 0;
    const std::uint64_t samples = 100000;
    for (auto g : {Group::Orthogonal, Group::Symplectic}) {
        int n = g == Group::Orthogonal ? 3 : 1;
        for (const auto& lam : enumerate_partitions(4, 4)) {
            if (lam.empty()) continue;
            HaarPayload pl;
            pl.lambda = lam;
            auto r = haar_expectation_mc(g, n, pl, samples, 42 + checked);
            double expect = group_predicate(g, lam, n) ? 1.0 : 0.0;
            double diff = std::abs(r.value.real() - expect);
            // payloads that vanish identically have zero spread; allow rounding there
            bool hit = diff <= 4 * r.error + 1e-12;
            ok = ok && hit;
            if (r.error > 0) worst_z = std::max(worst_z, diff / r.error);
            ++checked;
        }
    }
    std::string d = std::to_string(checked) + " predicate entries, worst z " + fmt("%.2f", worst_z);
    for (auto g : {Group::Orthogonal, Group::Symplectic}) {
        Experiment x;
        x.comparison = Comparison::GroupVsMC;
        x.group = g;
        x.spec.N = g == Group::Orthogonal ? 3 : 1;
        x.spec.t = {0.2};
        x.W = 8;
        x.samples = samples;
        x.tol = 3;
        Verdict v = run_experiment(x);
        ok = ok && v.pass;
        d += "; " + to_string(g) + " series z " + fmt("%.2f", v.error);
    }
    return {ok, d};
}

Outcome c8_hirota(std::map<std::string, bool>& parts)
{
    std::string d;
    bool ok = true;
    for (auto k : {EnsembleKind::SE, EnsembleKind::GinOE}) {
        Experiment x;
        x.comparison = Comparison::HirotaDecay;
        x.spec.kind = k;
        x.spec.N = k == EnsembleKind::SE ? 1 : 2;
        x.spec.t = {0.2};
        x.W_list = {8, 10, 12, 14};
        x.tol = 1;
        Verdict v = run_experiment(x);
        parts[to_string(k)] = v.pass;
        ok = ok && v.pass;
        d += " " + to_string(k) + ": " + v.detail;
        if (v.pass) {
            d += " (residuals";
            for (int W : x.W_list) d += " " + fmt("%.1e", v.metrics["relative_W" + std::to_string(W)]);
            d += ", factors";
            for (std::size_t i = 1; i < x.W_list.size(); ++i)
                d += " " + fmt("%.1f", v.metrics["factor_" + std::to_string(x.W_list[i - 1]) + "_" +
                                                 std::to_string(x.W_list[i])]);
            d += ")";
        }
        d += ";";
    }
    return {ok, d};
}

Outcome c9_fock()
{
    using namespace rmtau::fock;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    FockWindow w(-6, 10);
    double vdm = 0;
    for (int N = 2; N <= 3; ++N)
        for (int L = 0; L <= 2; ++L)
            for (int rep = 0; rep < 5; ++rep) {
                std::vector<cplx> z(N);
                for (auto& x : z) x = cplx(g(rng), g(rng)) * 0.7;
                std::vector<WordItem> word;
                for (int i = 0; i < N; ++i) word.push_back(psi_field(z[i], w));
                cplx lhs = vev(N + L, word, L, w), rhs = 1;
                for (int i = 0; i < N; ++i) {
                    rhs *= std::pow(z[i], L);
                    for (int j = i + 1; j < N; ++j) rhs *= z[i] - z[j];
                }
                vdm = std::max(vdm, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
    FockWindow s(-4, 4);
    double wick = 0;
    for (int n : {4, 6})
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<LinearForm> f(n);
            for (auto& x : f) {
                for (int m = -3; m < 3; ++m) x.psi[m] = cplx(g(rng), g(rng)), x.psid[m] = cplx(g(rng), g(rng));
                x.phi = cplx(g(rng), g(rng));
            }
            std::vector<WordItem> word(f.begin(), f.end());
            CMatrix A = CMatrix::Zero(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) A(i, j) = vev(0, {f[i], f[j]}, 0, s), A(j, i) = -A(i, j);
            cplx lhs = vev(0, word, 0, s), rhs = pfaffian(A);
            wick = std::max(wick, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
    double phi = 0;
    for (int L = -3; L <= 3; ++L) {
        cplx one = vev(L, {mode(Op::Phi, 0)}, L, s);
        cplx two = vev(L, {mode(Op::Phi, 0), mode(Op::Phi, 0)}, L, s);
        phi = std::max({phi, std::abs(one - (L % 2 ? -1.0 : 1.0) / std::sqrt(2.0)), std::abs(two - 0.5)});
    }
    return {vdm < 1e-12 && wick < 1e-12 && phi < 1e-15,
            "Vandermonde " + fmt("%.1e", vdm) + ", Wick " + fmt("%.1e", wick) + ", phi " + fmt("%.1e", phi)};
}

Outcome c10_ginue()
{
    Experiment x;
    x.spec.kind = EnsembleKind::GinUE;
    x.spec.N = 2;
    x.spec.t = {0.2};
    x.spec.t_prime = {0.2};
    x.tol = 1e-5;
    Verdict v = run_experiment(x);
    note_reality(v);
    return {v.pass, "ratio error " + fmt("%.1e", v.error) + " " + v.detail};
}

Outcome c11_reality()
{
    // GinOE / GinSE evaluations pass through complex moment tables
    for (auto k : {EnsembleKind::GinOE, EnsembleKind::GinSE})
        for (int N = 1; N <= 3; ++N) {
            EnsembleSpec e;
            e.kind = k;
            e.N = N;
            e.t = {0.3, -0.05};
            cplx v = tau_series(e, 10).evaluate(e.t);
            max_imag_ratio = std::max(max_imag_ratio, std::abs(v.imag()) / std::abs(v.real()));
            ++imag_samples;
        }
    return {max_imag_ratio <= 1e-8, std::to_string(imag_samples) + " evaluations, max |Im|/|Re| " + fmt("%.1e", max_imag_ratio)};
}

} // namespace

int main()
{
    // criterion -> reason it is allowed to fail without failing the run
    const std::map<int, std::string> documented{
        {8, "SE half: odd-charge SE taus vanish, so every term of the difference Hirota relation is zero"}};

    struct Item {
        int id;
        const char* title;
        double budget_s;
        std::function<Outcome()> run;
    };
    std::map<std::string, bool> hirota_parts;
    std::vector<Item> items{
        {1, "Pfaffian suite", 1, c1_pfaffian},
        {2, "GinSE s=0 moment structure", 10, c2_ginse_moments},
        {3, "series vs oracle ratios", 300, c3_series_ratios},
        {4, "SE closed-form anchor", 60, c4_anchor},
        {5, "discrete-measure exactness", 30, c5_discrete},
        {6, "Pfaffian kernel identity", 120, c6_kernel},
        {7, "group integrals vs Haar MC", 300, c7_groups},
        {8, "Hirota residual decay", 300, [&] { return c8_hirota(hirota_parts); }},
        {9, "Fock identities", 60, c9_fock},
        {10, "GinUE bimoment ratio", 60, c10_ginue},
        {11, "reality of tau evaluations", 60, c11_reality},
    };
    int unexpected = 0;
    for (const auto& it : items) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = it.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_budget = secs <= it.budget_s;
        bool pass = o.pass && in_budget;
        std::string tag = pass ? "PASS" : "FAIL";
        if (!pass && documented.count(it.id)) {
            bool only_documented = it.id != 8 || (hirota_parts["GinOE"] && in_budget);
            if (only_documented)
                tag += " (documented: " + documented.at(it.id) + ")";
            else
                ++unexpected;
        } else if (!pass) {
            ++unexpected;
        }
        std::printf("criterion %2d %s: %s  [%.2fs, budget %.0fs]%s\n", it.id, it.title, tag.c_str(), secs, it.budget_s,
                    (o.detail.empty() ? "" : ("  " + o.detail).c_str()));
        std::fflush(stdout);
    }
    std::printf("unexpected failures: %d\n", unexpected);
    return unexpected == 0 ? 0 : 1;
}
