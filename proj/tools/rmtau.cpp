#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <sstream>

#include "rmtau/cli/cache.hpp"
#include "rmtau/cli/config.hpp"
#include "rmtau/cli/emit.hpp"
#include "rmtau/hub.hpp"

using namespace rmtau;
using namespace rmtau::cli;

namespace {

Experiment experiment_for(const RunConfig& c, Comparison kind)
{
    Experiment x;
    x.name = c.command;
    x.comparison = kind;
    x.spec = c.spec;
    x.W = c.W;
    x.tol = c.tol;
    x.samples = c.samples;
    x.seed = c.seed;
    x.p = c.p;
    x.W_list = c.W_list;
    x.hirota_alpha = c.hirota_alpha;
    x.hirota_beta = c.hirota_beta;
    x.group = c.group == "symplectic" ? Group::Symplectic : Group::Orthogonal;
    x.trials = c.trials;
    return x;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

int verdict_run(const RunConfig& c, const std::vector<Experiment>& xs, const MomentProvider& mp, bool parallel)
{
    std::vector<Verdict> vs(xs.size());
    if (parallel && xs.size() > 1) {
        std::vector<std::future<Verdict>> fut;
        for (const auto& x : xs) fut.push_back(std::async(std::launch::async, [&x, &mp] { return run_experiment(x, mp); }));
        for (std::size_t i = 0; i < xs.size(); ++i) vs[i] = fut[i].get();
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i) vs[i] = run_experiment(xs[i], mp);
    }
    std::filesystem::path out = std::filesystem::path(c.out) / (c.command + ".json");
    write_file(out, run_document(c, verdicts_json(vs)));
    if (c.format == "csv") {
        Table t;
        t.header = {"name", "comparison", "pass", "margin", "error", "tolerance", "detail"};
        for (const auto& v : vs)
            t.rows.push_back({v.name, v.comparison, v.pass ? "true" : "false", fmt17(v.margin), fmt17(v.error),
                              fmt17(v.tolerance), v.detail});
        emit_csv(std::filesystem::path(c.out) / (c.command + ".csv"), t, c);
    }
    bool all = true;
    for (const auto& v : vs) {
        std::printf("%-28s %s  margin %.3g  %s\n", v.name.c_str(), v.pass ? "PASS" : "FAIL", v.margin, v.detail.c_str());
        all = all && v.pass;
    }
    return all ? 0 : 1;
}

int partition_function(const RunConfig& c, const MomentProvider& mp)
{
    const EnsembleSpec& e = c.spec;
    json r;
    if (e.kind == EnsembleKind::GinUE) {
        cplx d = complex_bimoment_matrix(e, e.N).determinant();
        r["bimoment_determinant"] = cplx_json(d);
        write_file(std::filesystem::path(c.out) / (c.command + ".json"), run_document(c, r));
        std::printf("det M = %.17g %+.17gi\n", d.real(), d.imag());
        return 0;
    }
    TauApprox T = tau_series(e, c.W, mp);
    cplx S = T.evaluate(e.t);
    cplx tau = bkp_tau(e, S);
    r["series"] = cplx_json(S);
    r["tau"] = cplx_json(tau);
    r["J"] = cplx_json(partition_from_tau(e, tau));
    r["c"] = c_factor(e.t, e.s);
    r["sign"] = theorem_sign(e);
    r["terms"] = T.partitions.size();
    write_file(std::filesystem::path(c.out) / (c.command + ".json"), run_document(c, r));
    if (c.format == "csv") emit_csv(std::filesystem::path(c.out) / (c.command + ".csv"), tau_table(T), c);
    std::printf("J = %.17g %+.17gi  (%zu terms)\n", S.real(), S.imag(), T.partitions.size());
    return 0;
}

int moments_dump(const RunConfig& c, const MomentProvider& mp)
{
    SkewPair p = mp(c.spec, c.M);
    Table t;
    t.header = {"row", "col", "index_row", "index_col", "re", "im"};
    json A = json::array(), a = json::array();
    for (int i = 0; i < p.size(); ++i) {
        json row = json::array();
        for (int j = 0; j < p.size(); ++j) {
            t.rows.push_back({std::to_string(i), std::to_string(j), std::to_string(p.base + i), std::to_string(p.base + j),
                              fmt17(p.A(i, j).real()), fmt17(p.A(i, j).imag())});
            row.push_back(cplx_json(p.A(i, j)));
        }
        A.push_back(row);
        a.push_back(cplx_json(p.a(i)));
    }
    for (int i = 0; i < p.size(); ++i)
        t.rows.push_back({std::to_string(i), "border", std::to_string(p.base + i), "", fmt17(p.a(i).real()),
                          fmt17(p.a(i).imag())});
    json r;
    r["base"] = p.base;
    r["A"] = A;
    r["a"] = a;
    write_file(std::filesystem::path(c.out) / (c.command + ".json"), run_document(c, r));
    if (c.format == "csv") emit_csv(std::filesystem::path(c.out) / (c.command + ".csv"), t, c);
    std::printf("moment table %dx%d written\n", p.size(), p.size());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"deformed random-matrix partition functions as Pfaffian tau functions"};
    std::string command, config_path, out, cache;
    std::uint64_t seed = 0;
    app.add_option("command", command, "partition-function | compare-oracle | hirota-check | group-integral | "
                                       "kernel-check | moments-dump | discrete-check | suite")
        ->required();
    app.add_option("--config", config_path, "JSON run configuration")->required();
    auto* out_opt = app.add_option("--out", out, "output directory");
    auto* cache_opt = app.add_option("--cache", cache, "moment cache directory");
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    RunConfig c;
    try {
        std::ifstream f(config_path);
        if (!f) throw ConfigError(ConfigErrc::MissingField, 0, "--config", "cannot read " + config_path);
        std::stringstream ss;
        ss << f.rdbuf();
        c = parse_config(ss.str());
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error %d: %s\n", static_cast<int>(e.code), e.what());
        return 2;
    }
    bool known = false;
    for (const auto& k : commands()) known = known || k == command;
    if (!known) {
        std::fprintf(stderr, "config error %d: unknown command '%s'\n", static_cast<int>(ConfigErrc::UnknownCommand),
                     command.c_str());
        return 2;
    }
    c.command = command;
    if (*out_opt) c.out = out;
    if (*cache_opt) c.cache = cache;
    if (*seed_opt) {
        c.seed = seed;
        for (auto& x : c.experiments) x.seed = seed;
    }

    std::unique_ptr<MomentStore> store;
    MomentProvider mp = default_moments();
    if (!c.cache.empty()) {
        store = std::make_unique<MomentStore>(c.cache, default_moments(),
                                              [](const std::string& w) { std::fprintf(stderr, "warning: %s\n", w.c_str()); });
        mp = store->provider();
    }

    try {
        if (command == "partition-function") return partition_function(c, mp);
        if (command == "moments-dump") return moments_dump(c, mp);
        if (command == "suite") return verdict_run(c, c.experiments, mp, !store);
        Comparison k = Comparison::SeriesVsOracle;
        if (command == "hirota-check") k = Comparison::HirotaDecay;
        if (command == "group-integral") k = Comparison::GroupVsMC;
        if (command == "kernel-check") k = Comparison::KernelVsOracle;
        if (command == "discrete-check") k = Comparison::DiscreteExact;
        return verdict_run(c, {experiment_for(c, k)}, mp, false);
    } catch (const EmitError& e) {
        std::fprintf(stderr, "output error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
