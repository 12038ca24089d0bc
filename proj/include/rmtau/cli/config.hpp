#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "../ensemble.hpp"
#include "../hub.hpp"
#include "../quad.hpp"

namespace rmtau::cli {

using json = nlohmann::json;

enum class ConfigErrc {
    Syntax = 10,
    UnknownKind = 11,
    NegativeCutoff = 12,
    MalformedNumber = 13,
    UnknownField = 14,
    DuplicateField = 15,
    MissingField = 16,
    InvalidValue = 17,
    UnknownCommand = 18,
};

inline const char* errc_name(ConfigErrc c)
{
    switch (c) {
    case ConfigErrc::Syntax: return "syntax error";
    case ConfigErrc::UnknownKind: return "unknown ensemble kind";
    case ConfigErrc::NegativeCutoff: return "negative cutoff";
    case ConfigErrc::MalformedNumber: return "malformed number";
    case ConfigErrc::UnknownField: return "unknown field";
    case ConfigErrc::DuplicateField: return "duplicate field";
    case ConfigErrc::MissingField: return "missing field";
    case ConfigErrc::InvalidValue: return "invalid value";
    case ConfigErrc::UnknownCommand: return "unknown command";
    }
    return "?";
}

struct ConfigError : std::runtime_error {
    ConfigErrc code;
    int line;           // 1-based, 0 when unknown
    std::string field;  // dotted path, may be empty
    ConfigError(ConfigErrc c, int ln, std::string f, const std::string& msg)
        : std::runtime_error(build(c, ln, f, msg)), code(c), line(ln), field(std::move(f))
    {
    }

private:
    static std::string build(ConfigErrc c, int ln, const std::string& f, const std::string& msg)
    {
        std::string s = errc_name(c);
        if (!f.empty()) s += " '" + f + "'";
        if (ln > 0) s += " at line " + std::to_string(ln);
        if (!msg.empty()) s += ": " + msg;
        return s;
    }
};

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> c{"partition-function", "compare-oracle", "hirota-check", "group-integral",
                                            "kernel-check",       "moments-dump",   "discrete-check", "suite"};
    return c;
}

struct RunConfig {
    std::string command = "partition-function";
    EnsembleSpec spec;
    int W = 10;
    double tol = 1e-5;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 42;
    std::string out = ".";
    std::string cache;
    std::string format = "json";  // csv | json
    // command extras
    std::vector<double> p{0.1, -0.1};
    std::string group = "orthogonal";
    std::vector<int> W_list{8, 10, 12, 14};
    double hirota_alpha = 10, hirota_beta = 12.5;
    int trials = 50;
    int M = 8;  // moments-dump table size
    std::vector<Experiment> experiments;
};

namespace detail {

inline int line_of(const std::string& text, std::size_t pos)
{
    pos = std::min(pos, text.size());
    int line = 1;
    for (std::size_t i = 0; i < pos; ++i)
        if (text[i] == '\n') ++line;
    return line;
}

// line of the k-th occurrence (0-based) of "key" used as an object key
inline int key_line(const std::string& text, const std::string& key, int k = 0)
{
    std::string pat = "\"" + key + "\"";
    std::size_t pos = 0;
    for (;;) {
        pos = text.find(pat, pos);
        if (pos == std::string::npos) return 0;
        std::size_t q = pos + pat.size();
        while (q < text.size() && std::isspace(static_cast<unsigned char>(text[q]))) ++q;
        if (q < text.size() && text[q] == ':' && k-- == 0) return line_of(text, pos);
        pos += pat.size();
    }
}

class Reader {
public:
    Reader(const std::string& text, const json& obj, std::string prefix) : text_(text), obj_(obj), prefix_(std::move(prefix)) {}

    bool has(const std::string& k) const { return obj_.contains(k); }

    [[noreturn]] void fail(ConfigErrc c, const std::string& k, const std::string& msg) const
    {
        throw ConfigError(c, key_line(text_, k), prefix_ + k, msg);
    }

    double number(const std::string& k) const
    {
        const json& v = obj_.at(k);
        if (!v.is_number()) fail(ConfigErrc::MalformedNumber, k, "expected a number, got " + v.dump());
        double d = v.get<double>();
        if (!std::isfinite(d)) fail(ConfigErrc::MalformedNumber, k, "not finite");
        return d;
    }
    std::int64_t integer(const std::string& k) const
    {
        const json& v = obj_.at(k);
        if (v.is_number_integer()) return v.get<std::int64_t>();
        if (v.is_number_float()) {
            double d = v.get<double>();
            if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
        }
        fail(ConfigErrc::MalformedNumber, k, "expected an integer, got " + v.dump());
    }
    std::int64_t cutoff(const std::string& k) const
    {
        auto v = integer(k);
        if (v < 0) fail(ConfigErrc::NegativeCutoff, k, std::to_string(v));
        return v;
    }
    std::string string(const std::string& k) const
    {
        const json& v = obj_.at(k);
        if (!v.is_string()) fail(ConfigErrc::InvalidValue, k, "expected a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& k) const
    {
        const json& v = obj_.at(k);
        if (!v.is_array()) fail(ConfigErrc::InvalidValue, k, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) fail(ConfigErrc::MalformedNumber, k, "array entry " + x.dump() + " is not a number");
            out.push_back(x.get<double>());
        }
        return out;
    }
    std::vector<int> cutoffs(const std::string& k) const
    {
        std::vector<int> out;
        for (double d : numbers(k)) {
            if (d != std::floor(d)) fail(ConfigErrc::MalformedNumber, k, "expected integers");
            if (d < 0) fail(ConfigErrc::NegativeCutoff, k, "negative entry");
            out.push_back(static_cast<int>(d));
        }
        return out;
    }
    void reject_unknown(const std::set<std::string>& allowed) const
    {
        for (const auto& [k, v] : obj_.items())
            if (!allowed.count(k)) fail(ConfigErrc::UnknownField, k, "");
    }

private:
    const std::string& text_;
    const json& obj_;
    std::string prefix_;
};

inline const std::set<std::string>& ensemble_keys()
{
    static const std::set<std::string> k{"kind", "N", "L", "t", "s", "alpha", "beta", "L1", "L2", "t_prime", "s_prime"};
    return k;
}

inline EnsembleSpec read_spec(const Reader& r)
{
    EnsembleSpec e;
    if (!r.has("kind")) r.fail(ConfigErrc::MissingField, "kind", "");
    if (!r.has("N")) r.fail(ConfigErrc::MissingField, "N", "");
    std::string kind = r.string("kind");
    if (!parse_kind(kind, e.kind)) r.fail(ConfigErrc::UnknownKind, "kind", "\"" + kind + "\"");
    auto N = r.integer("N");
    if (N < 1 || N > 64) r.fail(ConfigErrc::InvalidValue, "N", "need 1 <= N <= 64");
    e.N = static_cast<int>(N);
    if (r.has("L")) e.L = static_cast<int>(r.integer("L"));
    if (r.has("t")) e.t = CouplingSeq(r.numbers("t"));
    if (r.has("s")) e.s = CouplingSeq(r.numbers("s"));
    if (r.has("alpha")) e.alpha = r.number("alpha");
    if (r.has("beta")) e.beta = r.number("beta");
    if (r.has("L1")) e.L1 = static_cast<int>(r.integer("L1"));
    if (r.has("L2")) e.L2 = static_cast<int>(r.integer("L2"));
    if (r.has("t_prime")) e.t_prime = CouplingSeq(r.numbers("t_prime"));
    if (r.has("s_prime")) e.s_prime = CouplingSeq(r.numbers("s_prime"));
    auto v = quad::validate(e);
    if (!v.ok) r.fail(ConfigErrc::InvalidValue, "kind", v.reason);
    return e;
}

inline json spec_json(const EnsembleSpec& e)
{
    json j;
    j["kind"] = to_string(e.kind);
    j["N"] = e.N;
    j["L"] = e.L;
    j["t"] = e.t.values();
    j["s"] = e.s.values();
    j["alpha"] = e.alpha;
    j["beta"] = e.beta;
    if (e.kind == EnsembleKind::GinUE) {
        j["L1"] = e.L1;
        j["L2"] = e.L2;
        j["t_prime"] = e.t_prime.values();
        j["s_prime"] = e.s_prime.values();
    }
    return j;
}

inline Experiment read_experiment(const std::string& text, const json& o, int idx, const RunConfig& defaults)
{
    std::string prefix = "experiments[" + std::to_string(idx) + "].";
    if (!o.is_object()) throw ConfigError(ConfigErrc::InvalidValue, 0, prefix, "experiment must be an object");
    Reader r(text, o, prefix);
    std::set<std::string> allowed = ensemble_keys();
    for (const char* k : {"name", "comparison", "W", "tol", "samples", "seed", "p", "W_list", "hirota_alpha",
                          "hirota_beta", "group", "wave_points", "trials"})
        allowed.insert(k);
    r.reject_unknown(allowed);
    Experiment x;
    x.W = defaults.W;
    x.tol = defaults.tol;
    x.samples = defaults.samples;
    x.seed = defaults.seed;
    if (!r.has("comparison")) r.fail(ConfigErrc::MissingField, "comparison", "");
    std::string c = r.string("comparison");
    if (!parse_comparison(c, x.comparison)) r.fail(ConfigErrc::InvalidValue, "comparison", "\"" + c + "\"");
    x.name = r.has("name") ? r.string("name") : to_string(x.comparison) + "#" + std::to_string(idx);
    x.spec = read_spec(r);
    if (r.has("W")) x.W = static_cast<int>(r.cutoff("W"));
    if (r.has("tol")) x.tol = r.number("tol");
    if (!(x.tol > 0)) r.fail(ConfigErrc::InvalidValue, "tol", "must be positive");
    if (r.has("samples")) x.samples = static_cast<std::uint64_t>(r.cutoff("samples"));
    if (r.has("seed")) x.seed = static_cast<std::uint64_t>(r.cutoff("seed"));
    if (r.has("p")) x.p = r.numbers("p");
    if (r.has("W_list")) x.W_list = r.cutoffs("W_list");
    if (r.has("hirota_alpha")) x.hirota_alpha = r.number("hirota_alpha");
    if (r.has("hirota_beta")) x.hirota_beta = r.number("hirota_beta");
    if (r.has("wave_points")) x.wave_points = r.numbers("wave_points");
    if (r.has("trials")) x.trials = static_cast<int>(r.cutoff("trials"));
    if (r.has("group")) {
        std::string g = r.string("group");
        if (g == "orthogonal")
            x.group = Group::Orthogonal;
        else if (g == "symplectic")
            x.group = Group::Symplectic;
        else
            r.fail(ConfigErrc::InvalidValue, "group", "\"" + g + "\"");
    }
    return x;
}

} // namespace detail

inline json experiment_json(const Experiment& x)
{
    json j = detail::spec_json(x.spec);
    j["name"] = x.name;
    j["comparison"] = to_string(x.comparison);
    j["W"] = x.W;
    j["tol"] = x.tol;
    j["samples"] = x.samples;
    j["seed"] = x.seed;
    j["p"] = x.p;
    j["W_list"] = x.W_list;
    j["hirota_alpha"] = x.hirota_alpha;
    j["hirota_beta"] = x.hirota_beta;
    j["group"] = to_string(x.group);
    j["wave_points"] = x.wave_points;
    j["trials"] = x.trials;
    return j;
}

inline json to_json(const RunConfig& c)
{
    json j = detail::spec_json(c.spec);
    j["command"] = c.command;
    j["W"] = c.W;
    j["tol"] = c.tol;
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["out"] = c.out;
    j["cache"] = c.cache;
    j["format"] = c.format;
    j["p"] = c.p;
    j["group"] = c.group;
    j["W_list"] = c.W_list;
    j["hirota_alpha"] = c.hirota_alpha;
    j["hirota_beta"] = c.hirota_beta;
    j["trials"] = c.trials;
    j["M"] = c.M;
    if (!c.experiments.empty()) {
        j["experiments"] = json::array();
        for (const auto& x : c.experiments) j["experiments"].push_back(experiment_json(x));
    }
    return j;
}

inline RunConfig parse_config(const std::string& text)
{
    // duplicate keys: nlohmann keeps the last one silently, so watch keys as they stream past
    std::vector<std::set<std::string>> seen;
    std::string dup;
    auto cb = [&](int, json::parse_event_t ev, json& parsed) {
        if (ev == json::parse_event_t::object_start) seen.emplace_back();
        if (ev == json::parse_event_t::object_end && !seen.empty()) seen.pop_back();
        if (ev == json::parse_event_t::key && dup.empty() && !seen.empty()) {
            std::string k = parsed.get<std::string>();
            if (!seen.back().insert(k).second) dup = k;
        }
        return true;
    };
    json root;
    try {
        root = json::parse(text, cb);
    } catch (const json::parse_error& e) {
        int line = detail::line_of(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string what = e.what();
        auto lr = what.find("last read: '");
        if (lr != std::string::npos) {
            char c = what[lr + 12];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.')
                throw ConfigError(ConfigErrc::MalformedNumber, line, "", what);
        }
        throw ConfigError(ConfigErrc::Syntax, line, "", what);
    }
    if (!dup.empty()) throw ConfigError(ConfigErrc::DuplicateField, detail::key_line(text, dup, 1), dup, "");
    if (!root.is_object()) throw ConfigError(ConfigErrc::Syntax, 1, "", "top level must be an object");

    detail::Reader r(text, root, "");
    std::set<std::string> allowed = detail::ensemble_keys();
    for (const char* k : {"command", "W", "tol", "samples", "seed", "out", "cache", "format", "p", "group", "W_list",
                          "hirota_alpha", "hirota_beta", "trials", "M", "experiments"})
        allowed.insert(k);
    r.reject_unknown(allowed);

    RunConfig c;
    if (r.has("command")) {
        c.command = r.string("command");
        bool known = false;
        for (const auto& k : commands()) known = known || k == c.command;
        if (!known) r.fail(ConfigErrc::UnknownCommand, "command", "\"" + c.command + "\"");
    }
    c.spec = detail::read_spec(r);
    if (r.has("W")) c.W = static_cast<int>(r.cutoff("W"));
    if (r.has("tol")) c.tol = r.number("tol");
    if (!(c.tol > 0)) r.fail(ConfigErrc::InvalidValue, "tol", "must be positive");
    if (r.has("samples")) c.samples = static_cast<std::uint64_t>(r.cutoff("samples"));
    if (r.has("seed")) c.seed = static_cast<std::uint64_t>(r.cutoff("seed"));
    if (r.has("out")) c.out = r.string("out");
    if (r.has("cache")) c.cache = r.string("cache");
    if (r.has("format")) {
        c.format = r.string("format");
        if (c.format != "csv" && c.format != "json") r.fail(ConfigErrc::InvalidValue, "format", c.format);
    }
    if (r.has("p")) c.p = r.numbers("p");
    if (r.has("group")) {
        c.group = r.string("group");
        if (c.group != "orthogonal" && c.group != "symplectic") r.fail(ConfigErrc::InvalidValue, "group", c.group);
    }
    if (r.has("W_list")) c.W_list = r.cutoffs("W_list");
    if (r.has("hirota_alpha")) c.hirota_alpha = r.number("hirota_alpha");
    if (r.has("hirota_beta")) c.hirota_beta = r.number("hirota_beta");
    if (r.has("trials")) c.trials = static_cast<int>(r.cutoff("trials"));
    if (r.has("M")) c.M = static_cast<int>(r.cutoff("M"));
    if (r.has("experiments")) {
        const json& ex = root.at("experiments");
        if (!ex.is_array()) r.fail(ConfigErrc::InvalidValue, "experiments", "expected an array");
        for (std::size_t i = 0; i < ex.size(); ++i)
            c.experiments.push_back(detail::read_experiment(text, ex[i], static_cast<int>(i), c));
    }
    if (c.command == "suite" && c.experiments.empty())
        throw ConfigError(ConfigErrc::MissingField, 0, "experiments", "suite needs at least one experiment");
    return c;
}

} // namespace rmtau::cli
