#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "../hub.hpp"
#include "../tauseries.hpp"
#include "config.hpp"

namespace rmtau::cli {

struct EmitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string to_csv(const Table& t)
{
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            out += csv_field(r[i]);
        }
        out += "\r\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

// JSON text with every floating value at 17 significant digits; non-finite values become null
inline void write_json(std::string& out, const json& j, int indent = 0)
{
    std::string pad(indent, ' '), pad2(indent + 2, ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad2 + json(it.key()).dump() + ": ";
            write_json(out, it.value(), indent + 2);
        }
        out += "\n" + pad + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        bool scalars = true;
        for (const auto& v : j) scalars = scalars && !v.is_structured();
        out += scalars ? "[" : "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += scalars ? ", " : ",\n";
            if (!scalars) out += pad2;
            write_json(out, j[i], indent + 2);
        }
        out += scalars ? "]" : "\n" + pad + "]";
        return;
    }
    case json::value_t::number_float: {
        double v = j.get<double>();
        out += std::isfinite(v) ? fmt17(v) : "null";
        return;
    }
    default: out += j.dump();
    }
}

inline std::string json_text(const json& j)
{
    std::string s;
    write_json(s, j);
    return s + "\n";
}

inline void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw EmitError("cannot write " + path.string());
    f << text;
    f.close();
    if (!f) throw EmitError("write failed for " + path.string());
}

inline Table tau_table(const TauApprox& T)
{
    Table t;
    t.header = {"partition", "weight", "coefficient_re", "coefficient_im"};
    for (std::size_t i = 0; i < T.partitions.size(); ++i)
        t.rows.push_back({T.partitions[i].str(), std::to_string(T.partitions[i].weight()), fmt17(T.coeffs[i].real()),
                          fmt17(T.coeffs[i].imag())});
    return t;
}

inline json verdict_json(const Verdict& v)
{
    json j;
    j["name"] = v.name;
    j["comparison"] = v.comparison;
    j["pass"] = v.pass;
    j["margin"] = v.margin;
    j["error"] = v.error;
    j["tolerance"] = v.tolerance;
    j["detail"] = v.detail;
    j["metrics"] = json::object();
    for (const auto& [k, x] : v.metrics) j["metrics"][k] = x;
    return j;
}

inline json verdicts_json(const std::vector<Verdict>& vs)
{
    json a = json::array();
    for (const auto& v : vs) a.push_back(verdict_json(v));
    return a;
}

// one JSON document per run: {"config": ..., "results": ...}
inline std::string run_document(const RunConfig& c, const json& results)
{
    json doc;
    doc["config"] = to_json(c);
    doc["results"] = results;
    return json_text(doc);
}

// CSV files carry no comment syntax, so the config goes into a sidecar next to them
inline void emit_csv(const std::filesystem::path& path, const Table& t, const RunConfig& c)
{
    write_file(path, to_csv(t));
    auto side = path;
    side += ".config.json";
    write_file(side, json_text(to_json(c)));
}

} // namespace rmtau::cli
