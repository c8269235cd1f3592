/**
 * @file io.hpp
 * @brief Bit-stable CSV and JSON emission.
 *
 * Numbers are printed with "%.17g" (17 significant digits, '.' decimal, no
 * locale), so identical runs produce byte-identical files on any platform.
 * The JSON writer is deliberately minimal: objects and arrays are emitted in
 * insertion order with no whitespace surprises.
 */
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crmorse/morse.hpp"

namespace crmorse {

inline std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

/// Minimal ordered JSON builder.
class JsonWriter {
public:
    JsonWriter& begin_object() { return token("{"); }
    JsonWriter& end_object() {
        fresh_ = false;
        buf_ += "}";
        return *this;
    }
    JsonWriter& begin_array() { return token("["); }
    JsonWriter& end_array() {
        fresh_ = false;
        buf_ += "]";
        return *this;
    }
    JsonWriter& key(const std::string& k) {
        comma();
        buf_ += "\"" + json_escape(k) + "\":";
        fresh_ = true;
        return *this;
    }
    JsonWriter& value(const std::string& v) {
        comma();
        buf_ += "\"" + json_escape(v) + "\"";
        return *this;
    }
    JsonWriter& value(const char* v) { return value(std::string(v)); }
    JsonWriter& value(double v) {
        comma();
        buf_ += fmt_g17(v);
        return *this;
    }
    JsonWriter& value(std::uint64_t v) {
        comma();
        buf_ += std::to_string(v);
        return *this;
    }
    JsonWriter& value(long long v) {
        comma();
        buf_ += std::to_string(v);
        return *this;
    }
    JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
    JsonWriter& value(bool v) {
        comma();
        buf_ += v ? "true" : "false";
        return *this;
    }
    const std::string& str() const { return buf_; }

private:
    JsonWriter& token(const char* t) {
        comma();
        buf_ += t;
        fresh_ = true;
        return *this;
    }
    void comma() {
        if (!fresh_ && !buf_.empty()) {
            const char c = buf_.back();
            if (c != '{' && c != '[' && c != ':') buf_ += ",";
        }
        fresh_ = false;
    }
    std::string buf_;
    bool fresh_ = true;
};

/// CSV with '#'-prefixed header lines carrying the full run configuration.
struct CsvFile {
    std::vector<std::string> config_lines;
    std::string header;
    std::vector<std::string> rows;

    std::string str() const {
        std::string out;
        for (const auto& c : config_lines) out += "# " + c + "\n";
        out += header + "\n";
        for (const auto& r : rows) out += r + "\n";
        return out;
    }
};

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << contents;
}

/// Splits a model descriptor block into "key=value" config lines.
inline std::vector<std::string> descriptor_lines(const std::string& block) {
    std::vector<std::string> out;
    std::istringstream is(block);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

inline std::string report_to_json(const MorseReport& rep) {
    JsonWriter w;
    w.begin_object();
    w.key("schema").value("crmorse-report/1");
    w.key("model");
    w.begin_object();
    for (const auto& line : descriptor_lines(rep.model_descriptor)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        w.key(line.substr(0, eq)).value(line.substr(eq + 1));
    }
    w.end_object();
    w.key("config");
    w.begin_object();
    w.key("m_max").value(rep.m_max);
    w.key("n_samples").value(rep.n_samples);
    w.key("seed").value(rep.seed);
    w.key("workers").value(rep.workers);
    w.end_object();
    w.key("stratum_integrals");
    w.begin_array();
    for (std::size_t q = 0; q < rep.stratum_integrals.size(); ++q) {
        const auto& e = rep.stratum_integrals[q];
        w.begin_object();
        w.key("q").value(static_cast<long long>(q));
        w.key("value").value(e.value);
        w.key("stderr").value(e.stderr_);
        w.key("n_samples").value(e.n_samples);
        w.key("rejected").value(e.rejected);
        w.end_object();
    }
    w.end_array();
    w.key("alternating_integrals");
    w.begin_array();
    for (std::size_t q = 0; q < rep.alternating_integrals.size(); ++q) {
        const auto& e = rep.alternating_integrals[q];
        w.begin_object();
        w.key("q").value(static_cast<long long>(q));
        w.key("value").value(e.value);
        w.key("stderr").value(e.stderr_);
        w.end_object();
    }
    w.end_array();
    w.key("fits");
    w.begin_array();
    for (const auto& [q, f] : rep.fits) {
        w.begin_object();
        w.key("q").value(static_cast<long long>(q));
        w.key("c").value(f.c);
        w.key("c_stderr").value(f.c_stderr);
        w.key("residual").value(f.residual);
        w.end_object();
    }
    w.end_array();
    w.key("checks");
    w.begin_array();
    for (const auto& c : rep.checks) {
        w.begin_object();
        w.key("name").value(c.name);
        w.key("statement").value(c.statement);
        w.key("lhs").value(c.lhs);
        w.key("rhs").value(c.rhs);
        w.key("budget").value(c.budget);
        w.key("slack").value(c.slack);
        w.key("status").value(to_string(c.status));
        w.end_object();
    }
    w.end_array();
    w.key("overall").value(to_string(rep.overall()));
    w.end_object();
    return w.str();
}

}  // namespace crmorse
