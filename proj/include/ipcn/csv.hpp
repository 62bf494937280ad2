#pragma once

// Locale-independent CSV helpers. Numbers are written with 17 significant
// digits so files round-trip doubles exactly and are byte-stable.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ipcn/core.hpp"

namespace ipcn::csv {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("malformed number '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.remove_suffix(1);
        while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
        out.emplace_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline Table read(const std::string& path, bool has_header = true) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r" || line.front() == '#') continue;
        auto fields = split_line(line);
        if (first && has_header)
            t.header = std::move(fields);
        else
            t.rows.push_back(std::move(fields));
        first = false;
    }
    return t;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot write '" + path + "'");
    }

    template <class... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((emit(fields, first)), ...);
        out_ << '\n';
    }

private:
    void sep(bool& first) {
        if (!first) out_ << ',';
        first = false;
    }
    void emit(double v, bool& first) {
        sep(first);
        out_ << format_double(v);
    }
    void emit(const std::string& s, bool& first) {
        sep(first);
        out_ << s;
    }
    void emit(const char* s, bool& first) {
        sep(first);
        out_ << s;
    }
    template <class I>
        requires std::is_integral_v<I>
    void emit(I v, bool& first) {
        sep(first);
        out_ << std::to_string(v);
    }

    std::ofstream out_;
};

}  // namespace ipcn::csv
