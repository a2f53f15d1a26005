#pragma once

// Trajectory CSV: one row per logged sample, shortest round-trip decimal
// formatting so that parsing recovers every value bit for bit.

#include "kbcrane/simulation.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace kbcrane {

inline constexpr std::array<const char *, 19> kCsvColumns = {
    "t",         "alpha",      "beta",      "gamma",      "d",      "theta1", "theta2",
    "alpha_dot", "beta_dot",   "gamma_dot", "d_dot",      "theta1_dot", "theta2_dot",
    "u1",        "u2",         "u3",        "u4",         "E",      "V"};

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to exactly x.
inline std::string format_double(double x) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view text) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw CsvError("not a number: '" + std::string(text) + "'");
    return value;
}

inline void write_csv_header(std::ostream &os) {
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) os << (i ? "," : "") << kCsvColumns[i];
    os << '\n';
}

inline void write_csv_row(std::ostream &os, const TrajectoryRow &r) {
    std::string line = format_double(r.t);
    auto add = [&line](double v) {
        line += ',';
        line += format_double(v);
    };
    for (int i = 0; i < 6; ++i) add(r.q[i]);
    for (int i = 0; i < 6; ++i) add(r.qdot[i]);
    for (int i = 0; i < 4; ++i) add(r.u[i]);
    add(r.E);
    add(r.V);
    line += '\n';
    os << line;
}

inline void write_trajectory_csv(std::ostream &os, const TrajectoryLog &log) {
    write_csv_header(os);
    for (const auto &row : log.rows) write_csv_row(os, row);
}

inline void write_trajectory_csv(const std::string &path, const TrajectoryLog &log) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_trajectory_csv(os, log);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

inline TrajectoryLog read_trajectory_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line)) throw CsvError("empty CSV");
    {
        std::string expected;
        for (std::size_t i = 0; i < kCsvColumns.size(); ++i)
            expected += std::string(i ? "," : "") + kCsvColumns[i];
        if (line != expected) throw CsvError("unexpected CSV header");
    }

    TrajectoryLog log;
    std::array<double, kCsvColumns.size()> v{};
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t col = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view field(line.data() + start,
                                         (comma == std::string::npos ? line.size() : comma) - start);
            if (col >= v.size())
                throw CsvError("too many fields on line " + std::to_string(line_no));
            v[col++] = parse_double(field);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (col != v.size()) throw CsvError("too few fields on line " + std::to_string(line_no));

        TrajectoryRow r;
        r.t = v[0];
        for (int i = 0; i < 6; ++i) r.q[i] = v[1 + i];
        for (int i = 0; i < 6; ++i) r.qdot[i] = v[7 + i];
        for (int i = 0; i < 4; ++i) r.u[i] = v[13 + i];
        r.E = v[17];
        r.V = v[18];
        log.rows.push_back(r);
    }
    if (log.rows.size() >= 2) log.dt = log.rows[1].t - log.rows[0].t;
    return log;
}

inline TrajectoryLog read_trajectory_csv(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return read_trajectory_csv(is);
}

} // namespace kbcrane
