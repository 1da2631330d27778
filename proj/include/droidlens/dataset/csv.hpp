#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "droidlens/core/error.hpp"
#include "droidlens/dataset/dataset.hpp"

namespace droidlens {

/// `id,label,op_00,...,op_ff`
inline std::string csv_header() {
    std::string h = "id,label";
    char buf[8];
    for (unsigned op = 0; op < kOpcodeColumns; ++op) {
        std::snprintf(buf, sizeof buf, ",op_%02x", op);
        h += buf;
    }
    return h;
}

/// Shortest text that parses back to exactly `v` ("12" for 12.0).
inline std::string format_real(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error("format_real: conversion failed");
    return std::string(buf, end);
}

inline std::string to_csv(const Dataset& ds) {
    ds.validate();
    if (!ds.empty() && ds.dims() != kOpcodeColumns) {
        throw DataError("dataset CSV requires " + std::to_string(kOpcodeColumns) + " feature columns, have " +
                        std::to_string(ds.dims()));
    }
    std::string out = csv_header();
    out += '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::string& id = ds.ids[i];
        if (id.find_first_of(",\"\r\n") != std::string::npos) {
            throw DataError("id contains a CSV delimiter: " + id);
        }
        out += id;
        out += ',';
        out += std::to_string(to_int(ds.labels[i]));
        for (double v : ds.features.row(i)) {
            out += ',';
            out += format_real(v);
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline double parse_cell(std::string_view cell, std::size_t line_no, std::size_t column) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw DataError("line " + std::to_string(line_no) + ", column " + std::to_string(column + 1) +
                        ": non-numeric cell '" + std::string(cell) + "'");
    }
    return v;
}

} // namespace detail

inline Dataset from_csv(std::string_view text) {
    Dataset ds;
    ds.features = Matrix(0, kOpcodeColumns);
    const std::size_t expected_fields = kOpcodeColumns + 2;
    const std::string header = csv_header();
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::vector<double> row(kOpcodeColumns);
    bool saw_header = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!saw_header) {
            if (line != header) throw DataError("line 1: unexpected header (expected id,label,op_00,...,op_ff)");
            saw_header = true;
            continue;
        }
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != expected_fields) {
            throw DataError("line " + std::to_string(line_no) + ": malformed row with " +
                            std::to_string(fields.size()) + " fields, expected " + std::to_string(expected_fields));
        }
        const double label = detail::parse_cell(fields[1], line_no, 1);
        if (label != 0.0 && label != 1.0) {
            throw DataError("line " + std::to_string(line_no) + ": label must be 0 or 1");
        }
        for (std::size_t j = 0; j < kOpcodeColumns; ++j) {
            const double v = detail::parse_cell(fields[j + 2], line_no, j + 2);
            if (!std::isfinite(v) || v < 0.0) {
                throw DataError("line " + std::to_string(line_no) + ", column " + std::to_string(j + 3) +
                                ": feature must be finite and >= 0");
            }
            row[j] = v;
        }
        ds.add(std::string(fields[0]), row, static_cast<Label>(static_cast<int>(label)));
    }
    if (!saw_header) throw DataError("empty file: missing header");
    return ds;
}

inline Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_csv(buf.str());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

/// Writes `content` to a sibling temp file and renames it over `path`, so a
/// failed run never leaves a partial file behind.
inline void write_file_atomically(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DataError("write failed for " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DataError("cannot rename into " + path.string());
    }
}

inline void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
    write_file_atomically(path, to_csv(ds));
}

} // namespace droidlens
