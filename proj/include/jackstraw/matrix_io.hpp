#ifndef JACKSTRAW_MATRIX_IO_HPP
#define JACKSTRAW_MATRIX_IO_HPP

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"

/**
 * @file matrix_io.hpp
 * @brief Delimited text matrices: header row of column ids, first column of
 * row ids, numeric cells. Parsing and printing go through <charconv>, so the
 * decimal point never depends on the process locale.
 */

namespace jackstraw::io {

/// Shortest decimal that parses back to the identical double (at most 17 significant digits).
inline std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view text, std::size_t line, std::size_t column) {
    std::string_view s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        fail(ErrorKind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                   ": cannot parse '" + std::string(text) + "' as a number");
    }
    return value;
}

inline char delimiter_for(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".csv" ? ',' : '\t';
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string unquote(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return std::string(s);
}

/// Parses a labelled matrix. Errors report 1-based line and column.
inline DataMatrix read_matrix(std::istream& in, char delim = '\t') {
    std::string line;
    std::size_t line_no = 0;
    DataMatrix out;
    std::vector<double> cells;

    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto fields = split(line, delim);
        if (!have_header) {
            if (fields.size() < 2) {
                fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": header needs at least one column id");
            }
            for (std::size_t k = 1; k < fields.size(); ++k) {
                out.col_ids.push_back(unquote(fields[k]));
            }
            have_header = true;
            continue;
        }
        if (fields.size() != out.col_ids.size() + 1) {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(out.col_ids.size() + 1) + " fields, found " +
                                       std::to_string(fields.size()));
        }
        out.row_ids.push_back(unquote(fields[0]));
        for (std::size_t k = 1; k < fields.size(); ++k) {
            cells.push_back(parse_double(fields[k], line_no, k + 1));
        }
    }
    if (!have_header) {
        fail(ErrorKind::Parse, "empty input");
    }
    const auto m = static_cast<Eigen::Index>(out.row_ids.size());
    const auto n = static_cast<Eigen::Index>(out.col_ids.size());
    out.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cells.data(), m, n);
    return out;
}

inline DataMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::Parse, "cannot open " + path.string());
    }
    return read_matrix(in, delimiter_for(path));
}

inline void write_matrix(std::ostream& out, const DataMatrix& mat, char delim = '\t', std::string_view corner = "id") {
    out << corner;
    for (const auto& c : mat.col_ids) out << delim << c;
    out << '\n';
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        out << mat.row_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            out << delim << format_double(mat.values(i, j));
        }
        out << '\n';
    }
}

inline void write_matrix(const std::filesystem::path& path, const DataMatrix& mat) {
    std::ofstream out(path);
    if (!out) {
        fail(ErrorKind::Parse, "cannot write " + path.string());
    }
    write_matrix(out, mat, delimiter_for(path));
}

} // namespace jackstraw::io

#endif
