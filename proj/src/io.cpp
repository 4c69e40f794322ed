#include "jm/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace jm {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_field(std::string_view field, double& out) {
    field = trim(field);
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

template <typename Fn>
void for_each_field(std::string_view line, char delimiter, Fn&& fn) {
    std::size_t start = 0;
    while (true) {
        const auto end = line.find(delimiter, start);
        fn(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
}

[[noreturn]] void fail(std::string_view source, std::size_t line, std::string_view what) {
    std::ostringstream msg;
    msg << source << ":" << line << ": " << what;
    throw InputError(msg.str());
}

}  // namespace

InputMode parse_input_mode(const std::string& name) {
    if (name == "pvalue") return InputMode::PValue;
    if (name == "zvalue") return InputMode::ZValue;
    throw ConfigError("unknown mode '" + name + "' (expected pvalue or zvalue)");
}

std::string to_string(InputMode mode) { return mode == InputMode::PValue ? "pvalue" : "zvalue"; }

void validate_pvalues(const Matrix& pvals) {
    for (std::size_t i = 0; i < pvals.rows(); ++i) {
        for (std::size_t k = 0; k < pvals.cols(); ++k) {
            const double p = pvals(i, k);
            if (!(p >= 0.0 && p <= 1.0)) {
                std::ostringstream msg;
                msg << "p-value at row " << i << ", column " << k << " is " << p << ", outside [0,1]";
                throw InputError(msg.str());
            }
        }
    }
}

void validate_finite(const Matrix& values) {
    for (std::size_t i = 0; i < values.rows(); ++i) {
        for (std::size_t k = 0; k < values.cols(); ++k) {
            if (!std::isfinite(values(i, k))) {
                std::ostringstream msg;
                msg << "value at row " << i << ", column " << k << " is not finite";
                throw InputError(msg.str());
            }
        }
    }
}

Matrix parse_matrix(std::istream& in, InputMode mode, std::string_view source) {
    std::vector<double> data;
    std::size_t cols = 0;
    std::size_t rows = 0;
    char delimiter = 0;
    bool header_allowed = true;
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> row;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        if (delimiter == 0) delimiter = text.find('\t') != std::string_view::npos ? '\t' : ',';

        row.clear();
        std::size_t bad_column = 0;
        bool ok = true;
        for_each_field(text, delimiter, [&](std::string_view field) {
            double v = 0.0;
            if (ok && !parse_field(field, v)) {
                ok = false;
                bad_column = row.size();
            }
            row.push_back(v);
        });

        if (!ok) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            std::ostringstream msg;
            msg << "column " << bad_column + 1 << ": cannot parse '" << trim(line) << "' as numbers";
            fail(source, line_no, msg.str());
        }
        header_allowed = false;

        if (cols == 0) {
            cols = row.size();
        } else if (row.size() != cols) {
            std::ostringstream msg;
            msg << "expected " << cols << " columns, found " << row.size();
            fail(source, line_no, msg.str());
        }
        for (std::size_t k = 0; k < row.size(); ++k) {
            const double v = row[k];
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "column " << k + 1 << ": value is not finite";
                fail(source, line_no, msg.str());
            }
            if (mode == InputMode::PValue && !(v >= 0.0 && v <= 1.0)) {
                std::ostringstream msg;
                msg << "column " << k + 1 << ": p-value " << format_double(v) << " is outside [0,1]";
                fail(source, line_no, msg.str());
            }
        }
        data.insert(data.end(), row.begin(), row.end());
        ++rows;
    }
    if (in.bad()) fail(source, line_no, "read error");
    if (rows == 0) fail(source, line_no, "no data rows");
    return Matrix(rows, cols, std::move(data));
}

Matrix ingest(const std::filesystem::path& path, InputMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input file '" + path.string() + "'");
    return parse_matrix(in, mode, path.string());
}

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ec == std::errc() ? ptr : buf.data());
}

void write_matrix(std::ostream& out, const Matrix& values, char delimiter, std::string_view header) {
    if (!header.empty()) out << header << '\n';
    std::array<char, 32> buf{};
    std::string line;
    for (std::size_t i = 0; i < values.rows(); ++i) {
        line.clear();
        for (std::size_t k = 0; k < values.cols(); ++k) {
            if (k > 0) line.push_back(delimiter);
            const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), values(i, k));
            line.append(buf.data(), ptr);
        }
        line.push_back('\n');
        out << line;
    }
}

}  // namespace jm
