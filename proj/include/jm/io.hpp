#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "jm/matrix.hpp"

namespace jm {

enum class InputMode { PValue, ZValue };

/// Accepts "pvalue" or "zvalue". Throws ConfigError otherwise.
InputMode parse_input_mode(const std::string& name);
std::string to_string(InputMode mode);

/// Reads a delimited numeric matrix (comma or tab, detected from the first line).
///
/// A first row that does not parse as numbers is taken as a header. Blank lines are
/// skipped. Every error is an InputError naming `source` and the 1-based line (and
/// column, where it applies): unparseable or non-finite fields, ragged rows, no data,
/// and in PValue mode values outside [0,1].
Matrix parse_matrix(std::istream& in, InputMode mode, std::string_view source = "<input>");

/// parse_matrix on a file. Throws InputError when it cannot be opened.
Matrix ingest(const std::filesystem::path& path, InputMode mode);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_double(double value);

/// Writes rows with `delimiter`, optionally preceded by a header line. Values are
/// printed with format_double, so ingest() reproduces the matrix exactly.
void write_matrix(std::ostream& out, const Matrix& values, char delimiter = ',',
                  std::string_view header = {});

}  // namespace jm
