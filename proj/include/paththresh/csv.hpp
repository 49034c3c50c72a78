#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "paththresh/matrix.hpp"

namespace paththresh::csv {

// Comma-separated numeric tables: one row per line, optional single header
// line (detected when its first field does not parse as a number), '.' as the
// decimal point regardless of locale.

Matrix read_matrix(std::istream& in, std::string_view source = "<stream>");
Matrix read_matrix(const std::filesystem::path& path);

/// A single-column table as a vector.
Vector read_vector(std::istream& in, std::string_view source = "<stream>");
Vector read_vector(const std::filesystem::path& path);

void write_matrix(std::ostream& out, const Matrix& m);
void write_vector(std::ostream& out, const Vector& v);

/// Shortest decimal text that parses back to exactly `v` ("nan", "inf" for
/// non-finite values).
std::string format_double(double v);

/// Locale-independent parse of a full field; throws Error{ParseError}.
double parse_double(std::string_view field, std::string_view context = {});

std::vector<std::string> split_fields(std::string_view line);

std::string_view trim(std::string_view s);

}  // namespace paththresh::csv
