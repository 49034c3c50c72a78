#include "paththresh/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "paththresh/errors.hpp"

namespace paththresh::csv {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

namespace {

bool try_parse(std::string_view field, double& v) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  return ec == std::errc{} && ptr == field.data() + field.size();
}

}  // namespace

double parse_double(std::string_view field, std::string_view context) {
  double v = 0.0;
  if (!try_parse(field, v)) {
    std::string msg = "cannot parse '" + std::string(field) + "' as a number";
    if (!context.empty()) msg += " (" + std::string(context) + ")";
    throw Error(ErrorCode::ParseError, msg);
  }
  return v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Matrix read_matrix(std::istream& in, std::string_view source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_checked = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!header_checked) {
      header_checked = true;
      double probe = 0.0;
      if (!try_parse(fields.front(), probe)) continue;  // header line
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields)
      row.push_back(parse_double(f, std::string(source) + ":" + std::to_string(line_no)));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                                             std::to_string(rows.front().size()) + " fields, found " +
                                             std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, std::string(source) + ": no data rows");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return read_matrix(in, path.string());
}

Vector read_vector(std::istream& in, std::string_view source) {
  const Matrix m = read_matrix(in, source);
  if (m.cols() != 1)
    throw Error(ErrorCode::ParseError, std::string(source) + ": expected a single column, found " +
                                           std::to_string(m.cols()));
  const auto c = m.col(0);
  return Vector(c.begin(), c.end());
}

Vector read_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return read_vector(in, path.string());
}

void write_matrix(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, const Vector& v) {
  for (double x : v) out << format_double(x) << '\n';
}

}  // namespace paththresh::csv
