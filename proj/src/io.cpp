#include "hadamard/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "hadamard/errors.hpp"

namespace hadamard::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": cannot parse '" +
                  std::string(field) + "' as a number");
  }
  return value;
}

}  // namespace

MatrixXd read_csv_matrix(const std::filesystem::path& path, bool allow_header) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(path.string() + ": cannot open file");
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (allow_header && rows.empty()) {
      allow_header = false;
      const auto first = trim(std::string_view(line).substr(0, line.find(',')));
      double probe = 0.0;
      const char* begin = first.data() + (!first.empty() && first.front() == '+');
      auto [ptr, ec] = std::from_chars(begin, first.data() + first.size(), probe);
      if (first.empty() || ec != std::errc() || ptr != first.data() + first.size()) continue;
    }
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_field(rest.substr(0, comma), path, line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(rows.front().size()) + " fields, found " +
                    std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw IoError(path.string() + ": no data rows");
  }
  MatrixXd M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      M(i, j) = rows[i][j];
    }
  }
  return M;
}

VectorXd read_csv_vector(const std::filesystem::path& path) {
  MatrixXd M = read_csv_matrix(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw IoError(path.string() + ": expected a single row or column, found " +
                std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_csv_matrix(const std::filesystem::path& path, const MatrixXd& M) {
  std::ofstream out(path);
  if (!out) {
    throw IoError(path.string() + ": cannot open for writing");
  }
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
}

void write_csv_vector(const std::filesystem::path& path, const VectorXd& v) {
  write_csv_matrix(path, MatrixXd(v));
}

RegressionProblem load_problem(const std::filesystem::path& x_path,
                               const std::filesystem::path& y_path) {
  MatrixXd X = read_csv_matrix(x_path);
  VectorXd y = read_csv_vector(y_path);
  if (X.rows() != y.size()) {
    throw IoError(y_path.string() + ": has " + std::to_string(y.size()) + " values but " +
                  x_path.string() + " has " + std::to_string(X.rows()) + " rows");
  }
  return RegressionProblem::from_data(std::move(X), std::move(y));
}

}  // namespace hadamard::io
