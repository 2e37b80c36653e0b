#pragma once

#include <filesystem>
#include <string>

#include "hadamard/model.hpp"

namespace hadamard::io {

/// Header-free, comma-separated, row-major. Every row must have the same
/// number of fields. Throws IoError naming the file and line on failure.
/// With allow_header, a first line whose leading field is not a number is skipped.
MatrixXd read_csv_matrix(const std::filesystem::path& path, bool allow_header = false);

/// A single column, or a single row, read as a vector.
VectorXd read_csv_vector(const std::filesystem::path& path);

/// Writes with 17 significant digits so doubles round-trip exactly.
void write_csv_matrix(const std::filesystem::path& path, const MatrixXd& M);

/// One value per line.
void write_csv_vector(const std::filesystem::path& path, const VectorXd& v);

/// Shortest-exact-enough decimal for a double (17 significant digits).
std::string format_double(double x);

/// Loads X and y and builds the moment form.
RegressionProblem load_problem(const std::filesystem::path& x_path,
                               const std::filesystem::path& y_path);

}  // namespace hadamard::io
