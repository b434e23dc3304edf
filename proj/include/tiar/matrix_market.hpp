#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/SparseCore>

#include "tiar/types.hpp"

namespace tiar {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Reads a Matrix Market file (coordinate or array format; real, integer
/// or complex field). Symmetric / hermitian / skew-symmetric storage is
/// expanded to a general matrix. Throws Error(InvalidArgument) with a
/// diagnostic naming the offending line on malformed input.
SparseMatrix read_matrix_market(const std::string& path);
SparseMatrix read_matrix_market(std::istream& in, const std::string& name);

/// Writes a general complex coordinate .mtx file (used by tests and the
/// benchmark harness to round-trip generated problems).
void write_matrix_market(const std::string& path, const SparseMatrix& m);

} // namespace tiar
