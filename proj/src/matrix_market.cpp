#include "tiar/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

namespace tiar {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void fail(const std::string& name, Index line, const std::string& msg) {
  raise(ErrorCode::InvalidArgument,
        name + ":" + std::to_string(line) + ": " + msg);
}

} // namespace

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::InvalidArgument, "cannot open matrix file: " + path);
  }
  return read_matrix_market(in, path);
}

SparseMatrix read_matrix_market(std::istream& in, const std::string& name) {
  std::string header;
  if (!std::getline(in, header)) {
    fail(name, 1, "empty file");
  }
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    fail(name, 1, "missing %%MatrixMarket matrix banner");
  }
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);

  const bool coordinate = format == "coordinate";
  if (!coordinate && format != "array") {
    fail(name, 1, "unsupported format '" + format + "'");
  }
  const bool complex_field = field == "complex";
  if (!complex_field && field != "real" && field != "integer") {
    fail(name, 1, "unsupported field '" + field + "'");
  }
  const bool symmetric = symmetry == "symmetric";
  const bool hermitian = symmetry == "hermitian";
  const bool skew = symmetry == "skew-symmetric";
  if (!symmetric && !hermitian && !skew && symmetry != "general") {
    fail(name, 1, "unsupported symmetry '" + symmetry + "'");
  }

  Index line_no = 1;
  std::string line;
  auto next_data_line = [&](std::istringstream& ls) {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '%') {
        continue;
      }
      ls = std::istringstream(line);
      return true;
    }
    return false;
  };

  std::istringstream ls;
  if (!next_data_line(ls)) {
    fail(name, line_no, "missing size line");
  }

  Index rows = 0, cols = 0, nnz = 0;
  if (coordinate) {
    if (!(ls >> rows >> cols >> nnz)) {
      fail(name, line_no, "malformed coordinate size line");
    }
  } else {
    if (!(ls >> rows >> cols)) {
      fail(name, line_no, "malformed array size line");
    }
  }
  if (rows <= 0 || cols <= 0) {
    fail(name, line_no, "non-positive dimensions");
  }
  if ((symmetric || hermitian || skew) && rows != cols) {
    fail(name, line_no, "symmetry declared on a non-square matrix");
  }

  std::vector<Eigen::Triplet<Complex>> triplets;
  auto push = [&](Index i, Index j, Complex v) {
    triplets.emplace_back(i, j, v);
    if (i != j) {
      if (symmetric) {
        triplets.emplace_back(j, i, v);
      } else if (hermitian) {
        triplets.emplace_back(j, i, std::conj(v));
      } else if (skew) {
        triplets.emplace_back(j, i, -v);
      }
    }
  };

  if (coordinate) {
    triplets.reserve(static_cast<std::size_t>(nnz) * 2);
    for (Index e = 0; e < nnz; ++e) {
      if (!next_data_line(ls)) {
        fail(name, line_no, "expected " + std::to_string(nnz) + " entries");
      }
      Index i = 0, j = 0;
      double re = 0.0, im = 0.0;
      if (!(ls >> i >> j >> re)) {
        fail(name, line_no, "malformed coordinate entry");
      }
      if (complex_field && !(ls >> im)) {
        fail(name, line_no, "missing imaginary part");
      }
      if (i < 1 || i > rows || j < 1 || j > cols) {
        fail(name, line_no, "index out of range");
      }
      push(i - 1, j - 1, Complex(re, im));
    }
  } else {
    // Array format stores the full (or lower-triangular, if symmetric)
    // matrix column by column.
    for (Index j = 0; j < cols; ++j) {
      const Index i0 = (symmetric || hermitian) ? j : (skew ? j + 1 : 0);
      for (Index i = i0; i < rows; ++i) {
        if (!next_data_line(ls)) {
          fail(name, line_no, "truncated array data");
        }
        double re = 0.0, im = 0.0;
        if (!(ls >> re)) {
          fail(name, line_no, "malformed array entry");
        }
        if (complex_field && !(ls >> im)) {
          fail(name, line_no, "missing imaginary part");
        }
        push(i, j, Complex(re, im));
      }
    }
  }

  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

void write_matrix_market(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) {
    raise(ErrorCode::InvalidArgument, "cannot open for writing: " + path);
  }
  out.imbue(std::locale::classic());
  out.precision(17);
  out << "%%MatrixMarket matrix coordinate complex general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value().real()
          << " " << it.value().imag() << "\n";
    }
  }
}

} // namespace tiar
