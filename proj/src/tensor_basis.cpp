#include "tiar/tensor_basis.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace tiar {

namespace {

// Stop threshold and term cap for the exponential tail sums.
constexpr double kTailThreshold = 1e-18;
constexpr int kTailMaxTerms = 500;

} // namespace

TensorBasis TensorBasis::constant_start(const Vector& v) {
  double nv = v.norm();
  if (nv == 0.0) {
    raise(ErrorCode::InvalidArgument, "start vector must be nonzero");
  }
  TensorBasis basis;
  basis.n_ = v.size();
  basis.rows_ = 1;
  basis.Z_ = v / nv;
  basis.a_ = Matrix::Ones(1, 1);
  basis.W_ = Matrix(v.size(), 0);
  basis.Y_ = Matrix(v.size(), 0);
  basis.S_ = Matrix(0, 0);
  basis.b_ = Matrix(0, 1);
  basis.C_ = Matrix(0, 1);
  return basis;
}

TensorBasis TensorBasis::polynomial(Matrix Z, Matrix a, Index rows) {
  TensorBasis basis;
  basis.n_ = Z.rows();
  basis.rows_ = rows;
  if (a.rows() != Z.cols() * rows) {
    raise(ErrorCode::InvalidArgument, "fused coefficient shape mismatch");
  }
  basis.Z_ = std::move(Z);
  basis.a_ = std::move(a);
  basis.W_ = Matrix(basis.n_, 0);
  basis.Y_ = Matrix(basis.n_, 0);
  basis.S_ = Matrix(0, 0);
  basis.b_ = Matrix(0, basis.a_.cols());
  basis.C_ = Matrix(0, basis.a_.cols());
  return basis;
}

TensorBasis TensorBasis::exponential(Matrix W, Matrix Y, Matrix S, Matrix C) {
  TensorBasis basis;
  basis.n_ = W.rows();
  basis.rows_ = 1;
  basis.b_ = W.adjoint() * Y * C;
  basis.W_ = std::move(W);
  basis.Y_ = std::move(Y);
  basis.S_ = std::move(S);
  basis.C_ = std::move(C);
  basis.Z_ = Matrix(basis.n_, 0);
  basis.a_ = Matrix(0, basis.C_.cols());
  return basis;
}

Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>
TensorBasis::poly_slice(Index i) const {
  const Index r = poly_dirs();
  return {a_.data() + r * i, r, cols(), Eigen::OuterStride<>(r * rows_)};
}

Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>
TensorBasis::locked_slice(Index i) const {
  const Index p = exp_dirs();
  return {b_.data() + p * i, p, cols(), Eigen::OuterStride<>(p * rows_)};
}

Matrix TensorBasis::poly_unfolding() const {
  const Index r = poly_dirs();
  const Index k = cols();
  Matrix unf(r, rows_ * k);
  for (Index i = 0; i < rows_; ++i) {
    unf.middleCols(i * k, k) = poly_slice(i);
  }
  return unf;
}

BasisColumn TensorBasis::column(Index j) const {
  BasisColumn col;
  col.rows = rows_;
  col.poly_dirs = poly_dirs();
  col.exp_dirs = exp_dirs();
  col.a = a_.col(j);
  col.b = b_.col(j);
  col.c = C_.col(j);
  return col;
}

void TensorBasis::append_column(const BasisColumn& col) {
  if (col.rows != rows_ || col.poly_dirs != poly_dirs() ||
      col.exp_dirs != exp_dirs()) {
    raise(ErrorCode::InvalidArgument, "column/basis shape mismatch");
  }
  const Index k = cols();
  a_.conservativeResize(Eigen::NoChange, k + 1);
  b_.conservativeResize(Eigen::NoChange, k + 1);
  C_.conservativeResize(Eigen::NoChange, k + 1);
  a_.col(k) = col.a;
  b_.col(k) = col.b;
  C_.col(k) = col.c;
}

void TensorBasis::add_poly_direction(const Vector& z) {
  const Index r = poly_dirs();
  const Index k = cols();
  Matrix fresh = Matrix::Zero((r + 1) * rows_, k);
  for (Index i = 0; i < rows_; ++i) {
    fresh.middleRows(i * (r + 1), r) = a_.middleRows(i * r, r);
  }
  a_ = std::move(fresh);
  Z_.conservativeResize(Eigen::NoChange, r + 1);
  Z_.col(r) = z;
}

Matrix TensorBasis::exp_tail_gram(const Matrix& c1, const Matrix& c2,
                                  Index start) const {
  const Index p = exp_dirs();
  Matrix out = Matrix::Zero(c1.cols(), c2.cols());
  if (p == 0) {
    return out;
  }
  if (start < 0) {
    start = rows_;
  }
  const Matrix g = Y_.adjoint() * Y_;
  const double scale =
      g.norm() * std::max(c1.norm(), 1e-300) * std::max(c2.norm(), 1e-300);

  // P_i = S^i / i!, walked up from i = 0; terms enter from i = start.
  Matrix pi = Matrix::Identity(p, p);
  for (Index i = 1; i < start; ++i) {
    pi = pi * S_ / double(i);
  }
  int consecutive_small = 0;
  for (int step = 0; step < kTailMaxTerms; ++step) {
    const Index i = start + step;
    if (i > 0) {
      pi = pi * S_ / double(i);
    }
    const Matrix u1 = pi * c1;
    const Matrix u2 = pi * c2;
    out.noalias() += u1.adjoint() * (g * u2);
    const double bound = pi.squaredNorm() * scale;
    if (bound < kTailThreshold) {
      if (++consecutive_small >= 2) {
        return out;
      }
    } else {
      consecutive_small = 0;
    }
  }
  raise(ErrorCode::SeriesDivergence,
        "exponential tail did not converge within the term cap");
}

Vector TensorBasis::inner_products(const BasisColumn& phi) const {
  if (phi.rows != rows_) {
    raise(ErrorCode::InvalidArgument,
          "inner_products requires matching degree");
  }
  Vector h = Vector::Zero(cols());
  if (a_.size() > 0 && phi.a.size() > 0) {
    h.noalias() += a_.adjoint() * phi.a;
  }
  if (b_.size() > 0 && phi.b.size() > 0) {
    h.noalias() += b_.adjoint() * phi.b;
  }
  if (exp_dirs() > 0) {
    h += exp_tail_gram(C_, phi.c);
  }
  return h;
}

double TensorBasis::norm(const BasisColumn& phi) const {
  double sq = phi.a.squaredNorm() + phi.b.squaredNorm();
  if (exp_dirs() > 0) {
    sq += exp_tail_gram(phi.c, phi.c)(0, 0).real();
  }
  return std::sqrt(std::max(sq, 0.0));
}

void TensorBasis::subtract_combination(BasisColumn& phi,
                                       const Vector& h) const {
  if (phi.a.size() > 0) {
    phi.a.noalias() -= a_ * h;
  }
  if (phi.b.size() > 0) {
    phi.b.noalias() -= b_ * h;
  }
  if (phi.c.size() > 0) {
    phi.c.noalias() -= C_ * h;
  }
}

TensorBasis TensorBasis::linear_combine(const Matrix& m) const {
  if (m.rows() != cols()) {
    raise(ErrorCode::InvalidArgument, "linear_combine: shape mismatch");
  }
  TensorBasis out = *this;
  out.a_ = a_ * m;
  out.b_ = b_ * m;
  out.C_ = C_ * m;
  return out;
}

void TensorBasis::raise_degree() {
  const Index k = cols();
  const Index r = poly_dirs();
  const Index p = exp_dirs();

  a_.conservativeResize(r * (rows_ + 1), Eigen::NoChange);
  if (r > 0) {
    a_.bottomRows(r).setZero();
  }

  b_.conservativeResize(p * (rows_ + 1), Eigen::NoChange);
  if (p > 0) {
    // E = W^H Y S^rows C / rows!; the theta^rows exponential term moves
    // onto the locked directions.
    Matrix pi = Matrix::Identity(p, p);
    for (Index i = 1; i <= rows_; ++i) {
      pi = pi * S_ / double(i);
    }
    b_.bottomRows(p) = W_.adjoint() * (Y_ * (pi * C_));
  }
  ++rows_;
}

Matrix TensorBasis::evaluate(Complex theta) const {
  Matrix out = Matrix::Zero(n_, cols());
  Complex power = 1.0;
  for (Index i = 0; i < rows_; ++i) {
    if (poly_dirs() > 0) {
      out.noalias() += power * (Z_ * poly_slice(i));
    }
    if (exp_dirs() > 0) {
      out.noalias() += power * (W_ * locked_slice(i));
    }
    power *= theta;
  }
  const Index p = exp_dirs();
  if (p > 0) {
    // Tail sum_{i>=rows} theta^i S^i / i!, summed directly.
    Matrix term = Matrix::Identity(p, p);
    for (Index i = 1; i < rows_; ++i) {
      term = term * (theta * S_) / double(i);
    }
    Matrix tail = Matrix::Zero(p, p);
    int consecutive_small = 0;
    for (int step = 0; step < 4 * kTailMaxTerms; ++step) {
      const Index i = rows_ + step;
      if (i > 0) {
        term = term * (theta * S_) / double(i);
      }
      tail += term;
      if (term.norm() <= 1e-18 * (tail.norm() + 1.0)) {
        if (++consecutive_small >= 2) {
          break;
        }
      } else {
        consecutive_small = 0;
      }
    }
    out.noalias() += Y_ * (tail * C_);
  }
  return out;
}

Matrix TensorBasis::gram() const {
  Matrix g = Matrix::Zero(cols(), cols());
  if (a_.size() > 0) {
    g.noalias() += a_.adjoint() * a_;
  }
  if (b_.size() > 0) {
    g.noalias() += b_.adjoint() * b_;
  }
  if (exp_dirs() > 0) {
    g += exp_tail_gram(C_, C_);
  }
  return g;
}

std::size_t TensorBasis::memory_footprint() const {
  const std::size_t elems = std::size_t(Z_.size()) + std::size_t(W_.size()) +
                            std::size_t(Y_.size()) + std::size_t(S_.size()) +
                            std::size_t(a_.size()) + std::size_t(b_.size()) +
                            std::size_t(C_.size());
  return elems * sizeof(Complex);
}

std::size_t TensorBasis::direction_footprint() const {
  const std::size_t elems = std::size_t(Z_.size()) + std::size_t(W_.size()) +
                            std::size_t(Y_.size());
  return elems * sizeof(Complex);
}

void TensorBasis::set_poly(Matrix Z, Matrix a) {
  if (Z.cols() * rows_ != a.rows() || a.cols() != cols()) {
    raise(ErrorCode::InvalidArgument, "set_poly: shape mismatch");
  }
  Z_ = std::move(Z);
  a_ = std::move(a);
}

void TensorBasis::truncate_rows(Index new_rows) {
  if (!polynomial_only()) {
    raise(ErrorCode::InvalidArgument,
          "degree truncation requires polynomial-only form");
  }
  if (new_rows >= rows_) {
    return;
  }
  a_ = a_.topRows(poly_dirs() * new_rows).eval();
  rows_ = new_rows;
}

} // namespace tiar
