#pragma once

#include <cstddef>

#include "tiar/types.hpp"

namespace tiar {

/// Coefficients of a single tensor-structured column expressed in the
/// directions of some TensorBasis. Polynomial coefficients are stored
/// fused: entry (degree i, direction l) sits at index l + poly_dirs * i,
/// i = 0 being the constant term.
struct BasisColumn {
  Index rows = 0;
  Index poly_dirs = 0;
  Index exp_dirs = 0;
  Vector a; // rows * poly_dirs
  Vector b; // rows * exp_dirs
  Vector c; // exp_dirs

  Complex& poly(Index i, Index l) { return a(l + poly_dirs * i); }
  Complex poly(Index i, Index l) const { return a(l + poly_dirs * i); }
  Complex& locked(Index i, Index l) { return b(l + exp_dirs * i); }
  Complex locked(Index i, Index l) const { return b(l + exp_dirs * i); }

  void scale(Complex s) {
    a *= s;
    b *= s;
    c *= s;
  }
};

/// A matrix-valued tensor structured function
///
///   Psi(theta) = P_{d-1}(theta) ( sum_l a_{:,:,l} (x) z_l
///                               + sum_l b_{:,:,l} (x) w_l )
///                + Y exp_{d-1}(theta S) C
///
/// held as the direction matrices (Z, W, Y, S) plus coefficient tensors
/// (a, b, C). Coefficient row i (0-based) carries the theta^i monomial;
/// exp_{d-1}(theta S) is the exponential remainder sum_{i>=d}
/// theta^i S^i / i!. The tensors are stored with the degree and
/// direction indices fused, (l + r*i) x k column-major, so that the
/// slice unfoldings used by compression are stride views.
class TensorBasis {
public:
  TensorBasis() = default;

  /// Single constant column v/||v|| in polynomial-only form.
  static TensorBasis constant_start(const Vector& v);

  /// Polynomial-only basis from direction matrix Z and fused
  /// coefficients a ((r*rows) x k).
  static TensorBasis polynomial(Matrix Z, Matrix a, Index rows);

  /// Pure exponential basis Y exp(theta S) C with one polynomial row:
  /// the constant part Y C is re-expressed on the orthonormal W.
  static TensorBasis exponential(Matrix W, Matrix Y, Matrix S, Matrix C);

  Index n() const { return n_; }
  Index cols() const { return C_.cols() > 0 ? C_.cols() : a_.cols(); }
  Index poly_dirs() const { return Z_.cols(); }
  Index exp_dirs() const { return W_.cols(); }
  Index rows() const { return rows_; }
  bool polynomial_only() const { return exp_dirs() == 0; }
  bool empty() const { return cols() == 0; }

  const Matrix& Z() const { return Z_; }
  const Matrix& W() const { return W_; }
  const Matrix& Y() const { return Y_; }
  const Matrix& S() const { return S_; }
  const Matrix& C() const { return C_; }
  /// Fused polynomial coefficients, (r*rows) x k.
  const Matrix& poly_coeffs() const { return a_; }
  /// Fused locked-direction coefficients, (p*rows) x k.
  const Matrix& locked_coeffs() const { return b_; }

  /// Degree slice A_i = (a_{i,:,:})^T in R^{r x k} as a stride view.
  Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> poly_slice(Index i) const;
  Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> locked_slice(Index i) const;

  /// Concatenated unfolding [A_1, ..., A_rows] in R^{r x (rows*k)}.
  Matrix poly_unfolding() const;

  BasisColumn column(Index j) const;
  void append_column(const BasisColumn& col);

  /// Adds direction z (assumed unit and orthogonal to [Z, W]); existing
  /// columns get zero coefficients on it.
  void add_poly_direction(const Vector& z);

  /// Orthogonalization coefficients h_j = <psi_j, phi> of a column
  /// sharing this basis' directions and degree.
  Vector inner_products(const BasisColumn& phi) const;

  /// Function norm ||phi|| under the Taylor-coefficient inner product.
  double norm(const BasisColumn& phi) const;

  /// phi -= Psi h in coefficient space.
  void subtract_combination(BasisColumn& phi, const Vector& h) const;

  /// Basis with coefficients (aM, bM, CM); directions unchanged.
  TensorBasis linear_combine(const Matrix& m) const;

  /// Re-expresses the same function with one more polynomial row,
  /// moving the theta^rows exponential term onto the W directions.
  void raise_degree();

  /// Pointwise values Psi(theta) in C^{n x k}.
  Matrix evaluate(Complex theta) const;

  /// Gram matrix of the columns under the function inner product.
  Matrix gram() const;

  /// Exact stored element count times element size, in bytes.
  std::size_t memory_footprint() const;
  /// Bytes spent on the n-row direction matrices Z, W, Y only.
  std::size_t direction_footprint() const;

  /// Pairwise exponential tails sum_{i>=start} (S^i/i! C1)^H Y^H Y
  /// (S^i/i! C2); zero matrix when there is no exponential part.
  /// start < 0 selects rows().
  Matrix exp_tail_gram(const Matrix& c1, const Matrix& c2,
                       Index start = -1) const;

  /// Replaces the polynomial block after SVD compression.
  void set_poly(Matrix Z, Matrix a);
  /// Drops coefficient rows beyond new_rows (polynomial-only).
  void truncate_rows(Index new_rows);

private:
  Index n_ = 0;
  Index rows_ = 0;
  Matrix Z_, W_, Y_, S_;
  Matrix a_, b_, C_;
};

} // namespace tiar
