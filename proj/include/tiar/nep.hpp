#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "tiar/types.hpp"

namespace tiar {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// One term of the sum-of-products split M(lambda) = sum_i T_i f_i(lambda).
/// `matrix_fn` evaluates the same scalar function on a (small) square
/// matrix argument, which is what the exponential-direction machinery
/// consumes.
struct SumFormTerm {
  SparseMatrix coeff;
  std::function<Complex(Complex)> scalar;
  std::function<Matrix(const Matrix&)> matrix_fn;
  double coeff_frob = 0.0;
};

enum class MdVariant { SumForm, Series };

/// Truncation policy for the operator Taylor tail: stop once the term
/// norm bound stays below tol_factor * ||c|| for `consecutive` terms,
/// give up at max_terms.
struct SeriesOptions {
  double tol_factor = 1e-16;
  int max_terms = 500;
  int consecutive = 3;
};

/// Abstract nonlinear eigenvalue problem M(lambda) v = 0 with M analytic
/// on an open disk of radius analyticity_radius() centered at the origin
/// and M(0) invertible. Instances are immutable after construction and
/// safe to share across threads (the M(0) factorization and the cached
/// norm estimates are computed up front and only read afterwards).
class NepProblem {
public:
  virtual ~NepProblem() = default;

  Index dim() const { return n_; }

  /// Radius of the analyticity disk; +inf for entire functions.
  double analyticity_radius() const { return radius_; }

  /// Solves M(0) V = X.
  virtual Matrix m0_solve(const Matrix& X) const = 0;

  /// Applies the Taylor coefficient M_i := M^(i)(0): returns M_i X.
  virtual Matrix mi_apply(int i, const Matrix& X) const = 0;

  /// Applies M(lambda) to X.
  virtual Matrix m_apply(Complex lambda, const Matrix& X) const = 0;

  /// Upper bound on ||M^(i)(0)||_2 for i >= 1. The default uses a Cauchy
  /// estimate over the sum form; concrete problems override with exact
  /// derivative tables where available.
  virtual double derivative_norm_bound(int i) const;

  /// The sum-of-products split, when one is available.
  virtual const std::vector<SumFormTerm>* sum_form() const { return nullptr; }

  /// Estimate of ||M(0)^{-1}||_2 by inverse power iteration (cached).
  double m0_inverse_norm() const { return m0_inv_norm_; }

  /// max over |lambda| = radius of ||M(lambda)||_F, sampled on the circle.
  double boundary_norm(double radius, int samples = 32) const;

  /// The tail of the operator Taylor action applied to a vector:
  ///   Md(Y, S) c = sum_{i=d+1..inf} M_i Y S^i c / i!.
  /// The SumForm route evaluates sum_i T_i Y f_i(S) c minus the partial
  /// Taylor sum through degree d; the Series route sums the tail
  /// directly under `series` truncation.
  Vector md_apply(int d, const Matrix& Y, const Matrix& S, const Vector& c,
                  MdVariant variant, const SeriesOptions& series = {}) const;

  /// Relative residual ||M(lambda) v|| / (||v|| * scale(lambda)) where
  /// scale is sum_i ||T_i||_F |f_i(lambda)| when a sum form exists and
  /// ||M(lambda)||_F otherwise.
  double residual(Complex lambda, const Vector& v) const;

protected:
  NepProblem(Index n, double radius)
      : n_(n), radius_(radius) {}

  /// Called by subclass constructors once m0_solve is functional.
  void finalize_caches();

  /// Frobenius norm of M(lambda); default materializes column by column.
  virtual double m_frobenius(Complex lambda) const;

private:
  void check_spectrum_in_disk(const Matrix& S) const;

  Index n_;
  double radius_;
  double m0_inv_norm_ = 0.0;
};

/// Estimate of the spectral norm of a sparse matrix by power iteration
/// on A^H A (within a few percent for the iteration counts used here).
double spectral_norm_estimate(const SparseMatrix& a, int max_iters = 200,
                              double rel_tol = 1e-6);

/// Delay eigenvalue problem
///   M(lambda) = -lambda^2 I + lambda A1 + A0 + exp(-lambda) A2 + I.
/// Derivative table: M_0 = A0 + A2 + I, M_1 = A1 - A2, M_2 = -2I + A2,
/// M_i = (-1)^i A2 for i >= 3.
class DepInstance : public NepProblem {
public:
  DepInstance(SparseMatrix a0, SparseMatrix a1, SparseMatrix a2);

  Matrix m0_solve(const Matrix& X) const override;
  Matrix mi_apply(int i, const Matrix& X) const override;
  Matrix m_apply(Complex lambda, const Matrix& X) const override;
  double derivative_norm_bound(int i) const override;
  const std::vector<SumFormTerm>* sum_form() const override {
    return &terms_;
  }

  const SparseMatrix& a0() const { return a0_; }
  const SparseMatrix& a1() const { return a1_; }
  const SparseMatrix& a2() const { return a2_; }

private:
  SparseMatrix a0_, a1_, a2_, m0_;
  Eigen::SparseLU<SparseMatrix> m0_lu_;
  std::vector<SumFormTerm> terms_;
  double a2_norm_ = 0.0;
  double m1_norm_ = 0.0;
  double m2_norm_ = 0.0;
};

/// Polynomial problem M(lambda) = sum_{i=0..q} lambda^i K_i, the
/// truncated-polynomial instance used by the oracles. Taylor
/// coefficients are exact: M_i = i! K_i for i <= q, zero beyond.
class PolynomialNep : public NepProblem {
public:
  explicit PolynomialNep(std::vector<Matrix> coeffs);

  Matrix m0_solve(const Matrix& X) const override;
  Matrix mi_apply(int i, const Matrix& X) const override;
  Matrix m_apply(Complex lambda, const Matrix& X) const override;
  double derivative_norm_bound(int i) const override;
  const std::vector<SumFormTerm>* sum_form() const override {
    return &terms_;
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const Matrix& coeff(int i) const { return coeffs_.at(i); }

private:
  std::vector<Matrix> coeffs_;
  Eigen::PartialPivLU<Matrix> k0_lu_;
  std::vector<SumFormTerm> terms_;
  std::vector<double> deriv_norms_;
};

/// Generated delay problem on a grid x grid interior mesh of the unit
/// square (n = grid^2): A0 couples neighbors through a scaled 5-point
/// stencil, A1 is a skew first-difference transport term and A2 a
/// spatially varying delay feedback. Coefficients are fixed so the
/// benchmark runs are deterministic.
std::unique_ptr<DepInstance> make_grid_dep(Index grid);

} // namespace tiar
