#pragma once

#include "tiar/nep.hpp"
#include "tiar/tensor_basis.hpp"

namespace tiar {

struct ExpandOptions {
  MdVariant md_variant = MdVariant::SumForm;
  SeriesOptions series;
  /// Lucky-breakdown threshold, relative to the norm of the function
  /// being orthogonalized.
  double breakdown_tol = 1e-12;
  /// New-direction deflation threshold, relative to ||z~||.
  double deflation_tol = 1e-14;
  /// Debug knob: negates the new constant term. Exists so the
  /// companion-equivalence harness can prove it detects a broken sign.
  bool flip_ztilde_sign = false;
};

/// Arnoldi-type factorization B Psi_k = Psi_{k+1} Hbar_k with the basis
/// held as a tensor structured function. residual_budget accumulates
/// the discards committed by locking and compression, so the
/// factorization identity holds up to (roundoff + residual_budget).
struct TiarFactorization {
  TensorBasis basis; // length()+1 columns
  Matrix H;          // (length()+1) x length()
  double residual_budget = 0.0;

  Index length() const { return H.cols(); }
};

/// Length-0 factorization from a constant starting function v/||v||.
TiarFactorization make_start(const Vector& v);

struct OperatorAction {
  BasisColumn column;   // degree basis.rows()+1, on (possibly) r+1 dirs
  Vector new_direction; // empty when deflated
  bool deflated = false;
};

/// Applies the linearized operator to basis column `col`: shifts the
/// polynomial rows (antiderivative), solves S c~ = c for the
/// exponential part and assembles the new constant term
///   z~ = -M0^{-1} ( Md(Y,S) c~ + sum_{i=1..d} M_i x_{+,i} ).
/// The orthogonal complement of z~ against [Z, W] becomes a candidate
/// new direction; a deflated z~ leaves the direction count unchanged.
OperatorAction apply_operator(const TensorBasis& basis,
                              const NepProblem& problem, Index col,
                              const ExpandOptions& opts = {});

struct Orthogonalized {
  Vector h;
  double beta = 0.0;
  BasisColumn q; // phi_perp / beta
};

/// Gram-Schmidt in coefficient space with one unconditional
/// reorthogonalization pass. Throws Breakdown when the complement norm
/// falls below breakdown_tol times the input norm.
Orthogonalized orthogonalize(const TensorBasis& basis, BasisColumn phi,
                             double breakdown_tol = 1e-12);

/// Runs Arnoldi steps until length() == target (Algorithm: act, raise
/// degree, orthogonalize, append). On Breakdown the factorization is
/// left consistent at its current length and the error propagates.
void expand(TiarFactorization& fact, Index target, const NepProblem& problem,
            const ExpandOptions& opts = {});

/// Norm of B Psi_k - Psi_{k+1} Hbar_k measured by materializing the
/// Taylor coefficient stacks (plus exponential tails). Desk-scale
/// diagnostic of the defining identity.
double residual_check(const TiarFactorization& fact, const NepProblem& problem,
                      const ExpandOptions& opts = {});

} // namespace tiar
