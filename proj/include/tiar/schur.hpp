#pragma once

#include <functional>
#include <vector>

#include "tiar/factorization.hpp"

namespace tiar {

/// Ritz data of the leading k x k block of the factorization.
struct RitzReport {
  Vector values;                 // mu_j, eigenvalues of the B-restriction
  Vector nep_values;             // lambda_j = 1/mu_j (inf when mu_j == 0)
  RealVector residual_estimates; // |last row of Hbar . y_j|
  std::vector<bool> converged;   // estimate <= tol * |mu_j|
  Matrix vectors;                // unit eigenvectors of H_k
};

/// Eigen-decomposes H_k and attaches the Krylov residual estimates. The
/// convergence test is relative to the Ritz value magnitude.
RitzReport ritz_extract(const TiarFactorization& fact, double conv_tol);

enum class RitzClass { Converged = 0, Wanted = 1, Unwanted = 2 };

struct OrderedSchur {
  Matrix P; // unitary
  Matrix R; // triangular, diagonal grouped Converged | Wanted | Unwanted
  Index n_converged = 0; // p_l
  Index n_kept = 0;      // p = converged + wanted
  bool reordering_warning = false;
};

/// Ordered complex Schur form P^H H P = R with the diagonal grouped by
/// the classification. Adjacent swaps of equal values are skipped; a
/// residual check flags (but does not reject) an inaccurate reordering.
OrderedSchur ordered_schur(const Matrix& h,
                           const std::function<RitzClass(Complex)>& classify);

struct HessenbergRestore {
  Matrix Q;    // unitary, a2^H Q = beta e_q^H exactly by construction
  Matrix Hess; // Q^H R22 Q, upper Hessenberg, nonneg real subdiagonal
  double beta = 0.0;
};

/// Returns the unitary Q restoring Hessenberg-plus-beta-e^H structure
/// to a trailing Krylov-Schur block (R22, a2). Empty block gives the
/// 0 x 0 identity and beta = ||a2|| = 0.
HessenbergRestore householder_restore(const Matrix& r22, const Vector& a2);

/// Zeros the coupling row under the converged block (entries 0..p_l of
/// the last row of Hbar) and returns the discarded norm. Throws
/// LockRejected when ||a_1|| > lock_tol_rel * ||Hbar||.
double lock(Matrix& hbar, Index p_l, double lock_tol_rel = 1e-8);

} // namespace tiar
