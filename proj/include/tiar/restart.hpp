#pragma once

#include <functional>

#include "tiar/schur.hpp"

namespace tiar {

inline constexpr double kEulerGamma = 0.57721566490153286;

/// Audit data of one compression step: retained spectrum, size changes,
/// the a-priori error bounds, and (when measured at desk scale) the
/// actual basis perturbation and residual growth. The decay constant
/// c_hat is the empirical max_i ||a_{i,:,:}|| (i-1)!; the analytic
/// Krylov-matrix constant is far too pessimistic to report.
struct CompressionReport {
  RealVector sigma;
  Index r_before = 0, r_after = 0;
  Index d_before = 0, d_after = 0;
  double sigma_dropped = 0.0;
  double bound_errV = 0.0;
  double bound_errBV = 0.0;
  double bound_degree_basis = 0.0;
  double bound_degree_residual = 0.0;
  double measured_errV = -1.0;
  double measured_residual_increase = -1.0;
  double c_hat = 0.0;
  double C_d = 0.0;
  double C_s = 0.0;
  int s = 0;
  bool truncated = true; // false: degree criterion never held (no-op)
};

struct RestartOutcome {
  TiarFactorization fact;
  Index p_l = 0;        // locked (converged) count
  Index p = 0;          // kept count
  double discarded_norm = 0.0;
  bool reordering_warning = false;
};

/// Semi-explicit restart: locks the converged invariant pair in pure
/// exponential form and restarts from f(theta) = Ytilde exp(theta Sf)
/// e_{p_l+1}, Sf = [R11 F; 0 H]^{-1}. The polynomial part is reset
/// (r = 0, one coefficient row).
RestartOutcome semi_explicit_restart(
    const TiarFactorization& fact,
    const std::function<RitzClass(Complex)>& classify,
    double lock_tol_rel = 1e-8);

/// Krylov-Schur contraction to length p: kept columns are rotated by
/// P I_{m,p} blkdiag(I_{p_l}, Q), the residual column survives, and the
/// coupling under the converged block is locked to zero.
/// Polynomial-only mode.
RestartOutcome implicit_restart(
    const TiarFactorization& fact,
    const std::function<RitzClass(Complex)>& classify,
    double lock_tol_rel = 1e-8);

/// Truncated-SVD compression of the unfolding [A_1,...,A_d]: directions
/// with singular values <= eps are dropped, Z <- Z U_1, A_i <- S_1
/// V_i^H. Reports the basis bound sqrt(rows*cols) sigma and the
/// factorization-residual bound sqrt(k) (C_d + C_s) sigma.
/// Polynomial-only mode.
CompressionReport svd_compress(TiarFactorization& fact, double eps,
                               const NepProblem& problem,
                               bool measure = false);

/// Degree truncation: drops trailing coefficient rows once
/// (max_{i>=dnew} ||M_i||) ||M0^{-1}|| (d-dnew)/dnew! < eps. Returns
/// truncated = false (input unchanged) when the criterion never holds,
/// which is the expected outcome for non-decaying Taylor coefficients.
CompressionReport degree_truncate(TiarFactorization& fact, double eps,
                                  const NepProblem& problem);

struct DecayDiagnostics {
  RealVector slice_norms; // ||a_{i,:,:}||_2 per degree row
  RealVector sigma;       // singular values of the unfolding
  double c_hat = 0.0;     // max_i slice_norms(i) * i!   (0-based rows)
  bool sv_bound_check = true;
};

/// Measures the factorial decay of the coefficient slices and verifies
/// the singular-value decay bound on the unfolding (vacuously true when
/// the factorization is too short for the bound to apply).
DecayDiagnostics decay_diagnostics(const TiarFactorization& fact);

} // namespace tiar
