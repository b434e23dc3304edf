#pragma once

#include "tiar/nep.hpp"

namespace tiar {

/// Explicit companion linearization on stacked Taylor coefficients
/// x = vect(x_0, ..., x_k) in C^{n(k+1)}: block row i >= 1 integrates
/// (I/i on the subdiagonal block) and block row 0 applies
/// -M0^{-1} M_{j+1}/(j+1) to block j. Started from a constant stack,
/// classical Arnoldi on this matrix reproduces the polynomial-only
/// tensor expansion entry by entry, which is what the equivalence
/// harness checks.
SparseMatrix companion_matrix(const NepProblem& problem, Index k);

struct ArnoldiResult {
  Matrix H; // (steps+1) x steps, trimmed on breakdown
  Matrix V; // N x (steps+1)
  bool breakdown = false;
};

/// Plain Arnoldi with one unconditional reorthogonalization pass.
ArnoldiResult classical_arnoldi(const SparseMatrix& a, const Vector& start,
                                Index steps, double breakdown_tol = 1e-12);

} // namespace tiar
