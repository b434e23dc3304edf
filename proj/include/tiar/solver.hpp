#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tiar/restart.hpp"

namespace tiar {

enum class RestartStrategy { SemiExplicit, Implicit };

struct SolverConfig {
  Index m = 30;           // max factorization length
  Index p = 6;            // wanted Ritz values
  int max_restarts = 20;
  double conv_tol = 1e-10;
  double drop_tol = 1e-14; // compression drop tolerance
  double lock_tol_rel = 1e-8;
  RestartStrategy strategy = RestartStrategy::Implicit;
  MdVariant md_variant = MdVariant::SumForm;
  /// Empty: deterministic normalized all-ones start (or seeded random
  /// when random_start is set).
  Vector start_vector;
  bool random_start = false;
  unsigned long seed = 1;
  /// Wanted Ritz values: largest |mu| by default (NEP eigenvalues
  /// nearest the disk center), or nearest to target_lambda when set.
  std::optional<Complex> target_lambda;
  /// Measure compression errors and factorization residuals each cycle
  /// (desk-scale diagnostics backing the bound checks).
  bool audit_bounds = true;
  double merge_tol = 1e-8; // duplicate eigenvalue merge, relative
};

/// Hard errors throw; soft issues (thick-restart guidance) come back as
/// warnings.
std::vector<std::string> validate(const SolverConfig& config);

struct TraceEntry {
  int iteration = 0;
  Index p_l = 0;
  Index r = 0;
  Index d = 0;
  double min_estimate = 0.0;
  double max_estimate = 0.0;
  std::size_t bytes = 0;
  std::size_t direction_bytes = 0;
  double seconds = 0.0;
};

struct EigenPair {
  Complex lambda;
  Vector v;
  double residual = 0.0;
};

struct SolveResult {
  std::vector<EigenPair> eigenpairs;
  std::vector<TraceEntry> trace;
  std::vector<CompressionReport> svd_reports;
  std::vector<CompressionReport> degree_reports;
  bool converged = false;
  bool breakdown = false;
  int restarts = 0;
  Index r_max = 0;
  /// residual_check-based audit trail, one entry per implicit restart:
  /// {before compression, after svd, after degree truncation}.
  std::vector<std::array<double, 3>> residual_audit;
};

/// Outer restart loop: expand to m, extract Ritz pairs, restart by the
/// configured strategy (implicit restarts are followed by svd and
/// degree compression), until p pairs converge or the restart budget is
/// spent.
SolveResult solve(const NepProblem& problem, const SolverConfig& config);

struct ComplexityEstimate {
  double flops_per_step;
  double memory_bytes;
  double memory_bytes_lower_bound;
};

/// The d*r*n per-step work estimate and the strategy memory formulas
/// (O(nm+np) semi-explicit; O(n r_max) with r_max >= m-p implicit).
ComplexityEstimate estimate_complexity(const SolverConfig& config,
                                       const NepProblem& problem);

} // namespace tiar
