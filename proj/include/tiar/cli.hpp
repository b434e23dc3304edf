#pragma once

#include <memory>
#include <string>

#include "tiar/solver.hpp"

namespace tiar::cli {

/// One benchmark run: problem source, solver configuration, output
/// directory. Problems come from the built-in grid DEP generator, a
/// triple of Matrix Market files, or the built-in polynomial instance.
struct RunSpec {
  std::string problem_kind = "dep"; // dep | mtx | poly
  Index grid = 11;
  std::string a0_path, a1_path, a2_path;
  Index poly_dim = 3;
  int poly_degree = 2;
  SolverConfig config;
  std::string out_dir = "out";
};

/// Exit codes shared by the commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitOracleMismatch = 3;

std::unique_ptr<NepProblem> build_problem(const RunSpec& spec);

/// Merges a flat-key JSON config file into the spec (flags override by
/// being applied afterwards).
void load_config_file(RunSpec& spec, const std::string& path);

/// Runs one solve; writes eigenvalues.csv, trace.csv and summary.json.
int cmd_solve(const RunSpec& spec);

/// Companion-matrix equivalence harness: expands the tensor
/// factorization k steps and replays classical Arnoldi on the explicit
/// companion linearization; reports the max Hessenberg entry difference
/// and Ritz distance. flip_sign negates the new constant term to prove
/// the harness trips on a broken operator.
int cmd_oracle(const RunSpec& spec, Index k, bool flip_sign = false);

/// Runs both restart strategies on the same problem; writes a
/// side-by-side trace and an eigenvalue match report.
int cmd_compare(const RunSpec& spec);

} // namespace tiar::cli
