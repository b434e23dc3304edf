#include "tiar/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

namespace tiar {

namespace {

Vector starting_vector(const NepProblem& problem, const SolverConfig& config) {
  if (config.start_vector.size() > 0) {
    if (config.start_vector.size() != problem.dim()) {
      raise(ErrorCode::InvalidArgument, "start vector dimension mismatch");
    }
    return config.start_vector;
  }
  if (config.random_start) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> dist;
    Vector v(problem.dim());
    for (Index i = 0; i < v.size(); ++i) {
      v(i) = Complex(dist(rng), dist(rng));
    }
    return v;
  }
  return Vector::Ones(problem.dim());
}

// Ranks Ritz indices by the wanted-value policy: largest |mu| first, or
// nearest 1/mu to the target.
std::vector<Index> ranked_indices(const RitzReport& report,
                                  const SolverConfig& config) {
  std::vector<Index> order(size_t(report.values.size()));
  std::iota(order.begin(), order.end(), Index(0));
  if (config.target_lambda) {
    const Complex target = *config.target_lambda;
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      return std::abs(report.nep_values(a) - target) <
             std::abs(report.nep_values(b) - target);
    });
  } else {
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      return std::abs(report.values(a)) > std::abs(report.values(b));
    });
  }
  return order;
}

struct Selection {
  std::vector<Index> kept; // ranked, size min(p, k)
  Index p_l = 0;
  std::function<RitzClass(Complex)> classify;
};

Selection select(const RitzReport& report, const SolverConfig& config) {
  Selection sel;
  const auto order = ranked_indices(report, config);
  const size_t keep = std::min<size_t>(size_t(config.p), order.size());
  sel.kept.assign(order.begin(), order.begin() + long(keep));
  for (Index idx : sel.kept) {
    if (report.converged[size_t(idx)]) {
      ++sel.p_l;
    }
  }

  // A Schur diagonal entry is classified through its nearest Ritz value.
  std::vector<char> cls(size_t(report.values.size()), 2);
  for (Index idx : sel.kept) {
    cls[size_t(idx)] = report.converged[size_t(idx)] ? 0 : 1;
  }
  Vector values = report.values;
  sel.classify = [values, cls](Complex z) {
    Index best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < values.size(); ++j) {
      const double d = std::abs(values(j) - z);
      if (d < dist) {
        dist = d;
        best = j;
      }
    }
    switch (cls[size_t(best)]) {
      case 0:
        return RitzClass::Converged;
      case 1:
        return RitzClass::Wanted;
      default:
        return RitzClass::Unwanted;
    }
  };
  return sel;
}

void harvest_eigenpairs(const TiarFactorization& fact,
                        const NepProblem& problem, const RitzReport& report,
                        const SolverConfig& config, SolveResult& result) {
  const Index k = fact.length();
  if (k < 1) {
    return;
  }
  const auto order = ranked_indices(report, config);
  const Matrix psi0 = fact.basis.evaluate(0.0).leftCols(k);

  std::vector<EigenPair> pairs;
  for (Index idx : order) {
    if (!report.converged[size_t(idx)]) {
      continue;
    }
    const Complex mu = report.values(idx);
    if (mu == 0.0) {
      continue;
    }
    const Complex lambda = 1.0 / mu;
    Vector v = psi0 * report.vectors.col(idx);
    const double vn = v.norm();
    if (vn == 0.0) {
      continue;
    }
    v /= vn;
    // Merge duplicates (defective clusters re-found after restarts).
    bool duplicate = false;
    for (const auto& seen : pairs) {
      if (std::abs(seen.lambda - lambda) <=
          config.merge_tol * std::max(1.0, std::abs(lambda))) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      continue;
    }
    const double res = problem.residual(lambda, v);
    pairs.push_back({lambda, std::move(v), res});
    if (Index(pairs.size()) >= config.p) {
      break;
    }
  }
  result.eigenpairs = std::move(pairs);
}

} // namespace

std::vector<std::string> validate(const SolverConfig& config) {
  if (config.p < 1 || config.p >= config.m) {
    raise(ErrorCode::InvalidArgument, "need 1 <= p < m");
  }
  if (config.m > 512) {
    raise(ErrorCode::InvalidArgument, "factorization length cap is 512");
  }
  if (config.conv_tol <= 0.0 || config.drop_tol < 0.0 ||
      config.lock_tol_rel <= 0.0 || config.merge_tol <= 0.0) {
    raise(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  if (config.max_restarts < 0) {
    raise(ErrorCode::InvalidArgument, "max_restarts must be nonnegative");
  }
  std::vector<std::string> warnings;
  if (config.p * 4 < config.m) {
    warnings.push_back(
        "thin restart (p < m/4): the implicit restart may stagnate; "
        "consider a thicker p");
  }
  return warnings;
}

SolveResult solve(const NepProblem& problem, const SolverConfig& config) {
  validate(config);
  ExpandOptions opts;
  opts.md_variant = config.md_variant;

  SolveResult result;
  TiarFactorization fact = make_start(starting_vector(problem, config));
  const auto t0 = std::chrono::steady_clock::now();

  for (int cycle = 0; cycle <= config.max_restarts; ++cycle) {
    try {
      expand(fact, config.m, problem, opts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Breakdown) {
        throw;
      }
      result.breakdown = true;
    }
    result.r_max = std::max(result.r_max, fact.basis.poly_dirs());
    if (fact.length() < 1) {
      break; // immediate breakdown; nothing to report
    }

    RitzReport report = ritz_extract(fact, config.conv_tol);
    Selection sel = select(report, config);

    TraceEntry entry;
    entry.iteration = cycle;
    entry.p_l = sel.p_l;
    entry.r = fact.basis.poly_dirs();
    entry.d = fact.basis.rows();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Index idx : sel.kept) {
      lo = std::min(lo, report.residual_estimates(idx));
      hi = std::max(hi, report.residual_estimates(idx));
    }
    entry.min_estimate = std::isfinite(lo) ? lo : 0.0;
    entry.max_estimate = hi;
    entry.bytes = fact.basis.memory_footprint();
    entry.direction_bytes = fact.basis.direction_footprint();
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.trace.push_back(entry);

    const bool done = sel.p_l >= std::min<Index>(config.p, fact.length());
    if (done || result.breakdown || cycle == config.max_restarts) {
      result.converged = done;
      result.restarts = cycle;
      harvest_eigenpairs(fact, problem, report, config, result);
      break;
    }

    if (config.strategy == RestartStrategy::Implicit) {
      RestartOutcome outcome =
          implicit_restart(fact, sel.classify, config.lock_tol_rel);
      fact = std::move(outcome.fact);

      std::array<double, 3> audit = {-1.0, -1.0, -1.0};
      if (config.audit_bounds) {
        audit[0] = residual_check(fact, problem, opts);
      }
      CompressionReport svd_report =
          svd_compress(fact, config.drop_tol, problem, config.audit_bounds);
      if (config.audit_bounds) {
        audit[1] = residual_check(fact, problem, opts);
      }
      CompressionReport degree_report =
          degree_truncate(fact, config.drop_tol, problem);
      if (config.audit_bounds) {
        audit[2] = residual_check(fact, problem, opts);
      }
      svd_report.measured_residual_increase =
          config.audit_bounds ? std::max(audit[1] - audit[0], 0.0) : -1.0;
      degree_report.measured_residual_increase =
          config.audit_bounds ? std::max(audit[2] - audit[1], 0.0) : -1.0;
      result.svd_reports.push_back(std::move(svd_report));
      result.degree_reports.push_back(std::move(degree_report));
      result.residual_audit.push_back(audit);
    } else {
      RestartOutcome outcome =
          semi_explicit_restart(fact, sel.classify, config.lock_tol_rel);
      fact = std::move(outcome.fact);
    }
    result.r_max = std::max(result.r_max, fact.basis.poly_dirs());
  }
  return result;
}

ComplexityEstimate estimate_complexity(const SolverConfig& config,
                                       const NepProblem& problem) {
  const double n = double(problem.dim());
  const double m = double(config.m);
  const double p = double(config.p);
  ComplexityEstimate est;
  // One Arnoldi step touches every (degree row, direction) pair of one
  // column against n-vectors: c * d * r * n with d, r <= m.
  est.flops_per_step = 8.0 * m * m * n;
  if (config.strategy == RestartStrategy::SemiExplicit) {
    est.memory_bytes = sizeof(Complex) * (n * m + n * p);
    est.memory_bytes_lower_bound = est.memory_bytes;
  } else {
    est.memory_bytes = sizeof(Complex) * n * m;
    est.memory_bytes_lower_bound = sizeof(Complex) * n * (m - p);
  }
  return est;
}

} // namespace tiar
