#include "tiar/restart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace tiar {

namespace {

struct SchurPipeline {
  OrderedSchur os;
  HessenbergRestore hr;
  Vector a1; // coupling under the converged block
  Vector a2; // coupling under the wanted block
  Index m = 0, p = 0, p_l = 0;
};

SchurPipeline run_schur_pipeline(
    const TiarFactorization& fact,
    const std::function<RitzClass(Complex)>& classify) {
  SchurPipeline sp;
  sp.m = fact.length();
  if (sp.m < 1) {
    raise(ErrorCode::InvalidArgument, "restart needs a nonempty factorization");
  }
  const Matrix hm = fact.H.topRows(sp.m);
  sp.os = ordered_schur(hm, classify);
  sp.p_l = sp.os.n_converged;
  sp.p = sp.os.n_kept;
  if (sp.p == 0) {
    raise(ErrorCode::InvalidArgument, "classification kept no Ritz values");
  }

  const Eigen::RowVectorXcd coupling = fact.H.row(sp.m) * sp.os.P;
  sp.a1 = coupling.head(sp.p_l).transpose().conjugate();
  sp.a2 = coupling.segment(sp.p_l, sp.p - sp.p_l).transpose().conjugate();
  sp.hr = householder_restore(
      sp.os.R.block(sp.p_l, sp.p_l, sp.p - sp.p_l, sp.p - sp.p_l), sp.a2);
  return sp;
}

// Assembles the contracted (p+1) x p matrix
//   [ R11  F ; 0  H ; a1^H  beta e^H ]
// and locks a1 to zero.
Matrix contracted_hbar(const SchurPipeline& sp, double lock_tol_rel,
                       double* discarded) {
  const Index p = sp.p, p_l = sp.p_l, q = p - p_l;
  Matrix hbar = Matrix::Zero(p + 1, p);
  hbar.topLeftCorner(p_l, p_l) = sp.os.R.topLeftCorner(p_l, p_l);
  if (q > 0) {
    hbar.block(0, p_l, p_l, q) = sp.os.R.block(0, p_l, p_l, q) * sp.hr.Q;
    hbar.block(p_l, p_l, q, q) = sp.hr.Hess;
    hbar(p, p - 1) = sp.hr.beta;
  }
  hbar.row(p).head(p_l) = sp.a1.adjoint();
  *discarded = lock(hbar, p_l, lock_tol_rel);
  return hbar;
}

double row_two_norm(const Matrix& slice) {
  if (slice.size() == 0) {
    return 0.0;
  }
  return slice.jacobiSvd().singularValues()(0);
}

} // namespace

RestartOutcome implicit_restart(
    const TiarFactorization& fact,
    const std::function<RitzClass(Complex)>& classify, double lock_tol_rel) {
  if (!fact.basis.polynomial_only()) {
    raise(ErrorCode::InvalidArgument,
          "implicit restart operates in polynomial-only mode");
  }
  SchurPipeline sp = run_schur_pipeline(fact, classify);
  const Index m = sp.m, p = sp.p, p_l = sp.p_l, q = p - p_l;

  RestartOutcome out;
  out.p = p;
  out.p_l = p_l;
  out.reordering_warning = sp.os.reordering_warning;
  out.fact.H = contracted_hbar(sp, lock_tol_rel, &out.discarded_norm);

  // Basis transform [P I_{m,p} blkdiag(I, Q), e_{m+1}], unitary columns.
  Matrix t = Matrix::Zero(m + 1, p + 1);
  Matrix kept = sp.os.P.leftCols(p);
  if (q > 0) {
    kept.rightCols(q) = (kept.rightCols(q) * sp.hr.Q).eval();
  }
  t.topLeftCorner(m, p) = kept;
  t(m, p) = 1.0;

  out.fact.basis = fact.basis.linear_combine(t);
  out.fact.residual_budget = fact.residual_budget + out.discarded_norm;
  return out;
}

RestartOutcome semi_explicit_restart(
    const TiarFactorization& fact,
    const std::function<RitzClass(Complex)>& classify, double lock_tol_rel) {
  SchurPipeline sp = run_schur_pipeline(fact, classify);
  const Index m = sp.m, p = sp.p, p_l = sp.p_l, q = p - p_l;

  RestartOutcome out;
  out.p = p;
  out.p_l = p_l;
  out.reordering_warning = sp.os.reordering_warning;

  // Locking tolerance applies to the coupling under the converged block
  // exactly as in the contracted form.
  Matrix contracted = contracted_hbar(sp, lock_tol_rel, &out.discarded_norm);

  // Sf = [R11 F; 0 H]^{-1}. A singular block means a Ritz value mu = 0,
  // i.e. a NEP eigenvalue at infinity.
  const Matrix rp = contracted.topRows(p);
  Eigen::FullPivLU<Matrix> lu(rp);
  if (!lu.isInvertible()) {
    raise(ErrorCode::SingularSchurBlock,
          "[R11 F; 0 H] is singular; cannot form the restart exponent");
  }
  const Matrix sf = lu.inverse();

  // Ytilde = Psi_m(0) P I_{m,p} Q, assembled from the constant-term
  // coefficients of the tensor representation.
  Matrix mtx = sp.os.P.leftCols(p);
  if (q > 0) {
    mtx.rightCols(q) = (mtx.rightCols(q) * sp.hr.Q).eval();
  }
  const TensorBasis& basis = fact.basis;
  Matrix psi0 = Matrix::Zero(basis.n(), basis.cols());
  if (basis.poly_dirs() > 0) {
    psi0.noalias() += basis.Z() * basis.poly_slice(0);
  }
  if (basis.exp_dirs() > 0) {
    psi0.noalias() += basis.W() * basis.locked_slice(0);
  }
  const Matrix ytilde = psi0.leftCols(m) * mtx;

  // New structure: W spans Ytilde, the locked pair is Ytilde exp(.Sf)
  // restricted to its first p_l coordinates.
  Eigen::HouseholderQR<Matrix> qr(ytilde);
  Matrix w = qr.householderQ() * Matrix::Identity(basis.n(), p);
  Matrix c0 = Matrix::Identity(p, p_l);
  out.fact.basis = TensorBasis::exponential(std::move(w), ytilde, sf, c0);
  out.fact.H = Matrix::Zero(p_l + 1, p_l);
  out.fact.H.topRows(p_l) = contracted.topLeftCorner(p_l, p_l);

  // Starting function f = Ytilde exp(theta Sf) e_{p_l+1}, orthogonalized
  // against the locked columns.
  BasisColumn f;
  f.rows = 1;
  f.poly_dirs = 0;
  f.exp_dirs = p;
  f.a = Vector(0);
  f.c = Vector::Zero(p);
  f.c(p_l) = 1.0;
  f.b = out.fact.basis.W().adjoint() * (ytilde * f.c);
  try {
    Orthogonalized of = orthogonalize(out.fact.basis, std::move(f), 1e-12);
    out.fact.basis.append_column(of.q);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Breakdown) {
      raise(ErrorCode::NormalizationBreakdown,
            "restart function lies in the locked span");
    }
    throw;
  }

  out.fact.residual_budget = fact.residual_budget + out.discarded_norm;
  return out;
}

CompressionReport svd_compress(TiarFactorization& fact, double eps,
                               const NepProblem& problem, bool measure) {
  if (!fact.basis.polynomial_only()) {
    raise(ErrorCode::InvalidArgument,
          "svd compression operates in polynomial-only mode");
  }
  TensorBasis& basis = fact.basis;
  const Index r = basis.poly_dirs();
  const Index rows = basis.rows();
  const Index ncols = basis.cols();
  const Index klen = fact.length();

  CompressionReport report;
  report.r_before = r;
  report.d_before = rows;
  report.d_after = rows;

  const Matrix unfolding = basis.poly_unfolding();
  Eigen::BDCSVD<Matrix> svd(unfolding,
                            Eigen::ComputeThinU | Eigen::ComputeThinV);
  report.sigma = svd.singularValues();

  Index r_keep = 0;
  while (r_keep < report.sigma.size() && report.sigma(r_keep) > eps) {
    ++r_keep;
  }
  report.r_after = r_keep;
  report.sigma_dropped =
      r_keep < report.sigma.size() ? report.sigma(r_keep) : 0.0;

  // Empirical decay constant max_i ||a_{i,:,:}|| (i-1)!  (1-based rows).
  double c_hat = 0.0;
  double factorial = 1.0;
  for (Index i = 0; i < rows; ++i) {
    if (i > 1) {
      factorial *= double(i);
    }
    c_hat = std::max(c_hat, row_two_norm(basis.poly_slice(i)) * factorial);
  }
  report.c_hat = c_hat;

  const double sig = report.sigma_dropped;
  const double hnorm = fact.H.norm();
  report.C_d = kEulerGamma + std::log(double(rows)) + double(rows) * hnorm;

  // Circle radius for the analyticity constants; entire problems use a
  // fixed R = 2 > 1.
  const double radius = problem.analyticity_radius();
  const double circle = std::isfinite(radius) ? 0.9 * radius : 2.0;
  const int d_degree = int(rows) - 1;
  int s = d_degree;
  {
    double power = 1.0;
    for (int cand = 0; cand <= d_degree; ++cand) {
      if (c_hat * double(d_degree - cand) / power <= sig) {
        s = cand;
        break;
      }
      power *= circle;
    }
  }
  report.s = s;
  double max_mi = 0.0;
  for (int i = 1; i <= s; ++i) {
    max_mi = std::max(max_mi, problem.derivative_norm_bound(i));
  }
  report.C_s = problem.m0_inverse_norm() *
               ((kEulerGamma + std::log(double(s) + 1.0)) * max_mi +
                problem.boundary_norm(circle));
  report.bound_errV = std::sqrt(double(rows) * double(ncols)) * sig;
  report.bound_errBV = std::sqrt(double(std::max<Index>(klen, 1))) *
                       (report.C_d + report.C_s) * sig;

  if (r_keep == r) {
    // Nothing dropped: skip the unitary remix entirely so the basis is
    // bit-identical.
    if (measure) {
      report.measured_errV = 0.0;
    }
    return report;
  }

  Matrix z_new = basis.Z() * svd.matrixU().leftCols(r_keep);
  Matrix a_new(r_keep * rows, ncols);
  for (Index i = 0; i < rows; ++i) {
    a_new.middleRows(i * r_keep, r_keep) =
        report.sigma.head(r_keep).asDiagonal() *
        svd.matrixV().middleRows(i * ncols, ncols).leftCols(r_keep).adjoint();
  }

  if (measure) {
    double sq = 0.0;
    for (Index i = 0; i < rows; ++i) {
      Matrix diff = basis.Z() * basis.poly_slice(i) -
                    z_new * a_new.middleRows(i * r_keep, r_keep);
      sq += diff.squaredNorm();
    }
    report.measured_errV = std::sqrt(sq);
  }

  basis.set_poly(std::move(z_new), std::move(a_new));
  fact.residual_budget += report.bound_errBV;
  return report;
}

CompressionReport degree_truncate(TiarFactorization& fact, double eps,
                                  const NepProblem& problem) {
  if (!fact.basis.polynomial_only()) {
    raise(ErrorCode::InvalidArgument,
          "degree truncation operates in polynomial-only mode");
  }
  TensorBasis& basis = fact.basis;
  const Index rows = basis.rows();
  const Index ncols = basis.cols();

  CompressionReport report;
  report.r_before = basis.poly_dirs();
  report.r_after = basis.poly_dirs();
  report.d_before = rows;
  report.d_after = rows;
  report.truncated = false;

  const double m0inv = problem.m0_inverse_norm();

  // Smallest kept row count new_rows with
  //   (max_{new_rows <= i <= rows-1} ||M_i||) ||M0^{-1}||
  //       (rows - new_rows) / new_rows!  <  eps.
  // Walk from below, maintaining the suffix max of the derivative
  // bounds.
  std::vector<double> suffix_max(size_t(rows) + 1, 0.0);
  for (Index i = rows - 1; i >= 1; --i) {
    suffix_max[size_t(i)] = std::max(suffix_max[size_t(i) + 1],
                                     problem.derivative_norm_bound(int(i)));
  }
  Index new_rows = rows;
  double factorial = 1.0; // new_rows!
  for (Index cand = 1; cand < rows; ++cand) {
    factorial *= double(cand);
    const double crit =
        suffix_max[size_t(cand)] * m0inv * double(rows - cand) / factorial;
    if (crit < eps) {
      new_rows = cand;
      break;
    }
  }
  if (new_rows >= rows) {
    return report; // NoTruncation
  }

  double c_hat = 0.0;
  {
    double f = 1.0;
    for (Index i = 0; i < rows; ++i) {
      if (i > 1) {
        f *= double(i);
      }
      c_hat = std::max(c_hat, row_two_norm(basis.poly_slice(i)) * f);
    }
  }
  report.c_hat = c_hat;

  double ndfact = 1.0; // (new_rows - 1)!
  for (Index i = 2; i < new_rows; ++i) {
    ndfact *= double(i);
  }
  const double dropped = double(rows - new_rows);
  report.bound_degree_basis = c_hat * std::sqrt(double(ncols)) * dropped / ndfact;
  report.bound_degree_residual = c_hat * std::sqrt(double(ncols)) *
                                 suffix_max[size_t(new_rows)] * m0inv *
                                 dropped / (ndfact * double(new_rows));

  basis.truncate_rows(new_rows);
  report.d_after = new_rows;
  report.truncated = true;
  fact.residual_budget += report.bound_degree_residual;
  return report;
}

DecayDiagnostics decay_diagnostics(const TiarFactorization& fact) {
  const TensorBasis& basis = fact.basis;
  DecayDiagnostics diag;
  const Index rows = basis.rows();
  diag.slice_norms = RealVector(rows);
  double factorial = 1.0;
  for (Index i = 0; i < rows; ++i) {
    if (i > 1) {
      factorial *= double(i);
    }
    diag.slice_norms(i) = row_two_norm(basis.poly_slice(i));
    diag.c_hat = std::max(diag.c_hat, diag.slice_norms(i) * factorial);
  }
  if (!basis.polynomial_only() || basis.poly_dirs() == 0) {
    return diag;
  }

  Eigen::BDCSVD<Matrix> svd(basis.poly_unfolding());
  diag.sigma = svd.singularValues();

  // sigma_i <= c_hat (d - R - k + 2) / (R - k + 1)! over the sampled
  // R in [k, d] where the numerator is positive (1-based i > R).
  const Index klen = fact.length();
  const Index d = rows;
  for (Index rcap = klen; rcap <= d; ++rcap) {
    const double numer = double(d - rcap - klen + 2);
    if (numer < 1.0) {
      break;
    }
    double denom = 1.0; // (R - k + 1)!
    for (Index t = 2; t <= rcap - klen + 1; ++t) {
      denom *= double(t);
    }
    const double bound = diag.c_hat * numer / denom;
    for (Index i = rcap; i < diag.sigma.size() && i < d; ++i) {
      if (diag.sigma(i) > bound * (1.0 + 1e-9) + 1e-14) {
        diag.sv_bound_check = false;
      }
    }
  }
  return diag;
}

} // namespace tiar
