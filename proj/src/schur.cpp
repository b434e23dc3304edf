#include "tiar/schur.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace tiar {

namespace {

// Unitary similarity swapping diagonal entries j, j+1 of the triangular
// matrix r, accumulated into p. Near-equal entries need no swap.
void swap_adjacent(Matrix& r, Matrix& p, Index j) {
  const Complex t11 = r(j, j);
  const Complex t12 = r(j, j + 1);
  const Complex t22 = r(j + 1, j + 1);
  // Eigenvector of [[t11 t12];[0 t22]] for t22.
  const Complex x0 = t12;
  const Complex x1 = t22 - t11;
  const double nrm = std::sqrt(std::norm(x0) + std::norm(x1));
  if (nrm <= 1e-300 ||
      std::abs(x1) <= 1e-15 * (std::abs(t11) + std::abs(t22))) {
    // Equal eigenvalues within roundoff; the swap is vacuous.
    return;
  }
  Matrix g(2, 2);
  g(0, 0) = x0 / nrm;
  g(1, 0) = x1 / nrm;
  g(0, 1) = -std::conj(x1 / nrm);
  g(1, 1) = std::conj(x0 / nrm);

  r.middleCols(j, 2) = r.middleCols(j, 2) * g;
  r.middleRows(j, 2) = g.adjoint() * r.middleRows(j, 2);
  p.middleCols(j, 2) = p.middleCols(j, 2) * g;
  r(j + 1, j) = 0.0;
}

int class_rank(RitzClass c) { return static_cast<int>(c); }

} // namespace

RitzReport ritz_extract(const TiarFactorization& fact, double conv_tol) {
  const Index k = fact.length();
  if (k < 1) {
    raise(ErrorCode::InvalidArgument, "ritz_extract needs length >= 1");
  }
  const Matrix hk = fact.H.topRows(k);
  Eigen::ComplexEigenSolver<Matrix> es(hk);
  if (es.info() != Eigen::Success) {
    raise(ErrorCode::InvalidArgument, "eigen decomposition of H_k failed");
  }

  RitzReport report;
  report.values = es.eigenvalues();
  report.vectors = es.eigenvectors(); // unit columns
  report.nep_values = Vector(k);
  report.residual_estimates = RealVector(k);
  report.converged.assign(size_t(k), false);

  // After an expansion the last row of Hbar is beta_k e_k^H, so this is
  // the classical |beta_k e_k^H y_j| estimate; the general form also
  // covers Krylov-Schur shaped factorizations.
  const Eigen::RowVectorXcd coupling = fact.H.row(k);
  for (Index j = 0; j < k; ++j) {
    const Complex mu = report.values(j);
    const double est = std::abs((coupling * report.vectors.col(j)).value());
    report.residual_estimates(j) = est;
    report.nep_values(j) =
        mu == 0.0 ? Complex(std::numeric_limits<double>::infinity(), 0.0)
                  : 1.0 / mu;
    report.converged[size_t(j)] = est <= conv_tol * std::abs(mu);
  }
  return report;
}

OrderedSchur ordered_schur(
    const Matrix& h, const std::function<RitzClass(Complex)>& classify) {
  const Index m = h.rows();
  if (h.cols() != m) {
    raise(ErrorCode::InvalidArgument, "ordered_schur needs a square matrix");
  }
  OrderedSchur out;
  if (m == 0) {
    out.P = Matrix(0, 0);
    out.R = Matrix(0, 0);
    return out;
  }

  Eigen::ComplexSchur<Matrix> schur(h, /*computeU=*/true);
  if (schur.info() != Eigen::Success) {
    raise(ErrorCode::InvalidArgument, "Schur decomposition failed");
  }
  out.P = schur.matrixU();
  out.R = schur.matrixT();

  std::vector<int> rank(size_t(m));
  for (Index j = 0; j < m; ++j) {
    rank[size_t(j)] = class_rank(classify(out.R(j, j)));
  }

  // Bubble the classes into Converged | Wanted | Unwanted order with
  // adjacent unitary swaps (all blocks are 1x1 in complex arithmetic).
  bool moved = true;
  while (moved) {
    moved = false;
    for (Index j = 0; j + 1 < m; ++j) {
      if (rank[size_t(j)] > rank[size_t(j + 1)]) {
        swap_adjacent(out.R, out.P, j);
        std::swap(rank[size_t(j)], rank[size_t(j + 1)]);
        moved = true;
      }
    }
  }

  for (Index j = 0; j < m; ++j) {
    // Classes may drift if a swap was skipped as near-equal; re-derive
    // the counts from the reordered diagonal.
    rank[size_t(j)] = class_rank(classify(out.R(j, j)));
  }
  for (Index j = 0; j < m; ++j) {
    if (rank[size_t(j)] == 0) {
      ++out.n_converged;
    }
    if (rank[size_t(j)] <= 1) {
      ++out.n_kept;
    }
  }

  const double defect = (out.P.adjoint() * h * out.P - out.R).norm();
  out.reordering_warning = defect > 1e-12 * std::max(1.0, h.norm());
  return out;
}

HessenbergRestore householder_restore(const Matrix& r22, const Vector& a2) {
  const Index q = r22.rows();
  HessenbergRestore out;
  if (q == 0) {
    out.Q = Matrix(0, 0);
    out.Hess = Matrix(0, 0);
    return out;
  }
  out.beta = a2.norm();
  if (out.beta == 0.0) {
    out.Q = Matrix::Identity(q, q);
    out.Hess = r22;
    return out;
  }

  // Work on the flipped adjoint B = J R22^H J: a unitary V with
  // V e_1 = J a2 / ||a2|| and V^H B V upper Hessenberg flips back to the
  // wanted Q = J V J with a2^H Q = beta e_q^H.
  Matrix flip = Matrix::Zero(q, q);
  for (Index i = 0; i < q; ++i) {
    flip(i, q - 1 - i) = 1.0;
  }
  const Matrix b = flip * r22.adjoint() * flip;
  const Vector g = flip * (a2 / out.beta);

  // Unitary with first column g. The reflector sending g to rho e_1
  // with rho = -phase(g_1) is an involution, so scaling it by rho gives
  // a unitary whose first column is exactly g; the choice of rho keeps
  // ||v|| bounded away from zero.
  Matrix p0;
  {
    const Complex g0 = g(0);
    const double ag0 = std::abs(g0);
    const Complex rho = ag0 > 0.0 ? Complex(-g0 / ag0) : Complex(-1.0);
    Vector v = g;
    v(0) -= rho;
    p0 = rho * (Matrix::Identity(q, q) -
                (2.0 / v.squaredNorm()) * (v * v.adjoint()));
  }

  Matrix c = p0.adjoint() * b * p0;
  Eigen::HessenbergDecomposition<Matrix> hd(c);
  Matrix w = hd.matrixQ();
  Matrix v = p0 * w;

  out.Q = flip * v * flip;
  out.Hess = out.Q.adjoint() * r22 * out.Q;

  // Phase-normalize the subdiagonal to be real nonnegative, holding the
  // last diagonal phase fixed so a2^H Q = beta e_q^H survives.
  Vector d = Vector::Ones(q);
  for (Index i = q - 1; i >= 1; --i) {
    const Complex sub = std::conj(d(i)) * out.Hess(i, i - 1);
    const double a = std::abs(sub);
    d(i - 1) = a > 0.0 ? std::conj(sub / a) : Complex(1.0);
  }
  out.Q = out.Q * d.asDiagonal();
  out.Hess = d.asDiagonal().inverse() * out.Hess * d.asDiagonal();
  for (Index i = 1; i < q; ++i) {
    out.Hess(i, i - 1) = Complex(std::abs(out.Hess(i, i - 1)), 0.0);
    for (Index j = i + 1; j < q; ++j) {
      out.Hess(j, i - 1) = 0.0;
    }
  }
  return out;
}

double lock(Matrix& hbar, Index p_l, double lock_tol_rel) {
  const Index last = hbar.rows() - 1;
  const double discarded = hbar.row(last).head(p_l).norm();
  const double scale = std::max(hbar.norm(), 1e-300);
  if (discarded > lock_tol_rel * scale) {
    raise(ErrorCode::LockRejected,
          "coupling norm " + std::to_string(discarded) +
              " exceeds the locking tolerance");
  }
  hbar.row(last).head(p_l).setZero();
  return discarded;
}

} // namespace tiar
