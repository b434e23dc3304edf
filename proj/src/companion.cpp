#include "tiar/companion.hpp"

#include <vector>

namespace tiar {

SparseMatrix companion_matrix(const NepProblem& problem, Index k) {
  const Index n = problem.dim();
  const Index big = n * (k + 1);
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(size_t(n) * size_t(n) * size_t(k) + size_t(n) * size_t(k));

  const Matrix eye = Matrix::Identity(n, n);
  for (Index j = 0; j < k; ++j) {
    // Block (0, j) = -M0^{-1} M_{j+1} / (j+1). The last block column is
    // never reached from a constant start within k steps and is left 0.
    Matrix block =
        -problem.m0_solve(problem.mi_apply(int(j + 1), eye)) / double(j + 1);
    for (Index c = 0; c < n; ++c) {
      for (Index rr = 0; rr < n; ++rr) {
        if (block(rr, c) != 0.0) {
          triplets.emplace_back(rr, j * n + c, block(rr, c));
        }
      }
    }
  }
  for (Index i = 1; i <= k; ++i) {
    for (Index t = 0; t < n; ++t) {
      triplets.emplace_back(i * n + t, (i - 1) * n + t, Complex(1.0 / double(i)));
    }
  }
  SparseMatrix c(big, big);
  c.setFromTriplets(triplets.begin(), triplets.end());
  c.makeCompressed();
  return c;
}

ArnoldiResult classical_arnoldi(const SparseMatrix& a, const Vector& start,
                                Index steps, double breakdown_tol) {
  const Index big = a.rows();
  ArnoldiResult out;
  out.V = Matrix(big, steps + 1);
  out.H = Matrix::Zero(steps + 1, steps);
  out.V.col(0) = start / start.norm();

  for (Index j = 0; j < steps; ++j) {
    Vector w = a * out.V.col(j);
    const double norm_in = w.norm();
    for (int pass = 0; pass < 2; ++pass) {
      Vector h = out.V.leftCols(j + 1).adjoint() * w;
      w.noalias() -= out.V.leftCols(j + 1) * h;
      out.H.col(j).head(j + 1) += h;
    }
    const double beta = w.norm();
    if (beta <= breakdown_tol * norm_in) {
      out.breakdown = true;
      out.H.conservativeResize(j + 2, j + 1);
      out.V.conservativeResize(Eigen::NoChange, j + 2);
      return out;
    }
    out.H(j + 1, j) = beta;
    out.V.col(j + 1) = w / beta;
  }
  return out;
}

} // namespace tiar
