// Test-side oracles, independent of the solver's tensor representation:
// direct coefficient-stack materialization, determinant root polishing,
// and small deterministic problem factories.
#pragma once

#include <random>

#include <Eigen/Dense>

#include "tiar/nep.hpp"
#include "tiar/tensor_basis.hpp"

namespace oracles {

using tiar::Complex;
using tiar::Index;
using tiar::Matrix;
using tiar::Vector;

// Stacked Taylor coefficients [X_0; X_1; ...] with X_i = Z A_i + W B_i
// (exponential tail excluded; exact for polynomial-only bases).
inline Matrix materialize_stack(const tiar::TensorBasis& basis) {
  Matrix stack = Matrix::Zero(basis.n() * basis.rows(), basis.cols());
  for (Index i = 0; i < basis.rows(); ++i) {
    Matrix x = Matrix::Zero(basis.n(), basis.cols());
    if (basis.poly_dirs() > 0) {
      x += basis.Z() * basis.poly_slice(i);
    }
    if (basis.exp_dirs() > 0) {
      x += basis.W() * basis.locked_slice(i);
    }
    stack.middleRows(i * basis.n(), basis.n()) = x;
  }
  return stack;
}

// Termwise evaluation oracle: polynomial rows summed with std::pow plus
// the exponential tail summed term by term from scratch.
inline Matrix evaluate_by_series(const tiar::TensorBasis& basis,
                                 Complex theta, int extra_terms = 400) {
  Matrix out = Matrix::Zero(basis.n(), basis.cols());
  for (Index i = 0; i < basis.rows(); ++i) {
    Complex p = std::pow(theta, double(i));
    if (basis.poly_dirs() > 0) {
      out += p * (basis.Z() * basis.poly_slice(i));
    }
    if (basis.exp_dirs() > 0) {
      out += p * (basis.W() * basis.locked_slice(i));
    }
  }
  const Index pdim = basis.exp_dirs();
  if (pdim > 0) {
    Matrix term = Matrix::Identity(pdim, pdim);
    for (Index i = 1; i < basis.rows(); ++i) {
      term = term * (theta * basis.S()) / double(i);
    }
    for (int step = 0; step < extra_terms; ++step) {
      const Index i = basis.rows() + step;
      term = term * (theta * basis.S()) / double(i);
      out += basis.Y() * (term * basis.C());
    }
  }
  return out;
}

inline Complex det_m(const tiar::NepProblem& problem, Complex lambda) {
  Matrix m =
      problem.m_apply(lambda, Matrix::Identity(problem.dim(), problem.dim()));
  return Eigen::PartialPivLU<Matrix>(m).determinant();
}

// Newton on det M(lambda) with a central-difference derivative; returns
// the polished root (NaN when Newton fails to settle).
inline Complex polish_root(const tiar::NepProblem& problem, Complex guess) {
  Complex lambda = guess;
  for (int it = 0; it < 100; ++it) {
    const double h = 1e-7 * std::max(1.0, std::abs(lambda));
    const Complex g = det_m(problem, lambda);
    const Complex dg =
        (det_m(problem, lambda + h) - det_m(problem, lambda - h)) / (2.0 * h);
    if (std::abs(dg) == 0.0) {
      break;
    }
    const Complex step = g / dg;
    lambda -= step;
    if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(lambda))) {
      return lambda;
    }
  }
  return Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
}

// Null vector of M(lambda) via the smallest singular direction.
inline Vector null_vector(const tiar::NepProblem& problem, Complex lambda) {
  Matrix m =
      problem.m_apply(lambda, Matrix::Identity(problem.dim(), problem.dim()));
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().col(problem.dim() - 1);
}

inline tiar::SparseMatrix random_sparse(Index n, double scale,
                                        std::mt19937_64& rng,
                                        double extra_diag = 0.0) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::bernoulli_distribution keep(0.35);
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j || keep(rng)) {
        Complex v = scale * Complex(dist(rng), dist(rng));
        if (i == j) {
          v += extra_diag;
        }
        triplets.emplace_back(i, j, v);
      }
    }
  }
  tiar::SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

// Small dense-random delay instance with a safely invertible M(0).
inline std::unique_ptr<tiar::DepInstance> random_dep(Index n,
                                                     unsigned long seed) {
  std::mt19937_64 rng(seed);
  auto a0 = random_sparse(n, 0.4, rng, 1.5);
  auto a1 = random_sparse(n, 0.3, rng);
  auto a2 = random_sparse(n, 0.25, rng);
  return std::make_unique<tiar::DepInstance>(a0, a1, a2);
}

// Deterministic dense polynomial instance of the given degree.
inline std::unique_ptr<tiar::PolynomialNep> random_poly(Index n, int degree,
                                                        unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Matrix> coeffs;
  for (int d = 0; d <= degree; ++d) {
    Matrix k(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        k(i, j) = 0.4 * Complex(dist(rng), dist(rng));
      }
    }
    if (d == 0) {
      k += 2.0 * Matrix::Identity(n, n);
    }
    coeffs.push_back(std::move(k));
  }
  return std::make_unique<tiar::PolynomialNep>(std::move(coeffs));
}

} // namespace oracles
