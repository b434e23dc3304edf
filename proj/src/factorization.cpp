#include "tiar/factorization.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace tiar {

namespace {

struct RawAction {
  Vector z0;     // new constant term, before orthogonalization
  Matrix shifted; // n x d: column i-1 holds x_{+,i} = [Z W] row_i / i
  Vector ctilde; // S^{-1} c
};

// The operator action on one column, kept in materialized n-vector form.
// Shared by apply_operator and residual_check.
RawAction raw_action(const TensorBasis& basis, const NepProblem& problem,
                     Index col, const ExpandOptions& opts) {
  const Index d = basis.rows();
  const Index r = basis.poly_dirs();
  const Index p = basis.exp_dirs();
  const BasisColumn in = basis.column(col);

  RawAction out;
  out.ctilde = Vector(p);
  if (p > 0) {
    Eigen::FullPivLU<Matrix> lu(basis.S());
    if (!lu.isInvertible()) {
      raise(ErrorCode::SingularS, "S is numerically singular");
    }
    out.ctilde = lu.solve(in.c);
  }

  out.shifted = Matrix::Zero(basis.n(), d);
  for (Index i = 1; i <= d; ++i) {
    Vector x = Vector::Zero(basis.n());
    if (r > 0) {
      x.noalias() += basis.Z() * in.a.segment(r * (i - 1), r);
    }
    if (p > 0) {
      x.noalias() += basis.W() * in.b.segment(p * (i - 1), p);
    }
    out.shifted.col(i - 1) = x / double(i);
  }

  Vector rhs = Vector::Zero(basis.n());
  for (Index i = 1; i <= d; ++i) {
    rhs += problem.mi_apply(int(i), out.shifted.col(i - 1));
  }
  if (p > 0) {
    rhs += problem.md_apply(int(d), basis.Y(), basis.S(), out.ctilde,
                            opts.md_variant, opts.series);
  }
  out.z0 = -problem.m0_solve(rhs);
  if (opts.flip_ztilde_sign) {
    out.z0 = -out.z0;
  }
  return out;
}

} // namespace

TiarFactorization make_start(const Vector& v) {
  TiarFactorization fact;
  fact.basis = TensorBasis::constant_start(v);
  fact.H = Matrix(1, 0);
  return fact;
}

OperatorAction apply_operator(const TensorBasis& basis,
                              const NepProblem& problem, Index col,
                              const ExpandOptions& opts) {
  const Index d = basis.rows();
  const Index r = basis.poly_dirs();
  const Index p = basis.exp_dirs();
  const BasisColumn in = basis.column(col);
  RawAction raw = raw_action(basis, problem, col, opts);

  // Twice-iterated Gram-Schmidt of z~ against [Z, W].
  Vector z = raw.z0;
  Vector coef_z = Vector::Zero(r);
  Vector coef_w = Vector::Zero(p);
  for (int pass = 0; pass < 2; ++pass) {
    if (r > 0) {
      Vector c = basis.Z().adjoint() * z;
      z.noalias() -= basis.Z() * c;
      coef_z += c;
    }
    if (p > 0) {
      Vector c = basis.W().adjoint() * z;
      z.noalias() -= basis.W() * c;
      coef_w += c;
    }
  }
  const double rho = z.norm();
  const bool deflated = rho <= opts.deflation_tol * raw.z0.norm();

  OperatorAction act;
  act.deflated = deflated;
  const Index r_out = deflated ? r : r + 1;
  act.column.rows = d + 1;
  act.column.poly_dirs = r_out;
  act.column.exp_dirs = p;
  act.column.a = Vector::Zero(r_out * (d + 1));
  act.column.b = Vector::Zero(p * (d + 1));
  act.column.c = raw.ctilde;

  act.column.a.head(r) = coef_z;
  if (!deflated) {
    act.new_direction = z / rho;
    act.column.a(r) = rho;
  }
  if (p > 0) {
    act.column.b.head(p) = coef_w;
  }
  for (Index i = 1; i <= d; ++i) {
    act.column.a.segment(r_out * i, r) = in.a.segment(r * (i - 1), r) / double(i);
    if (p > 0) {
      act.column.b.segment(p * i, p) = in.b.segment(p * (i - 1), p) / double(i);
    }
  }
  return act;
}

Orthogonalized orthogonalize(const TensorBasis& basis, BasisColumn phi,
                             double breakdown_tol) {
  const double norm_in = basis.norm(phi);
  Vector h = basis.inner_products(phi);
  basis.subtract_combination(phi, h);
  Vector h2 = basis.inner_products(phi);
  basis.subtract_combination(phi, h2);
  h += h2;

  const double beta = basis.norm(phi);
  if (beta <= breakdown_tol * norm_in || norm_in == 0.0) {
    raise(ErrorCode::Breakdown,
          "orthogonalization breakdown (invariant subspace reached)");
  }
  phi.scale(Complex(1.0 / beta));
  return {std::move(h), beta, std::move(phi)};
}

void expand(TiarFactorization& fact, Index target, const NepProblem& problem,
            const ExpandOptions& opts) {
  while (fact.length() < target) {
    const Index k = fact.length();
    OperatorAction act =
        apply_operator(fact.basis, problem, fact.basis.cols() - 1, opts);
    if (!act.deflated) {
      fact.basis.add_poly_direction(act.new_direction);
    }
    fact.basis.raise_degree();

    Orthogonalized next =
        orthogonalize(fact.basis, std::move(act.column), opts.breakdown_tol);

    fact.H.conservativeResize(k + 2, k + 1);
    fact.H.col(k).head(k + 1) = next.h;
    fact.H.row(k + 1).setZero();
    fact.H(k + 1, k) = next.beta;
    fact.basis.append_column(next.q);
  }
}

double residual_check(const TiarFactorization& fact, const NepProblem& problem,
                      const ExpandOptions& opts) {
  const Index k = fact.length();
  if (k == 0) {
    return 0.0;
  }
  const TensorBasis& basis = fact.basis;
  const Index d = basis.rows();
  const Index p = basis.exp_dirs();
  const Index n = basis.n();

  // Left side: B psi_j for j = 1..k, as degree stacks 0..d plus a tail
  // starting at d+1.
  std::vector<Matrix> lhs(d + 1, Matrix::Zero(n, k));
  Matrix ctilde(p, k);
  for (Index j = 0; j < k; ++j) {
    RawAction raw = raw_action(basis, problem, j, opts);
    lhs[0].col(j) = raw.z0;
    for (Index i = 1; i <= d; ++i) {
      lhs[size_t(i)].col(j) = raw.shifted.col(i - 1);
    }
    if (p > 0) {
      ctilde.col(j) = raw.ctilde;
    }
  }

  // Right side: Psi_{k+1} Hbar, with the basis raised to degree d+1
  // (the theta^d exponential term materialized directly).
  double sq = 0.0;
  for (Index i = 0; i <= d; ++i) {
    Matrix stack;
    if (i < d) {
      stack = Matrix::Zero(n, basis.cols());
      if (basis.poly_dirs() > 0) {
        stack.noalias() += basis.Z() * basis.poly_slice(i);
      }
      if (p > 0) {
        stack.noalias() += basis.W() * basis.locked_slice(i);
      }
    } else {
      stack = Matrix::Zero(n, basis.cols());
      if (p > 0) {
        Matrix pi = Matrix::Identity(p, p); // S^d/d!
        for (Index t = 1; t <= d; ++t) {
          pi = pi * basis.S() / double(t);
        }
        stack.noalias() += basis.Y() * (pi * basis.C());
      }
    }
    sq += (lhs[size_t(i)] - stack * fact.H).squaredNorm();
  }
  if (p > 0) {
    Matrix delta = ctilde - basis.C() * fact.H;
    sq += basis.exp_tail_gram(delta, delta, d + 1).diagonal().real().sum();
  }
  return std::sqrt(std::max(sq, 0.0));
}

} // namespace tiar
