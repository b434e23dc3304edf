#include "tiar/nep.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

namespace tiar {

namespace {

constexpr double kPi = 3.14159265358979323846;

SparseMatrix sparse_identity(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

double spectral_radius(const Matrix& S) {
  if (S.rows() == 0) {
    return 0.0;
  }
  Eigen::ComplexEigenSolver<Matrix> es(S, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix matrix_power(const Matrix& S, int i) {
  Matrix P = Matrix::Identity(S.rows(), S.cols());
  for (int j = 0; j < i; ++j) {
    P = P * S;
  }
  return P;
}

} // namespace

double spectral_norm_estimate(const SparseMatrix& a, int max_iters,
                              double rel_tol) {
  if (a.rows() == 0 || a.nonZeros() == 0) {
    return 0.0;
  }
  std::mt19937_64 rng(2654435761u);
  std::normal_distribution<double> dist;
  Vector v(a.cols());
  for (Index i = 0; i < v.size(); ++i) {
    v(i) = Complex(dist(rng), dist(rng));
  }
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = a.adjoint() * (a * v).eval();
    double nw = w.norm();
    if (nw == 0.0) {
      return 0.0;
    }
    double next = std::sqrt(nw);
    v = w / nw;
    if (it > 2 && std::abs(next - est) <= rel_tol * next) {
      return next;
    }
    est = next;
  }
  return est;
}

void NepProblem::finalize_caches() {
  // ||M(0)^{-1}|| by a few inverse-power steps; a norm-ratio estimate is
  // all the compression bound constants require.
  std::mt19937_64 rng(88172645463325252ull);
  std::normal_distribution<double> dist;
  Vector v(n_);
  for (Index i = 0; i < n_; ++i) {
    v(i) = Complex(dist(rng), dist(rng));
  }
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < 25; ++it) {
    Vector w = m0_solve(v);
    double g = w.norm();
    if (!std::isfinite(g) || g == 0.0) {
      break;
    }
    est = std::max(est, g);
    v = w / g;
  }
  m0_inv_norm_ = est;
}

double NepProblem::m_frobenius(Complex lambda) const {
  if (const auto* terms = sum_form()) {
    SparseMatrix acc(n_, n_);
    for (const auto& t : *terms) {
      acc += t.scalar(lambda) * t.coeff;
    }
    return acc.norm();
  }
  Matrix m = m_apply(lambda, Matrix::Identity(n_, n_));
  return m.norm();
}

double NepProblem::boundary_norm(double radius, int samples) const {
  double best = 0.0;
  for (int j = 0; j < samples; ++j) {
    double phi = 2.0 * kPi * j / samples;
    best = std::max(best, m_frobenius(radius * Complex(std::cos(phi),
                                                       std::sin(phi))));
  }
  return best;
}

double NepProblem::derivative_norm_bound(int i) const {
  // Cauchy estimate i! max_{|z|=rho} ||M(z)|| / rho^i on a circle inside
  // the analyticity disk (rho capped for entire functions).
  const double rho = 0.9 * std::min(analyticity_radius(), 10.0 / 0.9);
  double max_m = boundary_norm(rho);
  double log_bound =
      std::lgamma(static_cast<double>(i) + 1.0) - i * std::log(rho) +
      std::log(std::max(max_m, std::numeric_limits<double>::min()));
  return std::exp(log_bound);
}

void NepProblem::check_spectrum_in_disk(const Matrix& S) const {
  if (!std::isfinite(radius_)) {
    return;
  }
  double rho = spectral_radius(S);
  if (rho >= radius_ * (1.0 - 1e-6)) {
    raise(ErrorCode::SpectrumOutsideDisk,
          "spectrum of S reaches the analyticity boundary (rho(S)=" +
              std::to_string(rho) + ", R=" + std::to_string(radius_) + ")");
  }
}

Vector NepProblem::md_apply(int d, const Matrix& Y, const Matrix& S,
                            const Vector& c, MdVariant variant,
                            const SeriesOptions& series) const {
  const Index p = S.rows();
  if (Y.cols() != p || c.size() != p) {
    raise(ErrorCode::InvalidArgument, "md_apply: inconsistent dimensions");
  }
  if (p == 0 || c.norm() == 0.0) {
    return Vector::Zero(n_);
  }
  check_spectrum_in_disk(S);

  if (variant == MdVariant::SumForm) {
    const auto* terms = sum_form();
    if (terms == nullptr) {
      raise(ErrorCode::InvalidArgument,
            "md_apply: SumForm variant requires a sum form");
    }
    Vector out = Vector::Zero(n_);
    for (const auto& t : *terms) {
      out += t.coeff * (Y * (t.matrix_fn(S) * c));
    }
    // Subtract the Taylor partial sum through degree d (the i = 0 term
    // M_0 Y c included: the two routes agree with the tail series).
    Vector vi = c; // S^i c / i!
    for (int i = 0; i <= d; ++i) {
      if (i > 0) {
        vi = (S * vi) / static_cast<double>(i);
      }
      out -= mi_apply(i, Y * vi);
    }
    return out;
  }

  // Series route: sum_{i=d+1..} M_i Y S^i c / i!, truncated once the term
  // norm bound stays small for a few consecutive terms.
  const double y_norm = Y.norm();
  const double stop = series.tol_factor * c.norm();
  Vector vi = c;
  for (int i = 1; i <= d; ++i) {
    vi = (S * vi) / static_cast<double>(i);
  }
  Vector out = Vector::Zero(n_);
  int small_run = 0;
  for (int i = d + 1; i <= d + series.max_terms; ++i) {
    vi = (S * vi) / static_cast<double>(i);
    out += mi_apply(i, Y * vi);
    double bound = derivative_norm_bound(i) * y_norm * vi.norm();
    if (bound < stop) {
      if (++small_run >= series.consecutive) {
        return out;
      }
    } else {
      small_run = 0;
    }
  }
  raise(ErrorCode::SeriesDivergence,
        "md_apply: series did not meet tolerance within " +
            std::to_string(series.max_terms) + " terms");
}

double NepProblem::residual(Complex lambda, const Vector& v) const {
  double vn = v.norm();
  if (vn == 0.0) {
    raise(ErrorCode::InvalidArgument, "residual: v must be nonzero");
  }
  double scale = 0.0;
  if (const auto* terms = sum_form()) {
    for (const auto& t : *terms) {
      scale += t.coeff_frob * std::abs(t.scalar(lambda));
    }
  } else {
    scale = m_frobenius(lambda);
  }
  if (scale == 0.0) {
    scale = 1.0;
  }
  return (m_apply(lambda, v)).norm() / (vn * scale);
}

// ---------------------------------------------------------------------------
// DepInstance

DepInstance::DepInstance(SparseMatrix a0, SparseMatrix a1, SparseMatrix a2)
    : NepProblem(a0.rows(), std::numeric_limits<double>::infinity()),
      a0_(std::move(a0)), a1_(std::move(a1)), a2_(std::move(a2)) {
  const Index n = dim();
  if (a1_.rows() != n || a2_.rows() != n || a0_.cols() != n ||
      a1_.cols() != n || a2_.cols() != n) {
    raise(ErrorCode::InvalidArgument, "DEP matrices must be square and equal");
  }
  m0_ = a0_ + a2_ + sparse_identity(n);
  m0_.makeCompressed();
  m0_lu_.compute(m0_);
  if (m0_lu_.info() != Eigen::Success) {
    raise(ErrorCode::SingularM0, "M(0) = A0 + A2 + I is numerically singular");
  }
  {
    // Near-singularity probe: a factorization that cannot reproduce a
    // known right-hand side is rejected.
    Vector x = Vector::Ones(n);
    Vector b = m0_ * x;
    Vector sol = m0_lu_.solve(b);
    if (!(b.norm() == 0.0) &&
        (m0_ * sol - b).norm() > 1e-6 * std::max(1.0, b.norm())) {
      raise(ErrorCode::SingularM0, "M(0) factorization failed a probe solve");
    }
  }

  a2_norm_ = spectral_norm_estimate(a2_);
  m1_norm_ = spectral_norm_estimate(SparseMatrix(a1_ - a2_));
  m2_norm_ =
      spectral_norm_estimate(SparseMatrix(a2_ - 2.0 * sparse_identity(n)));

  SparseMatrix id = sparse_identity(n);
  terms_.push_back({id, [](Complex z) { return 1.0 - z * z; },
                    [](const Matrix& S) -> Matrix {
                      return Matrix::Identity(S.rows(), S.cols()) - S * S;
                    },
                    id.norm()});
  terms_.push_back({a1_, [](Complex z) { return z; },
                    [](const Matrix& S) -> Matrix { return S; }, a1_.norm()});
  terms_.push_back({a0_, [](Complex) { return Complex(1.0); },
                    [](const Matrix& S) -> Matrix {
                      return Matrix::Identity(S.rows(), S.cols());
                    },
                    a0_.norm()});
  terms_.push_back({a2_, [](Complex z) { return std::exp(-z); },
                    [](const Matrix& S) -> Matrix { return (-S).exp(); },
                    a2_.norm()});

  finalize_caches();
}

Matrix DepInstance::m0_solve(const Matrix& X) const {
  return m0_lu_.solve(X);
}

Matrix DepInstance::mi_apply(int i, const Matrix& X) const {
  switch (i) {
    case 0:
      return m0_ * X;
    case 1:
      return a1_ * X - a2_ * X;
    case 2:
      return a2_ * X - 2.0 * X;
    default:
      return (i % 2 == 0) ? Matrix(a2_ * X) : Matrix(-(a2_ * X));
  }
}

Matrix DepInstance::m_apply(Complex lambda, const Matrix& X) const {
  return (1.0 - lambda * lambda) * X + lambda * (a1_ * X) + a0_ * X +
         std::exp(-lambda) * (a2_ * X);
}

double DepInstance::derivative_norm_bound(int i) const {
  switch (i) {
    case 0:
      return m0_.norm();
    case 1:
      return m1_norm_ * 1.05;
    case 2:
      return m2_norm_ * 1.05;
    default:
      return a2_norm_ * 1.05;
  }
}

// ---------------------------------------------------------------------------
// PolynomialNep

PolynomialNep::PolynomialNep(std::vector<Matrix> coeffs)
    : NepProblem(coeffs.empty() ? 0 : coeffs.front().rows(),
                 std::numeric_limits<double>::infinity()),
      coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) {
    raise(ErrorCode::InvalidArgument, "polynomial needs at least K_0");
  }
  const Index n = dim();
  for (const auto& k : coeffs_) {
    if (k.rows() != n || k.cols() != n) {
      raise(ErrorCode::InvalidArgument, "coefficient size mismatch");
    }
  }
  Eigen::FullPivLU<Matrix> probe(coeffs_[0]);
  if (!probe.isInvertible()) {
    raise(ErrorCode::SingularM0, "K_0 is singular");
  }
  k0_lu_.compute(coeffs_[0]);

  double factorial = 1.0;
  for (int i = 0; i < static_cast<int>(coeffs_.size()); ++i) {
    if (i > 0) {
      factorial *= i;
    }
    deriv_norms_.push_back(factorial *
                           coeffs_[i].jacobiSvd().singularValues()(0));
    terms_.push_back({coeffs_[i].sparseView(),
                      [i](Complex z) { return std::pow(z, i); },
                      [i](const Matrix& S) { return matrix_power(S, i); },
                      coeffs_[i].norm()});
  }

  finalize_caches();
}

Matrix PolynomialNep::m0_solve(const Matrix& X) const {
  return k0_lu_.solve(X);
}

Matrix PolynomialNep::mi_apply(int i, const Matrix& X) const {
  if (i >= static_cast<int>(coeffs_.size())) {
    return Matrix::Zero(X.rows(), X.cols());
  }
  double factorial = 1.0;
  for (int j = 2; j <= i; ++j) {
    factorial *= j;
  }
  return factorial * (coeffs_[i] * X);
}

Matrix PolynomialNep::m_apply(Complex lambda, const Matrix& X) const {
  Matrix out = Matrix::Zero(X.rows(), X.cols());
  Complex power = 1.0;
  for (const auto& k : coeffs_) {
    out += power * (k * X);
    power *= lambda;
  }
  return out;
}

double PolynomialNep::derivative_norm_bound(int i) const {
  if (i >= static_cast<int>(deriv_norms_.size())) {
    return 0.0;
  }
  return deriv_norms_[static_cast<std::size_t>(i)];
}

// ---------------------------------------------------------------------------
// Grid DEP generator

std::unique_ptr<DepInstance> make_grid_dep(Index grid) {
  if (grid < 2) {
    raise(ErrorCode::InvalidArgument, "grid size must be at least 2");
  }
  const Index n = grid * grid;
  auto at = [grid](Index i, Index j) { return i * grid + j; };

  std::vector<Eigen::Triplet<Complex>> t0, t1, t2;
  const double lap = -0.25;  // stencil weight of A0
  const double trans = 0.15; // skew transport weight of A1
  const double damp = 0.20;  // diagonal damping of A1
  for (Index i = 0; i < grid; ++i) {
    for (Index j = 0; j < grid; ++j) {
      const Index row = at(i, j);
      const double x = double(i + 1) / double(grid + 1);
      const double y = double(j + 1) / double(grid + 1);
      t0.emplace_back(row, row, 4.0 * lap);
      t1.emplace_back(row, row, damp);
      t2.emplace_back(row, row,
                      0.45 * (1.0 + 0.5 * std::sin(kPi * x) * std::sin(kPi * y)));
      if (i > 0) {
        t0.emplace_back(row, at(i - 1, j), -lap);
        t1.emplace_back(row, at(i - 1, j), -trans);
      }
      if (i + 1 < grid) {
        t0.emplace_back(row, at(i + 1, j), -lap);
        t1.emplace_back(row, at(i + 1, j), trans);
      }
      if (j > 0) {
        t0.emplace_back(row, at(i, j - 1), -lap);
      }
      if (j + 1 < grid) {
        t0.emplace_back(row, at(i, j + 1), -lap);
      }
    }
  }
  SparseMatrix a0(n, n), a1(n, n), a2(n, n);
  a0.setFromTriplets(t0.begin(), t0.end());
  a1.setFromTriplets(t1.begin(), t1.end());
  a2.setFromTriplets(t2.begin(), t2.end());
  return std::make_unique<DepInstance>(std::move(a0), std::move(a1),
                                       std::move(a2));
}

} // namespace tiar
