#include <doctest.h>

#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "tiar/matrix_market.hpp"
#include "tiar/nep.hpp"

using namespace tiar;
using oracles::polish_root;

namespace {

// Finite-radius wrapper so the disk check has something to trip on.
class DiskLimitedNep : public NepProblem {
public:
  DiskLimitedNep(std::unique_ptr<PolynomialNep> inner, double radius)
      : NepProblem(inner->dim(), radius), inner_(std::move(inner)) {
    finalize_caches();
  }
  Matrix m0_solve(const Matrix& x) const override {
    return inner_->m0_solve(x);
  }
  Matrix mi_apply(int i, const Matrix& x) const override {
    return inner_->mi_apply(i, x);
  }
  Matrix m_apply(Complex lambda, const Matrix& x) const override {
    return inner_->m_apply(lambda, x);
  }
  double derivative_norm_bound(int i) const override {
    return inner_->derivative_norm_bound(i);
  }
  const std::vector<SumFormTerm>* sum_form() const override {
    return inner_->sum_form();
  }

private:
  std::unique_ptr<PolynomialNep> inner_;
};

SparseMatrix sparse_id(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

Matrix dense(const SparseMatrix& m) { return Matrix(m); }

} // namespace

TEST_CASE("m0_solve on the identity instance") {
  const Index n = 4;
  SparseMatrix zero(n, n);
  // A0 = A2 = 0, A1 = I gives M(0) = I.
  DepInstance dep(zero, sparse_id(n), zero);
  Matrix x = Matrix::Random(n, 2);
  CHECK((dep.m0_solve(x) - x).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("m0_solve inverts a forward application") {
  auto dep = oracles::random_dep(5, 11);
  Vector e1 = Vector::Unit(5, 0);
  Vector x = dep->mi_apply(0, e1); // M(0) e_1
  CHECK((dep->m0_solve(x) - e1).norm() <= 1e-12);
}

TEST_CASE("m0_solve residual on a random instance") {
  auto dep = oracles::random_dep(5, 12);
  Matrix v = dep->m0_solve(Matrix::Identity(5, 5));
  Matrix res = dep->mi_apply(0, v) - Matrix::Identity(5, 5);
  CHECK(res.norm() <= 1e-12);
}

TEST_CASE("m0_solve rejects singular M(0)") {
  const Index n = 3;
  SparseMatrix zero(n, n);
  SparseMatrix minus_id = SparseMatrix(-1.0 * sparse_id(n));
  // A0 = -I, A2 = 0 makes M(0) = 0.
  CHECK_THROWS_AS(DepInstance(minus_id, sparse_id(n), zero), Error);
}

TEST_CASE("mi_apply follows the delay derivative table") {
  auto dep = oracles::random_dep(6, 13);
  const Matrix a2 = dense(dep->a2());
  const Matrix eye = Matrix::Identity(6, 6);

  CHECK((dep->mi_apply(3, eye) + a2).norm() <= 1e-14);
  CHECK((dep->mi_apply(4, eye) - a2).norm() <= 1e-14);

  Vector e1 = Vector::Unit(6, 0);
  Vector expected = (a2 - 2.0 * eye) * e1;
  CHECK((dep->mi_apply(2, e1) - expected).norm() <= 1e-14);
}

TEST_CASE("mi_apply vanishes beyond the polynomial degree") {
  auto poly = oracles::random_poly(3, 2, 21);
  Matrix x = Matrix::Random(3, 2);
  CHECK(poly->mi_apply(5, x).norm() == 0.0);
}

TEST_CASE("finite differences confirm the first two derivatives") {
  auto dep = oracles::random_dep(7, 14);
  const double h = 1e-5;
  const Matrix eye = Matrix::Identity(7, 7);
  Matrix d1 =
      (dep->m_apply(h, eye) - dep->m_apply(-h, eye)) / (2.0 * h);
  Matrix d2 = (dep->m_apply(h, eye) - 2.0 * dep->m_apply(0.0, eye) +
               dep->m_apply(-h, eye)) /
              (h * h);
  CHECK((d1 - dep->mi_apply(1, eye)).norm() <=
        1e-8 * dep->mi_apply(1, eye).norm());
  CHECK((d2 - dep->mi_apply(2, eye)).norm() <=
        1e-8 * dep->mi_apply(2, eye).norm());
}

TEST_CASE("sum form reproduces direct evaluation") {
  auto dep = oracles::random_dep(5, 15);
  const auto* terms = dep->sum_form();
  REQUIRE(terms != nullptr);
  for (Complex lambda : {Complex(0.3, -0.2), Complex(-1.1, 0.7)}) {
    Matrix direct = dep->m_apply(lambda, Matrix::Identity(5, 5));
    Matrix summed = Matrix::Zero(5, 5);
    for (const auto& t : *terms) {
      summed += t.scalar(lambda) * Matrix(t.coeff);
    }
    CHECK((direct - summed).norm() <= 1e-12 * direct.norm());
  }
}

TEST_CASE("md_apply is zero for S = 0") {
  auto dep = oracles::random_dep(4, 16);
  Matrix y = Matrix::Random(4, 2);
  Matrix s = Matrix::Zero(2, 2);
  Vector c = Vector::Random(2);
  for (int d : {0, 1, 3}) {
    CHECK(dep->md_apply(d, y, s, c, MdVariant::Series).norm() <= 1e-15);
  }
}

TEST_CASE("md_apply routes agree") {
  auto dep = oracles::random_dep(5, 17);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const Index p = 3;
    Matrix y(5, p), s(p, p);
    for (Index i = 0; i < 5; ++i) {
      for (Index j = 0; j < p; ++j) {
        y(i, j) = Complex(dist(rng), dist(rng));
      }
    }
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < p; ++j) {
        s(i, j) = 0.4 * Complex(dist(rng), dist(rng));
      }
    }
    Vector c = Vector::Random(p);
    for (int d = 0; d <= 10; ++d) {
      Vector a = dep->md_apply(d, y, s, c, MdVariant::SumForm);
      Vector b = dep->md_apply(d, y, s, c, MdVariant::Series);
      CHECK((a - b).norm() <= 1e-10 * std::max(1.0, a.norm()));
    }
  }
}

TEST_CASE("md_apply single-exponential cross-check") {
  auto dep = oracles::random_dep(6, 18);
  Matrix y = Matrix::Random(6, 1);
  Matrix s(1, 1);
  s(0, 0) = Complex(0.37, 0.21);
  Vector c = Vector::Ones(1);
  Vector a = dep->md_apply(0, y, s, c, MdVariant::SumForm);
  Vector b = dep->md_apply(0, y, s, c, MdVariant::Series);
  CHECK((a - b).norm() <= 1e-12 * std::max(1.0, a.norm()));
  // M_0(Y,S)c = (M(s) - M(0)) y for scalar S.
  Vector direct =
      dep->m_apply(s(0, 0), y).col(0) - dep->mi_apply(0, y).col(0);
  CHECK((a - direct).norm() <= 1e-10 * std::max(1.0, direct.norm()));
}

TEST_CASE("md_apply vanishes beyond the polynomial degree") {
  auto poly = oracles::random_poly(4, 2, 22);
  Matrix y = Matrix::Random(4, 2);
  Matrix s = 0.3 * Matrix::Random(2, 2);
  Vector c = Vector::Random(2);
  CHECK(poly->md_apply(2, y, s, c, MdVariant::SumForm).norm() <= 1e-12);
  CHECK(poly->md_apply(2, y, s, c, MdVariant::Series).norm() <= 1e-12);
}

TEST_CASE("md_apply tail identity") {
  auto dep = oracles::random_dep(5, 19);
  Matrix y = Matrix::Random(5, 2);
  Matrix s = 0.45 * Matrix::Random(2, 2);
  Vector c = Vector::Random(2);
  for (int d : {0, 2, 5}) {
    Vector lhs = dep->md_apply(d, y, s, c, MdVariant::SumForm) -
                 dep->md_apply(d + 1, y, s, c, MdVariant::SumForm);
    // M_{d+1} Y S^{d+1} c / (d+1)!
    Vector v = c;
    double factorial = 1.0;
    for (int i = 1; i <= d + 1; ++i) {
      v = s * v;
      factorial *= i;
    }
    Vector rhs = dep->mi_apply(d + 1, y * v) / factorial;
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("md_apply rejects spectra outside the disk") {
  DiskLimitedNep nep(oracles::random_poly(3, 2, 23), 1.0);
  Matrix y = Matrix::Random(3, 2);
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 2.0; // outside |z| < 1
  Vector c = Vector::Ones(2);
  CHECK_THROWS_WITH_AS(
      (void)nep.md_apply(0, y, s, c, MdVariant::SumForm),
      doctest::Contains("analyticity"), Error);
}

TEST_CASE("residual vanishes on an exact polynomial eigenpair") {
  auto poly = oracles::random_poly(2, 2, 24);
  Complex root = polish_root(*poly, Complex(0.9, 0.4));
  REQUIRE(std::isfinite(root.real()));
  Vector v = oracles::null_vector(*poly, root);
  CHECK(poly->residual(root, v) <= 1e-14);
}

TEST_CASE("residual is positive away from eigenvalues") {
  auto dep = oracles::random_dep(5, 25);
  Vector v = Vector::Random(5);
  CHECK(dep->residual(0.0, v) > 0.0); // zero is never an eigenvalue
}

TEST_CASE("residual is scale invariant") {
  auto dep = oracles::random_dep(5, 26);
  Vector v = Vector::Random(5);
  const Complex lambda(0.2, 0.1);
  CHECK(dep->residual(lambda, v) ==
        doctest::Approx(dep->residual(lambda, Vector(2.0 * v)))
            .epsilon(1e-13));
}

TEST_CASE("derivative norm bounds") {
  auto dep = oracles::random_dep(8, 27);
  const Matrix a2 = dense(dep->a2());
  const double exact = a2.jacobiSvd().singularValues()(0);
  CHECK(dep->derivative_norm_bound(7) >= exact * 0.95);
  CHECK(dep->derivative_norm_bound(7) <= exact * 1.10);

  const Matrix m2 = dense(dep->a2()) - 2.0 * Matrix::Identity(8, 8);
  CHECK(dep->derivative_norm_bound(2) >=
        m2.jacobiSvd().singularValues()(0) * 0.999);

  auto poly = oracles::random_poly(3, 2, 28);
  CHECK(poly->derivative_norm_bound(3) == 0.0);
}

TEST_CASE("matrix market round trip and symmetry expansion") {
  auto dep = oracles::random_dep(6, 29);
  const std::string path = "mm_roundtrip_test.mtx";
  write_matrix_market(path, dep->a0());
  SparseMatrix back = read_matrix_market(path);
  CHECK((dense(back) - dense(dep->a0())).norm() <= 1e-14);
  std::remove(path.c_str());

  std::istringstream sym(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 2\n"
      "1 1 3.0\n"
      "2 1 -1.5\n");
  SparseMatrix s = read_matrix_market(sym, "inline");
  CHECK(s.coeff(0, 1) == Complex(-1.5, 0.0));
  CHECK(s.coeff(1, 0) == Complex(-1.5, 0.0));

  std::istringstream arr(
      "%%MatrixMarket matrix array complex general\n"
      "2 1\n"
      "1.0 2.0\n"
      "3.0 -4.0\n");
  SparseMatrix a = read_matrix_market(arr, "inline");
  CHECK(a.coeff(0, 0) == Complex(1.0, 2.0));
  CHECK(a.coeff(1, 0) == Complex(3.0, -4.0));
}

TEST_CASE("matrix market rejects malformed input") {
  std::istringstream bad("%%MatrixMarket matrix coordinate real general\n"
                         "2 2 1\n"
                         "3 1 1.0\n"); // row out of range
  CHECK_THROWS_AS((void)read_matrix_market(bad, "inline"), Error);

  std::istringstream nohdr("1 1 1\n");
  CHECK_THROWS_AS((void)read_matrix_market(nohdr, "inline"), Error);
}

TEST_CASE("grid generator shape") {
  auto dep = make_grid_dep(5);
  CHECK(dep->dim() == 25);
  CHECK_THROWS_AS((void)make_grid_dep(1), Error);
}
