#include <random>

#include "ads/error.hpp"
#include "ads/linalg.hpp"
#include "doctest.h"
#include "oracles.hpp"

using ads::Matrix;
using ads::Vector;

TEST_CASE("gram of identity and of a single column") {
  CHECK(ads::gram(Matrix::Identity(2, 2)) == Matrix::Identity(2, 2));
  Matrix m(2, 1);
  m << 3, 4;
  Matrix expect(2, 2);
  expect << 9, 12, 12, 16;
  CHECK(ads::gram(m) == expect);
}

TEST_CASE("gram of an empty sample set is zero") {
  const Matrix g = ads::gram(Matrix(5, 0));
  CHECK(g.rows() == 5);
  CHECK(g.isZero(0.0));
}

TEST_CASE("gram matches the triple loop and is exactly symmetric") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = oracle::random_matrix(gen, 5, 7);
    const Matrix g = ads::gram(m);
    const auto ref = oracle::naive_gram(m);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        CHECK(std::abs(g(i, j) - ref[i][j]) <= 1e-12);
        CHECK(g(i, j) == g(j, i));
      }
  }
}

TEST_CASE("max_eigvec of the identity") {
  const auto p = ads::max_eigvec(Matrix::Identity(3, 3));
  CHECK(p.value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.vector.norm() == doctest::Approx(1.0));
  CHECK((Matrix::Identity(3, 3) * p.vector - p.vector).norm() <= 1e-12);
}

TEST_CASE("max_eigvec picks the algebraically largest eigenvalue") {
  Matrix a = Vector::Map(std::vector<double>{3, 1, -5}.data(), 3).asDiagonal();
  const auto p = ads::max_eigvec(a);
  CHECK(p.value == doctest::Approx(3.0));
  CHECK(p.vector(0) == doctest::Approx(1.0));
  CHECK(std::abs(p.vector(1)) < 1e-14);
  CHECK(std::abs(p.vector(2)) < 1e-14);
}

TEST_CASE("max_eigvec agrees with the full-spectrum Jacobi oracle") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = oracle::random_symmetric(gen, 6);
    const auto p = ads::max_eigvec(a);
    CHECK(std::abs(p.value - oracle::jacobi_max_eigenvalue(a)) <= 1e-8);
    CHECK((a * p.vector - p.value * p.vector).norm() <= 1e-8 * a.norm());
    CHECK(std::abs(p.vector.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("max_eigvec sign convention and determinism") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = oracle::random_symmetric(gen, 1 + trial % 9);
    const auto p = ads::max_eigvec(a);
    for (Eigen::Index i = 0; i < p.vector.size(); ++i) {
      if (std::abs(p.vector(i)) > 1e-12) {
        CHECK(p.vector(i) > 0);
        break;
      }
    }
    const auto q = ads::max_eigvec(a);
    CHECK(p.value == q.value);
    CHECK(p.vector == q.vector);
  }
}

TEST_CASE("max_eigvec rejects non-square and asymmetric input") {
  CHECK_THROWS_AS(ads::max_eigvec(Matrix::Zero(2, 3)), ads::ContractViolation);
  Matrix a = Matrix::Identity(3, 3);
  a(0, 2) = 0.5;
  CHECK_THROWS_AS(ads::max_eigvec(a), ads::ContractViolation);
}

TEST_CASE("Rayleigh probes never beat max_eigvec") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_symmetric(gen, 2 + trial % 8);
    const auto p = ads::max_eigvec(a);
    CHECK(oracle::best_probe(gen, a, 2000) <= p.value + 1e-9);
  }
}

TEST_CASE("dominant_singular_dir on rank-one and diagonal Gram cases") {
  Matrix m = Matrix::Zero(3, 3);
  m.row(1).setOnes();
  CHECK(ads::dominant_singular_dir(m).isApprox(Vector::Unit(3, 1)));

  Matrix v = Matrix::Zero(3, 3);
  v(0, 0) = v(0, 1) = 1.0;
  v(1, 2) = 1.0;
  CHECK(ads::dominant_singular_dir(v).isApprox(Vector::Unit(3, 0)));
}

TEST_CASE("dominant_singular_dir beats random probes") {
  std::mt19937_64 gen(3);
  const Matrix m = oracle::random_matrix(gen, 8, 20);
  const Vector v = ads::dominant_singular_dir(m);
  const Matrix g = m * m.transpose();
  CHECK(oracle::best_probe(gen, g, 10000) <= v.dot(g * v) + 1e-9);
}

TEST_CASE("dominant_singular_dir equals max_eigvec of the Gram on both shapes") {
  std::mt19937_64 gen(4);
  for (int cols : {3, 8, 30}) {
    const Matrix m = oracle::random_matrix(gen, 8, cols);
    const Vector v = ads::dominant_singular_dir(m);
    const auto p = ads::max_eigvec(ads::gram(m));
    CHECK((v - p.vector).norm() <= 1e-8);
  }
}

TEST_CASE("dominant_singular_dir rejects zero and empty input") {
  CHECK_THROWS_AS(ads::dominant_singular_dir(Matrix::Zero(4, 3)), ads::DegenerateInput);
  CHECK_THROWS_AS(ads::dominant_singular_dir(Matrix(4, 0)), ads::DegenerateInput);
}
