#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "ads/dictlearn.hpp"
#include "ads/error.hpp"
#include "ads/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "structure_audit.hpp"

using ads::FlatDictionary;
using ads::Matrix;
using ads::Vector;

namespace {

// Top eigenvector of a symmetric matrix from Eigen's own solver.
Vector top_eigvec(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return es.eigenvectors().col(a.rows() - 1);
}

bool same_up_to_sign(const Vector& a, const Vector& b, double tol) {
  return std::min((a - b).norm(), (a + b).norm()) <= tol;
}

// K orthonormal generators, each repeated with random nonzero scale.
Matrix planted(std::mt19937_64& gen, const Matrix& q, int copies) {
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  Matrix y(q.rows(), q.cols() * copies);
  for (int k = 0; k < q.cols(); ++k)
    for (int c = 0; c < copies; ++c)
      y.col(k * copies + c) = q.col(k) * scale(gen) * (gen() & 1 ? 1.0 : -1.0);
  return y;
}

}  // namespace

TEST_CASE("TrainConfig defaults and validation") {
  ads::TrainConfig cfg;
  CHECK(cfg.natoms == 64);
  CHECK(cfg.levels == 2);
  CHECK(cfg.iters_level1 == 50);
  CHECK(cfg.iters_other == 10);
  CHECK(cfg.alpha == 1.0 / 40.0);
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ads::ContractViolation);
  cfg = {};
  cfg.levels = 0;
  CHECK_THROWS_AS(cfg.validate(), ads::ContractViolation);
}

TEST_CASE("ksvd1 recovers planted orthonormal atoms") {
  std::mt19937_64 gen(1);
  const int k = 6;
  const Matrix q = oracle::random_orthonormal(gen, 10, k);
  Matrix y(10, k * 10);
  for (int j = 0; j < k; ++j)
    for (int c = 0; c < 10; ++c) y.col(j * 10 + c) = q.col(j);
  ads::KsvdTrace trace;
  const FlatDictionary d = ads::ksvd1(y, k, 30, 7, &trace);
  CHECK(trace.objective.back() < 1e-10);
  for (int j = 0; j < k; ++j) {
    bool found = false;
    for (int a = 0; a < k; ++a) found |= same_up_to_sign(d.atoms().col(a), q.col(j), 1e-6);
    CHECK(found);
  }
}

TEST_CASE("one ksvd1 iteration equals the hand-composed oracles") {
  std::mt19937_64 gen(2);
  const Matrix y = oracle::random_matrix(gen, 4, 12);
  const int k = 3;
  const std::uint64_t seed = 99;

  // Initial atoms: first K nonzero columns of the seeded permutation.
  ads::Rng rng(seed);
  Matrix d(4, k);
  int filled = 0;
  for (auto idx : rng.permutation(12)) {
    if (filled == k) break;
    d.col(filled++) = y.col(static_cast<Eigen::Index>(idx)).normalized();
  }
  std::vector<std::vector<int>> members(k);
  std::vector<double> err(12);
  for (int i = 0; i < 12; ++i) {
    const int a = oracle::brute_argmax(y.col(i), d);
    members[static_cast<std::size_t>(a)].push_back(i);
    err[static_cast<std::size_t>(i)] = y.col(i).squaredNorm() - std::pow(y.col(i).dot(d.col(a)), 2);
  }
  for (int a = 0; a < k; ++a) {
    const auto& m = members[static_cast<std::size_t>(a)];
    if (m.empty()) {
      const auto w = std::max_element(err.begin(), err.end()) - err.begin();
      d.col(a) = y.col(w).normalized();
      err[static_cast<std::size_t>(w)] = -1;
      continue;
    }
    Matrix sub(4, static_cast<Eigen::Index>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = y.col(m[i]);
    d.col(a) = top_eigvec(sub * sub.transpose());
  }

  const FlatDictionary got = ads::ksvd1(y, k, 1, seed);
  for (int a = 0; a < k; ++a) CHECK(same_up_to_sign(got.atoms().col(a), d.col(a), 1e-8));
}

TEST_CASE("ksvd1 objective never increases") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix y = oracle::random_matrix(gen, 8, 200);
    ads::KsvdTrace trace;
    ads::ksvd1(y, 10, 15, static_cast<std::uint64_t>(trial), &trace);
    REQUIRE(trace.objective.size() == 16);
    for (std::size_t i = 1; i < trace.objective.size(); ++i)
      CHECK(trace.objective[i] <= trace.objective[i - 1] + 1e-12);
  }
}

TEST_CASE("ksvd1 needs at least K samples and tolerates zero columns") {
  CHECK_THROWS_AS(ads::ksvd1(Matrix::Ones(4, 3), 4, 5, 0), ads::InsufficientData);
  Matrix y = Matrix::Zero(4, 6);
  y(0, 0) = 1.0;
  const FlatDictionary d = ads::ksvd1(y, 3, 5, 0);
  CHECK(d.size() == 3);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(d.atoms().col(a).norm() - 1.0) < 1e-12);
}

TEST_CASE("split_residuals on exact atoms and on a single cluster") {
  const FlatDictionary basis(Matrix::Identity(4, 4));
  const auto exact = ads::split_residuals(Matrix::Identity(4, 4) * 3.0, basis);
  CHECK(exact.residuals.isZero(0.0));
  for (int k = 0; k < 4; ++k) CHECK(exact.members[static_cast<std::size_t>(k)].size() == 1);

  Matrix y(4, 5);
  y << 5, 4, 6, 3, 5,  //
      1, 0, -1, 0.5, 0,  //
      0, 1, 0, 0, 0.3,  //
      0, 0, 1, -1, 0;
  const auto one = ads::split_residuals(y, basis);
  CHECK(one.members[0].size() == 5);
  for (int k = 1; k < 4; ++k) CHECK(one.members[static_cast<std::size_t>(k)].empty());
  CHECK(one.set(0).row(0).isZero(0.0));
}

TEST_CASE("split_residuals partition matches the brute-force scan") {
  std::mt19937_64 gen(4);
  Matrix a(6, 5);
  for (int j = 0; j < 5; ++j) a.col(j) = oracle::random_unit(gen, 6);
  const FlatDictionary d(a);
  const Matrix y = oracle::random_matrix(gen, 6, 300);
  const auto s = ads::split_residuals(y, d);
  std::size_t total = 0;
  for (int i = 0; i < 300; ++i) {
    const int k = oracle::brute_argmax(y.col(i), a);
    CHECK(s.assignment[static_cast<std::size_t>(i)] == k);
    const Vector r = y.col(i) - y.col(i).dot(a.col(k)) * a.col(k);
    CHECK((s.residuals.col(i) - r).norm() < 1e-12);
  }
  for (const auto& m : s.members) {
    CHECK(std::is_sorted(m.begin(), m.end()));
    total += m.size();
  }
  CHECK(total == 300);
}

TEST_CASE("learn_structure: only a merged dictionary when every branch is small") {
  const int k = 4;
  std::mt19937_64 gen(5);
  Matrix y(4, 12);
  for (int i = 0; i < 12; ++i) {
    y.col(i) = 0.1 * oracle::random_matrix(gen, 4, 1).col(0);
    y(i % 4, i) = 3.0;  // three samples per root atom
  }
  ads::TrainConfig cfg;
  cfg.natoms = k;
  cfg.iters_other = 3;
  const auto s = ads::learn_structure(y, FlatDictionary(Matrix::Identity(4, 4)), cfg);
  CHECK(s.node_count() == 1);
  CHECK(s.merged_count() == 1);
  REQUIRE(s.merged(2) != nullptr);
  CHECK(s.merged(2)->size() == k);
}

TEST_CASE("learn_structure: a single large branch gets the only child") {
  const int k = 4;
  std::mt19937_64 gen(6);
  Matrix y(4, 20);
  for (int i = 0; i < 20; ++i) {
    y.col(i) = 0.2 * oracle::random_matrix(gen, 4, 1).col(0);
    y(0, i) = 5.0;
  }
  ads::TrainConfig cfg;
  cfg.natoms = k;
  cfg.iters_other = 3;
  const auto s = ads::learn_structure(y, FlatDictionary(Matrix::Identity(4, 4)), cfg);
  CHECK(s.node_count() == 2);
  CHECK(s.child(0, 0) == 1);
  for (int a = 1; a < k; ++a) CHECK(s.child(0, a) == -1);
  CHECK(s.merged_count() == 0);
}


TEST_CASE("learn_structure sample accounting on random training sets") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 12; ++trial) {
    const int dim = 6, k = 4 + trial % 3;
    const int cols = 40 + static_cast<int>(gen() % 200);
    Matrix y = oracle::random_matrix(gen, dim, cols);
    // Skew the data so some branches are large and others small.
    y.row(0) *= 3.0;
    ads::TrainConfig cfg;
    cfg.natoms = k;
    cfg.levels = 2 + trial % 3;
    cfg.iters_other = 4;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const FlatDictionary first = ads::ksvd1(y, k, 5, cfg.seed);
    ads::StructureAudit audit;
    const auto s = ads::learn_structure(y, first, cfg, 0, &audit);
    for (int n = 0; n < s.node_count(); ++n) CHECK(s.node(n).dictionary.size() == k);
    const auto problems = structure_audit::check(y, s, audit, k);
    CHECK_MESSAGE(problems.empty(), (problems.empty() ? "" : problems.front()));
  }
}

TEST_CASE("class representative") {
  Matrix raw(3, 4);
  for (int j = 0; j < 4; ++j) raw.col(j) = Vector::Unit(3, 0) * (j + 1.0) - Vector::Unit(3, 1) * (j + 1.0);
  Vector expect(3);
  expect << 1, -1, 0;
  expect.normalize();
  CHECK(same_up_to_sign(ads::class_representative(raw), expect, 1e-12));

  CHECK_THROWS_AS(ads::class_representative(Matrix::Constant(5, 3, 2.0)), ads::DegenerateInput);

  std::mt19937_64 gen(8);
  const Matrix r = oracle::random_matrix(gen, 7, 30);
  Matrix centred = r;
  for (int j = 0; j < 30; ++j) centred.col(j).array() -= r.col(j).mean();
  const Matrix g = centred * centred.transpose();
  const Vector eta = ads::class_representative(r);
  CHECK(std::abs(eta.dot(g * eta) - oracle::jacobi_max_eigenvalue(g)) <= 1e-8 * std::max(1.0, g.norm()));
}

TEST_CASE("affinity matrix") {
  std::vector<Vector> same(3, Vector::Unit(4, 2));
  CHECK(ads::affinity(same).values == Matrix::Ones(3, 3));
  std::vector<Vector> ortho{Vector::Unit(4, 0), Vector::Unit(4, 1), Vector::Unit(4, 3)};
  CHECK(ads::affinity(ortho).values == Matrix::Identity(3, 3));

  std::mt19937_64 gen(9);
  std::vector<Vector> reps{oracle::random_unit(gen, 5), oracle::random_unit(gen, 5), oracle::random_unit(gen, 5)};
  const auto s = ads::affinity(reps);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(s(i, j) == s(j, i));
      CHECK(s(i, j) >= 0.0);
      CHECK(s(i, j) <= 1.0);
      if (i == j) CHECK(s(i, j) == 1.0);
      else CHECK(s(i, j) == doctest::Approx(std::abs(reps[i].dot(reps[j]))).epsilon(1e-14));
    }
}

TEST_CASE("counter quotas from the rounding rule") {
  ads::AffinityMatrix s{Matrix::Identity(3, 3)};
  s.values(0, 1) = s.values(1, 0) = 1.0;
  s.values(0, 2) = s.values(2, 0) = 0.0;
  std::vector<Eigen::Index> sizes{10, 10, 10};
  auto q = ads::counter_quotas(0, s, sizes);
  CHECK(q == std::vector<Eigen::Index>{0, 10, 0});

  s.values(0, 1) = s.values(1, 0) = 0.5;
  s.values(0, 2) = s.values(2, 0) = 0.5;
  std::vector<Eigen::Index> big{62001, 62001, 62001};
  q = ads::counter_quotas(0, s, big);
  CHECK(q[1] == 31001);
  CHECK(q[1] == oracle::round_half_away(0.5 * 62001));
}

TEST_CASE("counter quotas for unequal class sizes") {
  ads::AffinityMatrix s{Matrix::Identity(3, 3)};
  s.values(0, 1) = s.values(1, 0) = 0.6;
  s.values(0, 2) = s.values(2, 0) = 0.2;
  std::vector<Eigen::Index> sizes{100, 300, 200};
  const auto q = ads::counter_quotas(0, s, sizes);
  // Total round(0.8 * 200) = 160, split 3:1.
  CHECK(q[0] == 0);
  CHECK(q[1] == 120);
  CHECK(q[2] == 40);
}

TEST_CASE("counter samples are the most correlated ones") {
  std::mt19937_64 gen(10);
  std::vector<Matrix> classes{oracle::random_matrix(gen, 5, 20), oracle::random_matrix(gen, 5, 20),
                              oracle::random_matrix(gen, 5, 20)};
  ads::AffinityMatrix s{Matrix::Identity(3, 3)};
  s.values(0, 1) = s.values(1, 0) = 0.3;
  s.values(0, 2) = s.values(2, 0) = 0.55;
  const Vector d = oracle::random_unit(gen, 5);
  const Matrix out = ads::counter_samples(d, 0, s, classes);
  const long n1 = oracle::round_half_away(0.3 * 20), n2 = oracle::round_half_away(0.55 * 20);
  REQUIRE(out.cols() == n1 + n2);
  auto expect = [&](const Matrix& y, long n) {
    std::vector<int> idx(static_cast<std::size_t>(y.cols()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return std::abs(y.col(a).dot(d)) > std::abs(y.col(b).dot(d));
    });
    idx.resize(static_cast<std::size_t>(n));
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const auto e1 = expect(classes[1], n1), e2 = expect(classes[2], n2);
  for (long i = 0; i < n1; ++i) CHECK(out.col(i) == classes[1].col(e1[static_cast<std::size_t>(i)]));
  for (long i = 0; i < n2; ++i) CHECK(out.col(n1 + i) == classes[2].col(e2[static_cast<std::size_t>(i)]));
}

TEST_CASE("discriminative update without counter samples is the reconstructive one") {
  std::mt19937_64 gen(11);
  const Matrix ycr = oracle::random_matrix(gen, 8, 15);
  CHECK(ads::discriminative_update(ycr, Matrix(8, 0), 1.0 / 40) == ads::dominant_singular_dir(ycr));
}

TEST_CASE("discriminative update on a diagonal instance") {
  const Matrix ycr = Vector::Unit(3, 0).replicate(1, 5);
  const Matrix ycn = Vector::Unit(3, 1).replicate(1, 5);
  const Vector d = ads::discriminative_update(ycr, ycn, 1.0 / 40);
  CHECK(same_up_to_sign(d, Vector::Unit(3, 0), 1e-12));
}

TEST_CASE("discriminative update attains the top eigenvalue of A") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix ycr = oracle::random_matrix(gen, 8, 5 + trial);
    const Matrix ycn = oracle::random_matrix(gen, 8, 3 + 2 * trial);
    const double alpha = 0.01 + 0.5 * (trial % 5);
    const double lambda = alpha * ycr.cols() / static_cast<double>(ycn.cols());
    const Matrix a = ycr * ycr.transpose() - lambda * ycn * ycn.transpose();
    const Vector d = ads::discriminative_update(ycr, ycn, alpha);
    const double top = oracle::jacobi_max_eigenvalue(a);
    CHECK(std::abs(d.dot(a * d) - top) <= 1e-8 * std::max(1.0, a.norm()));
    CHECK(oracle::best_probe(gen, a, 10000) <= d.dot(a * d) + 1e-9);
  }
}

TEST_CASE("counter samples push the atom away") {
  Matrix ycr(2, 2);
  ycr << 1, 1, 0.2, -0.1;  // own samples along e1
  Matrix ycn(2, 1);
  ycn << 1, 0.0;
  const Vector plain = ads::discriminative_update(ycr, Matrix(2, 0), 1.0);
  const Vector pushed = ads::discriminative_update(ycr, ycn, 1.0);
  CHECK(std::abs(pushed(0)) < std::abs(plain(0)));
}

TEST_CASE("train_class with one class is ksvd1 followed by learn_structure") {
  std::mt19937_64 gen(13);
  const Matrix y = oracle::random_matrix(gen, 6, 120);
  ads::TrainConfig cfg;
  cfg.natoms = 5;
  cfg.iters_level1 = 6;
  cfg.iters_other = 3;
  cfg.seed = 4;
  std::vector<Matrix> classes{y};
  const auto got = ads::train_class(0, classes, classes, cfg);

  ads::TrainConfig own = cfg;
  own.seed = ads::class_seed(cfg.seed, 0);
  const FlatDictionary first = ads::ksvd1(y, cfg.natoms, cfg.iters_level1, own.seed);
  const auto expect = ads::learn_structure(y, first, own, 0);
  CHECK(got == expect);
}

TEST_CASE("train_class separates orthogonal classes and is deterministic") {
  std::mt19937_64 gen(14);
  Matrix a = Matrix::Zero(8, 80), b = Matrix::Zero(8, 80);
  a.topRows(4) = oracle::random_matrix(gen, 4, 80);
  b.bottomRows(4) = oracle::random_matrix(gen, 4, 80);
  std::vector<Matrix> classes{a, b};
  ads::TrainConfig cfg;
  cfg.natoms = 4;
  cfg.iters_level1 = 5;
  cfg.iters_other = 3;
  const auto da = ads::train_class(0, classes, classes, cfg);
  const auto db = ads::train_class(1, classes, classes, cfg);
  for (int i = 0; i < 80; ++i) {
    const Vector ya = a.col(i), yb = b.col(i);
    CHECK(ads::norm_error(ya, ads::decompose(ya, da, 1)) < ads::norm_error(ya, ads::decompose(ya, db, 1)));
    CHECK(ads::norm_error(yb, ads::decompose(yb, db, 1)) < ads::norm_error(yb, ads::decompose(yb, da, 1)));
  }
  CHECK(ads::train_class(0, classes, classes, cfg) == da);
  const auto all = ads::train_all(classes, classes, cfg);
  CHECK(all[0] == da);
  CHECK(all[1] == db);
}
