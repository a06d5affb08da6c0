#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "dmlspss/energy.hpp"
#include "dmlspss/error.hpp"
#include "dmlspss/support_points.hpp"
#include "helpers.hpp"

using namespace dmlspss;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

SpConfig one_point(std::uint64_t seed) {
  SpConfig cfg;
  cfg.n_points = 1;
  cfg.max_iter = 5000;
  cfg.tol = 1e-15;
  cfg.seed = seed;
  return cfg;
}

bool non_increasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] > trace[i - 1] + 1e-12) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("a single support point is the median in 1-D") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CHECK(std::abs(compute_support_points(col({-1, 0, 1}), one_point(seed)).points(0, 0)) < 1e-6);
    CHECK(std::abs(compute_support_points(col({0, 1, 5}), one_point(seed)).points(0, 0) - 1.0) < 1e-6);
  }
}

TEST_CASE("a single support point is the geometric median in 2-D") {
  // Four corners of a square plus the centre: the centre is the geometric median.
  Matrix full(5, 2);
  full << 0, 0, 2, 0, 0, 2, 2, 2, 1, 1;
  const SpResult r = compute_support_points(full, one_point(3));
  CHECK(std::abs(r.points(0, 0) - 1.0) < 1e-6);
  CHECK(std::abs(r.points(0, 1) - 1.0) < 1e-6);
}

TEST_CASE("n_points = N started at the data stays at zero energy") {
  const Matrix full = testing::random_matrix(12, 3, 9);
  SpConfig cfg;
  cfg.n_points = 12;
  cfg.initial_points = full;
  const SpResult r = compute_support_points(full, cfg);
  CHECK(energy_two_sample(r.points, full) <= 1e-8);
}

TEST_CASE("objective trace never increases and ends below the start") {
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix full = testing::random_matrix(60, 1 + trial % 4, 50 + trial);
    SpConfig cfg;
    cfg.n_points = 8;
    cfg.max_iter = 50;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const SpResult r = compute_support_points(full, cfg);
    CHECK(non_increasing(r.objective_trace));
    CHECK(r.objective_trace.back() <= r.objective_trace.front());
    CHECK(std::abs(r.objective_trace.back() - sp_objective(r.points, full)) < 1e-9);
    CHECK(sp_objective(r.points, full) <= sp_objective(initial_support_points(full, cfg), full) + 1e-12);
  }
}

TEST_CASE("support points are deterministic given the config") {
  const Matrix full = testing::random_matrix(40, 2, 1);
  SpConfig cfg;
  cfg.n_points = 5;
  cfg.max_iter = 30;
  cfg.seed = 17;
  CHECK(compute_support_points(full, cfg).points == compute_support_points(full, cfg).points);
  cfg.init = SpInit::KMeansPlusPlusRows;
  CHECK(compute_support_points(full, cfg).points == compute_support_points(full, cfg).points);
}

TEST_CASE("without jitter the initial points are distinct data rows") {
  const Matrix full = testing::random_matrix(30, 2, 4);
  for (SpInit init : {SpInit::RandomRows, SpInit::KMeansPlusPlusRows}) {
    SpConfig cfg;
    cfg.n_points = 6;
    cfg.init_jitter = 0.0;
    cfg.init = init;
    const Matrix p = initial_support_points(full, cfg);
    const IndexList rows = snap_to_rows(p, full);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      CHECK(p.row(i) == full.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)])));
    }
  }
}

TEST_CASE("support points reject bad configs") {
  const Matrix full = testing::random_matrix(5, 2, 1);
  SpConfig cfg;
  cfg.n_points = 6;
  CHECK_THROWS_AS(compute_support_points(full, cfg), Error);
  cfg.n_points = 2;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(compute_support_points(full, cfg), Error);
  cfg.tol = 1e-8;
  cfg.initial_points = Matrix::Zero(3, 2);
  CHECK_THROWS_AS(compute_support_points(full, cfg), Error);
}

TEST_CASE("snap_to_rows matches exact rows") {
  const Matrix full = testing::random_matrix(10, 3, 2);
  const IndexList want{7, 2, 5};
  CHECK(snap_to_rows(take_rows(full, want), full) == want);
}

TEST_CASE("snap_to_rows agrees with brute force over assignments") {
  // Both points are nearest to row 3.
  const Matrix full = col({0.0, 1.0, 2.0, 3.0});
  const Matrix points = col({3.1, 2.8});

  // Enumerate ordered row pairs; sequential assignment is the lexicographic
  // minimum of (distance of point 0, distance of point 1, row indices).
  std::size_t best0 = 0;
  std::size_t best1 = 0;
  double bd0 = 1e300;
  double bd1 = 1e300;
  for (std::size_t r0 = 0; r0 < 4; ++r0) {
    for (std::size_t r1 = 0; r1 < 4; ++r1) {
      if (r0 == r1) continue;
      const double d0 = std::abs(points(0, 0) - full(static_cast<Eigen::Index>(r0), 0));
      const double d1 = std::abs(points(1, 0) - full(static_cast<Eigen::Index>(r1), 0));
      if (d0 < bd0 || (d0 == bd0 && d1 < bd1)) {
        bd0 = d0;
        bd1 = d1;
        best0 = r0;
        best1 = r1;
      }
    }
  }
  const IndexList got = snap_to_rows(points, full);
  CHECK(got == IndexList{best0, best1});
  CHECK(got == IndexList{3, 2});
}

TEST_CASE("snap_to_rows breaks ties by the lowest row") {
  const Matrix full = col({5.0, 1.0, 3.0});
  CHECK(snap_to_rows(col({2.0}), full) == IndexList{1});
  CHECK_THROWS_AS(snap_to_rows(Matrix::Zero(4, 1), full), Error);
  CHECK_THROWS_AS(snap_to_rows(Matrix::Zero(1, 2), full), Error);
}

TEST_CASE("refine_subset never raises energy and ends at a local optimum") {
  const Matrix full = testing::random_matrix(40, 2, 77);
  IndexList start(8);
  std::iota(start.begin(), start.end(), std::size_t{0});
  const IndexList refined = refine_subset(full, start, 1000);

  REQUIRE(refined.size() == start.size());
  IndexList sorted = refined;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());

  const double e_start = testing::naive_energy(take_rows(full, start), full);
  const double e_refined = testing::naive_energy(take_rows(full, refined), full);
  CHECK(e_refined <= e_start);

  // No single exchange helps.
  std::vector<bool> in(40, false);
  for (auto r : refined) in[r] = true;
  for (std::size_t slot = 0; slot < refined.size(); ++slot) {
    for (std::size_t j = 0; j < 40; ++j) {
      if (in[j]) continue;
      IndexList trial = refined;
      trial[slot] = j;
      CHECK(testing::naive_energy(take_rows(full, trial), full) >= e_refined - 1e-12);
    }
  }
  CHECK(refine_subset(full, start, 0) == start);
}
