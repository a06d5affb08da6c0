#include <doctest.h>

#include <cmath>

#include "dmlspss/dml.hpp"
#include "dmlspss/error.hpp"
#include "dmlspss/simulate.hpp"
#include "helpers.hpp"

using namespace dmlspss;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

NuisanceFit zero_nuisance(std::size_t size, std::size_t fold) {
  const auto n = static_cast<Eigen::Index>(size);
  return {Vector::Zero(n), Vector::Zero(n), Vector::Zero(n), fold};
}

std::vector<NuisanceFit> zero_nuisances(const FoldPlan& plan) {
  std::vector<NuisanceFit> out;
  for (std::size_t k = 0; k < plan.k(); ++k) out.push_back(zero_nuisance(plan.folds[k].size(), k));
  return out;
}

Dataset tiny(const Vector& y, const Vector& t) {
  return Dataset::make(y, t, Matrix::Zero(y.size(), 1));
}

FoldPlan single_fold(std::size_t n) {
  IndexList all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return FoldPlan{{all}};
}

// (1/K) sum_k mean_k(psi^2) and (1/K) sum_k mean_k(psi_a), written out directly.
std::pair<double, double> variance_terms(double beta, const Dataset& d, const FoldPlan& plan,
                                        const std::vector<NuisanceFit>& nuis) {
  double psi2 = 0.0;
  double ja = 0.0;
  for (std::size_t k = 0; k < plan.k(); ++k) {
    double s2 = 0.0;
    double sa = 0.0;
    for (std::size_t j = 0; j < plan.folds[k].size(); ++j) {
      const auto row = static_cast<Eigen::Index>(plan.folds[k][j]);
      const auto jj = static_cast<Eigen::Index>(j);
      const double tr = d.t(row) - nuis[k].m_hat(jj);
      const double yr = d.y(row) - nuis[k].ell_hat(jj);
      const double psi = -tr * tr * beta + yr * tr;
      s2 += psi * psi;
      sa += -tr * tr;
    }
    psi2 += s2 / static_cast<double>(plan.folds[k].size());
    ja += sa / static_cast<double>(plan.folds[k].size());
  }
  const double k = static_cast<double>(plan.k());
  return {psi2 / k, ja / k};
}

LearnerSpec constant_zero() { return {ConstantSpec{0.0}}; }

}  // namespace

TEST_CASE("score components") {
  const Vector t = vec({1.0, -2.0, 0.5});
  const Vector y = 0.5 * t;
  const ScoreComponents at_truth = score_components(y, t, zero_nuisance(3, 0), ScoreKind::PartiallingOut, 0.5);
  CHECK(at_truth.psi.cwiseAbs().maxCoeff() < 1e-15);

  NuisanceFit flat = zero_nuisance(3, 0);
  flat.m_hat = t;
  const ScoreComponents degenerate = score_components(y, t, flat, ScoreKind::PartiallingOut, 0.5);
  CHECK(degenerate.psi_a.cwiseAbs().maxCoeff() == 0.0);
  CHECK(degenerate.psi_b.cwiseAbs().maxCoeff() == 0.0);

  const ScoreComponents hand =
      score_components(vec({2, 5}), vec({1, 2}), zero_nuisance(2, 0), ScoreKind::PartiallingOut, 2.4);
  CHECK(hand.psi(0) == doctest::Approx(-0.4));
  CHECK(hand.psi(1) == doctest::Approx(0.4));

  NuisanceFit iv = zero_nuisance(2, 0);
  iv.m_hat = vec({0.5, 0.5});
  iv.g_hat = vec({1.0, 1.0});
  const ScoreComponents ivs = score_components(vec({2, 5}), vec({1, 2}), iv, ScoreKind::IvType, 1.0);
  CHECK(ivs.psi_a(1) == doctest::Approx(-2.0 * 1.5));
  CHECK(ivs.psi_b(1) == doctest::Approx(4.0 * 1.5));
}

TEST_CASE("cross-fitting with constant-zero learners") {
  const Dataset d = Dataset::make(testing::random_vector(10, 1), testing::random_vector(10, 2),
                                  testing::random_matrix(10, 2, 3));
  const FoldPlan plan = random_kfold(10, 2, 0);
  for (ScoreKind kind : {ScoreKind::PartiallingOut, ScoreKind::IvType}) {
    const auto nuis = fit_nuisances_crossfit(d, plan, constant_zero(), constant_zero(), kind);
    REQUIRE(nuis.size() == 2);
    for (const auto& f : nuis) {
      CHECK(f.m_hat.cwiseAbs().maxCoeff() == 0.0);
      CHECK(f.ell_hat.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("cross-fitting needs complements of at least two rows") {
  const Dataset d3 = Dataset::make(vec({1, 2, 3}), vec({1, 0, 1}), Matrix::Ones(3, 1));
  const FoldPlan loo{{{0}, {1}, {2}}};
  CHECK_NOTHROW(fit_nuisances_crossfit(d3, loo, constant_zero(), constant_zero(), ScoreKind::PartiallingOut));
  const Dataset d2 = Dataset::make(vec({1, 2}), vec({1, 0}), Matrix::Ones(2, 1));
  try {
    fit_nuisances_crossfit(d2, FoldPlan{{{0}, {1}}}, constant_zero(), constant_zero(), ScoreKind::PartiallingOut);
    FAIL("expected FoldTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FoldTooSmall);
  }
}

TEST_CASE("oracle nuisances leave centred residuals") {
  ScenarioConfig sc;
  sc.n = 2000;
  const DrawnData drawn = draw_dataset(sc, 5);
  const OracleLearners oracle = oracle_learners(sc);
  const FoldPlan plan = random_kfold(2000, 2, 1);
  const auto nuis = fit_nuisances_crossfit(drawn.data, plan, oracle.m, oracle.ell, ScoreKind::PartiallingOut);
  for (std::size_t k = 0; k < 2; ++k) {
    const Vector resid = take(drawn.data.t, plan.folds[k]) - nuis[k].m_hat;
    const double mc_se = 1.0 / std::sqrt(static_cast<double>(resid.size()));
    CHECK(std::abs(resid.mean()) < 3.0 * mc_se);
  }
}

TEST_CASE("single-fold DML") {
  const Dataset d = tiny(vec({2, 4}), vec({1, 2}));
  const FoldPlan plan = single_fold(2);
  const auto nuis = zero_nuisances(plan);
  const DmlEstimate e1 = dml1_estimate(d, plan, nuis, ScoreKind::PartiallingOut);
  const DmlEstimate e2 = dml2_estimate(d, plan, nuis, ScoreKind::PartiallingOut);
  CHECK(e2.beta == doctest::Approx(2.0));
  CHECK(std::abs(e1.beta - e2.beta) < 1e-12);

  const Dataset r = Dataset::make(testing::random_vector(9, 4), testing::random_vector(9, 5), Matrix::Zero(9, 1));
  const FoldPlan plan9 = single_fold(9);
  std::vector<NuisanceFit> rn{{testing::random_vector(9, 6) * 0.1, testing::random_vector(9, 7) * 0.1, Vector::Zero(9), 0}};
  CHECK(std::abs(dml1_estimate(r, plan9, rn, ScoreKind::PartiallingOut).beta -
                 dml2_estimate(r, plan9, rn, ScoreKind::PartiallingOut).beta) < 1e-12);
}

TEST_CASE("two-fold hand instance separates DML1 and DML2") {
  // Fold means (psi_a, psi_b): (-1, 2) from t = 1, y = 2; (-3, 2) from t = sqrt 3, y = 2 / sqrt 3.
  const double s3 = std::sqrt(3.0);
  const Dataset d = tiny(vec({2.0, 2.0 / s3}), vec({1.0, s3}));
  const FoldPlan plan{{{0}, {1}}};
  const auto nuis = zero_nuisances(plan);
  const DmlEstimate e1 = dml1_estimate(d, plan, nuis, ScoreKind::PartiallingOut);
  const DmlEstimate e2 = dml2_estimate(d, plan, nuis, ScoreKind::PartiallingOut);
  CHECK(std::abs(e1.beta - 4.0 / 3.0) < 1e-12);
  CHECK(std::abs(e2.beta - 1.0) < 1e-12);
  REQUIRE(e1.per_fold_beta.size() == 2);
  CHECK(e1.per_fold_beta[0] == doctest::Approx(2.0));
  CHECK(e1.per_fold_beta[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("equal folds with identical means give DML1 = DML2") {
  const Dataset d = tiny(vec({1, 3, 1, 3}), vec({1, 2, 1, 2}));
  const FoldPlan plan{{{0, 1}, {2, 3}}};
  const auto nuis = zero_nuisances(plan);
  CHECK(std::abs(dml1_estimate(d, plan, nuis, ScoreKind::PartiallingOut).beta -
                 dml2_estimate(d, plan, nuis, ScoreKind::PartiallingOut).beta) < 1e-12);
}

TEST_CASE("noiseless scenario data is identified exactly") {
  ScenarioConfig sc;
  sc.n = 400;
  sc.u_scale = 1e-9;
  sc.v_scale = 1e-3;
  const DrawnData drawn = draw_dataset(sc, 11);
  const OracleLearners oracle = oracle_learners(sc);
  const FoldPlan plan = random_kfold(400, 2, 3);
  for (DmlAlgorithm alg : {DmlAlgorithm::DML1, DmlAlgorithm::DML2}) {
    const DmlEstimate e = estimate_ate(drawn.data, plan, oracle.m, oracle.ell, ScoreKind::PartiallingOut, alg);
    CHECK(std::abs(e.beta - 0.5) < 1e-6);
  }
}

TEST_CASE("pooled moment condition holds at the DML2 estimate") {
  const int n = 50;
  const Dataset d = Dataset::make(testing::random_vector(n, 12), testing::random_vector(n, 13),
                                  testing::random_matrix(n, 3, 14));
  const FoldPlan plan = random_kfold(n, 3, 2);
  for (ScoreKind kind : {ScoreKind::PartiallingOut, ScoreKind::IvType}) {
    const auto nuis = fit_nuisances_crossfit(d, plan, {RidgeSpec{1.0}}, {RidgeSpec{1.0}}, kind);
    const DmlEstimate e2 = dml2_estimate(d, plan, nuis, kind);
    double pooled = 0.0;
    for (std::size_t k = 0; k < plan.k(); ++k) {
      pooled += score_components(take(d.y, plan.folds[k]), take(d.t, plan.folds[k]), nuis[k], kind, e2.beta).psi.mean();
    }
    CHECK(std::abs(pooled) < 1e-10);

    const DmlEstimate e1 = dml1_estimate(d, plan, nuis, kind);
    for (std::size_t k = 0; k < plan.k(); ++k) {
      const double m = score_components(take(d.y, plan.folds[k]), take(d.t, plan.folds[k]), nuis[k], kind,
                                        e1.per_fold_beta[k]).psi.mean();
      CHECK(std::abs(m) < 1e-10);
    }
  }
}

TEST_CASE("variance estimate") {
  const Dataset d = tiny(vec({2, 5}), vec({1, 2}));
  const FoldPlan plan = single_fold(2);
  const auto nuis = zero_nuisances(plan);
  const DmlEstimate e = dml2_estimate(d, plan, nuis, ScoreKind::PartiallingOut);
  CHECK(e.beta == doctest::Approx(2.4));
  const VarianceEstimate v = variance_estimate(e.beta, d, plan, nuis, ScoreKind::PartiallingOut);
  CHECK(v.sigma2 == doctest::Approx(0.0256));
  CHECK(v.j_hat == doctest::Approx(-2.5));
  CHECK(std::abs(e.ci.lo - 2.17825) < 1e-5);
  CHECK(std::abs(e.ci.hi - 2.62175) < 1e-5);

  const Dataset exact = tiny(vec({0.5, 1.0}), vec({1, 2}));
  CHECK(variance_estimate(0.5, exact, plan, nuis, ScoreKind::PartiallingOut).sigma2 == 0.0);
}

TEST_CASE("variance estimate matches a direct evaluation") {
  const int n = 30;
  const Dataset d = Dataset::make(testing::random_vector(n, 15), testing::random_vector(n, 16),
                                  testing::random_matrix(n, 2, 17));
  const FoldPlan plan = random_kfold(n, 3, 4);
  std::vector<NuisanceFit> nuis;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto sz = static_cast<int>(plan.folds[k].size());
    nuis.push_back({testing::random_vector(sz, 20 + k) * 0.3, testing::random_vector(sz, 30 + k) * 0.3,
                    Vector::Zero(sz), k});
  }
  const double beta = 0.37;
  const VarianceEstimate v = variance_estimate(beta, d, plan, nuis, ScoreKind::PartiallingOut);
  const auto [psi2, j] = variance_terms(beta, d, plan, nuis);
  CHECK(std::abs(v.j_hat - j) < 1e-12);
  CHECK(std::abs(v.sigma2 - psi2 / (j * j)) < 1e-12);
  CHECK(std::abs(v.sigma2 * v.j_hat * v.j_hat - psi2) < 1e-12);
}

TEST_CASE("confidence intervals") {
  CHECK(std::abs(normal_quantile(0.975) - 1.959964) < 1e-6);
  CHECK(std::abs(normal_quantile(0.95) - 1.644854) < 1e-6);
  const ConfidenceInterval flat = confidence_interval(1.5, 0.0, 10, 0.05);
  CHECK(flat.lo == 1.5);
  CHECK(flat.hi == 1.5);
  const ConfidenceInterval ci = confidence_interval(2.4, 0.0256, 2, 0.05);
  CHECK(std::abs(ci.lo - 2.17825) < 1e-5);
  CHECK(std::abs(ci.hi - 2.62175) < 1e-5);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 10, 0.0), Error);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 10, 1.0), Error);
}

TEST_CASE("degenerate folds are reported") {
  const Dataset d = tiny(vec({1, 2, 3, 4}), vec({1, 1, 2, 2}));
  const FoldPlan plan{{{0, 1}, {2, 3}}};
  std::vector<NuisanceFit> nuis = zero_nuisances(plan);
  nuis[0].m_hat = vec({1, 1});
  nuis[1].m_hat = vec({2, 2});
  auto code = [&](DmlAlgorithm alg) {
    try {
      if (alg == DmlAlgorithm::DML1) dml1_estimate(d, plan, nuis, ScoreKind::PartiallingOut);
      else dml2_estimate(d, plan, nuis, ScoreKind::PartiallingOut);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::NonFinite;
  };
  CHECK(code(DmlAlgorithm::DML1) == Errc::DegenerateFold);
  CHECK(code(DmlAlgorithm::DML2) == Errc::DegenerateAggregate);
}

TEST_CASE("orthogonality diagnostic") {
  ScenarioConfig sc;
  sc.n = 4000;
  const DrawnData drawn = draw_dataset(sc, 21);
  const OracleLearners oracle = oracle_learners(sc);
  const FoldPlan plan = random_kfold(4000, 2, 5);

  const auto po = fit_nuisances_crossfit(drawn.data, plan, oracle.m, oracle.ell, ScoreKind::PartiallingOut);
  const double ortho = orthogonality_diagnostic(drawn.data, plan, po, ScoreKind::PartiallingOut, 1e-4);
  CHECK(ortho <= 5e-2);
  const double ortho_m0 =
      orthogonality_diagnostic(drawn.data, plan, po, ScoreKind::PartiallingOut, 1e-4, drawn.m0);
  CHECK(ortho_m0 <= 5e-2);

  // IvType with g held at the truth.
  std::vector<NuisanceFit> iv = po;
  for (std::size_t k = 0; k < plan.k(); ++k) iv[k].g_hat = take(drawn.g0, plan.folds[k]);
  CHECK(orthogonality_diagnostic(drawn.data, plan, iv, ScoreKind::IvType, 1e-4) <= 5e-2);

  // Naive score: m fixed at zero, so t itself is the "residual".
  std::vector<NuisanceFit> naive = po;
  for (auto& f : naive) f.m_hat.setZero();
  const double contrast =
      orthogonality_diagnostic(drawn.data, plan, naive, ScoreKind::PartiallingOut, 1e-4, drawn.m0);
  CHECK(contrast > 0.2);
  CHECK(contrast > 10 * ortho_m0);
}
