#include "dmlspss/simulate.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "dmlspss/parallel.hpp"

namespace dmlspss {
namespace {

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

const char* to_string(Scenario s) noexcept { return s == Scenario::S1 ? "S1" : "S2"; }

const char* to_string(Splitter s) noexcept { return s == Splitter::Spss ? "spss" : "random"; }

double ScenarioConfig::rho() const { return scenario == Scenario::S1 ? 0.7 : 0.5; }

double ScenarioConfig::uv_corr() const { return scenario == Scenario::S1 ? 0.0 : 0.3; }

int ScenarioConfig::logistic_index() const { return std::min(logistic_coord, p) - 1; }

int ScenarioConfig::linear_index() const { return linear_coord - 1; }

void validate(const ScenarioConfig& cfg) {
  if (cfg.p < 1) throw Error(Errc::InvalidConfig, "scenario p must be >= 1");
  if (cfg.n < 2) throw Error(Errc::InvalidConfig, "scenario n must be >= 2");
  if (cfg.linear_coord < 1 || cfg.linear_coord > cfg.p) {
    throw Error(Errc::InvalidConfig, "linear_coord must lie in [1, p]");
  }
  if (cfg.logistic_coord < 1) throw Error(Errc::InvalidConfig, "logistic_coord must be >= 1");
  if (!(cfg.u_scale >= 0.0) || !(cfg.v_scale >= 0.0)) {
    throw Error(Errc::InvalidConfig, "error scales must be >= 0");
  }
}

Matrix ar1_covariance(double rho, int p) {
  if (!(rho > -1.0 && rho < 1.0)) throw Error(Errc::InvalidRho, "rho must lie in (-1, 1)");
  if (p < 1) throw Error(Errc::InvalidConfig, "p must be >= 1");
  Matrix sigma(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
  }
  return sigma;
}

NuisanceTruth nuisance_truth(const Eigen::Ref<const Eigen::RowVectorXd>& x_row,
                             const ScenarioConfig& cfg) {
  const double lin = x_row[cfg.linear_index()];
  const double logit = logistic(x_row[cfg.logistic_index()]);
  return {logit + 0.25 * lin, lin + 0.25 * logit};
}

DrawnData draw_dataset(const ScenarioConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const Eigen::LLT<Eigen::MatrixXd> chol(Eigen::MatrixXd(ar1_covariance(cfg.rho(), cfg.p)));
  if (chol.info() != Eigen::Success) {
    throw Error(Errc::SingularSystem, "covariance matrix is not positive definite");
  }
  const Eigen::MatrixXd lower = chol.matrixL();
  const double corr = cfg.uv_corr();
  const double corr_c = std::sqrt(1.0 - corr * corr);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(cfg.n, cfg.p);
  Vector y(cfg.n), t(cfg.n), g0(cfg.n), m0(cfg.n);
  Eigen::VectorXd z(cfg.p);
  for (int i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < cfg.p; ++j) z[j] = normal(rng);
    x.row(i) = (lower * z).transpose();
    const double e1 = normal(rng);
    const double e2 = normal(rng);
    const double u = cfg.u_scale * e1;
    const double v = cfg.v_scale * (corr * e1 + corr_c * e2);
    const NuisanceTruth truth = nuisance_truth(x.row(i), cfg);
    g0[i] = truth.g0;
    m0[i] = truth.m0;
    t[i] = truth.m0 + v;
    y[i] = t[i] * cfg.beta0 + truth.g0 + u;
  }
  DrawnData out{Dataset::make(std::move(y), std::move(t), std::move(x)), std::move(g0),
                std::move(m0), cfg.beta0};
  return out;
}

OracleLearners oracle_learners(const ScenarioConfig& cfg) {
  auto m_fit = [cfg](const Matrix&, const Vector&) -> PredictFn {
    return [cfg](const Matrix& x) {
      Vector out(x.rows());
      for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = nuisance_truth(x.row(i), cfg).m0;
      return out;
    };
  };
  auto ell_fit = [cfg](const Matrix&, const Vector&) -> PredictFn {
    return [cfg](const Matrix& x) {
      Vector out(x.rows());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const NuisanceTruth truth = nuisance_truth(x.row(i), cfg);
        out[i] = cfg.beta0 * truth.m0 + truth.g0;
      }
      return out;
    };
  };
  return {LearnerSpec{InjectedSpec{"oracle", m_fit}}, LearnerSpec{InjectedSpec{"oracle", ell_fit}}};
}

std::uint64_t replication_seed(std::uint64_t master_seed, int rep) {
  return mix_seed(master_seed, static_cast<std::uint64_t>(rep));
}

ReplicationResult run_replication(const McConfig& mc, int rep) {
  const std::uint64_t seed = replication_seed(mc.master_seed, rep);
  const DrawnData drawn = draw_dataset(mc.scenario, seed);
  const auto k = static_cast<std::size_t>(mc.k);
  FoldPlan plan;
  if (mc.splitter == Splitter::Spss) {
    SpConfig sp = mc.sp;
    sp.seed = mix_seed(seed, 1);
    plan = spss_kfold(drawn.data, k, sp);
  } else {
    plan = random_kfold(drawn.data.n(), k, mix_seed(seed, 1));
  }
  const DmlEstimate est = estimate_ate(drawn.data, plan, mc.learner_m, mc.learner_ell, mc.score,
                                       mc.algorithm, mc.alpha);
  return {est.beta, est.se(), est.ci.lo <= drawn.beta0 && drawn.beta0 <= est.ci.hi};
}

SimulationRow aggregate(const McConfig& mc, const std::vector<ReplicationResult>& reps,
                        double wall_time_s) {
  if (reps.size() < 2) throw Error(Errc::InvalidConfig, "need at least 2 replications");
  const auto r = static_cast<double>(reps.size());
  double sum = 0.0;
  double se_sum = 0.0;
  double covered = 0.0;
  for (const auto& rep : reps) {
    sum += rep.beta;
    se_sum += rep.se;
    covered += rep.covered ? 1.0 : 0.0;
  }
  const double mean = sum / r;
  double ss = 0.0;
  for (const auto& rep : reps) ss += (rep.beta - mean) * (rep.beta - mean);

  SimulationRow row;
  row.scenario = to_string(mc.scenario.scenario);
  row.p = mc.scenario.p;
  row.n = mc.scenario.n;
  row.method = mc.method_label.empty() ? learner_label(mc.learner_m) : mc.method_label;
  row.splitter = to_string(mc.splitter);
  row.bias = mean - mc.scenario.beta0;
  row.se = std::sqrt(ss / (r - 1.0));
  row.se_adjusted = row.se / std::sqrt(static_cast<double>(mc.scenario.n));
  row.mse = row.bias * row.bias + row.se * row.se;
  row.coverage = covered / r;
  row.mean_model_se = se_sum / r;
  row.wall_time_s = wall_time_s;
  row.reps = static_cast<int>(reps.size());
  row.master_seed = mc.master_seed;
  return row;
}

SimulationRow run_monte_carlo(const McConfig& mc) {
  if (mc.reps < 2) throw Error(Errc::InvalidConfig, "reps must be >= 2");
  validate(mc.scenario);
  validate_spec(mc.learner_m);
  validate_spec(mc.learner_ell);
  const auto start = std::chrono::steady_clock::now();
  std::vector<ReplicationResult> results(static_cast<std::size_t>(mc.reps));
  parallel_for(results.size(), mc.threads, [&](std::size_t r) {
    const int rep = static_cast<int>(r);
    try {
      results[r] = run_replication(mc, rep);
    } catch (const Error& e) {
      throw Error(Errc::ReplicationFailed,
                  "replication " + std::to_string(rep) + " (seed " +
                      std::to_string(replication_seed(mc.master_seed, rep)) + ") failed: " + e.what());
    }
  });
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return aggregate(mc, results, elapsed);
}

}  // namespace dmlspss
