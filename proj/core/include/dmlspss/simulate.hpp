#pragma once

#include <string>
#include <vector>

#include "dmlspss/dml.hpp"
#include "dmlspss/support_points.hpp"

namespace dmlspss {

enum class Scenario { S1, S2 };

const char* to_string(Scenario s) noexcept;

/// Partially linear DGP
///   Y = T beta0 + g0(X) + U,   T = m0(X) + V,   X ~ N(0, Sigma), Sigma_kj = rho^|j-k|
///   g0(x) = logistic(x[logistic_coord]) + x[linear_coord] / 4
///   m0(x) = x[linear_coord] + logistic(x[logistic_coord]) / 4
/// S1: rho = 0.7, U and V independent N(0, 1).
/// S2: rho = 0.5, (U, V) standard bivariate normal with correlation 0.3.
struct ScenarioConfig {
  Scenario scenario = Scenario::S1;
  int p = 20;
  int n = 1000;
  double beta0 = 0.5;
  int linear_coord = 1;    // 1-based
  int logistic_coord = 3;  // 1-based, clamped to p
  // Test hooks scaling the error draws; 1 in normal use.
  double u_scale = 1.0;
  double v_scale = 1.0;

  double rho() const;
  double uv_corr() const;
  int logistic_index() const;  // 0-based after clamping
  int linear_index() const;    // 0-based
};

void validate(const ScenarioConfig& cfg);

/// Sigma_kj = rho^|j-k|.
Matrix ar1_covariance(double rho, int p);

struct NuisanceTruth {
  double g0 = 0.0;
  double m0 = 0.0;
};

NuisanceTruth nuisance_truth(const Eigen::Ref<const Eigen::RowVectorXd>& x_row,
                             const ScenarioConfig& cfg);

struct DrawnData {
  Dataset data;
  Vector g0;
  Vector m0;
  double beta0 = 0.5;
};

DrawnData draw_dataset(const ScenarioConfig& cfg, std::uint64_t seed);

/// Learners returning the true m0(x) and E[Y|X] = beta0 m0(x) + g0(x).
struct OracleLearners {
  LearnerSpec m;
  LearnerSpec ell;
};
OracleLearners oracle_learners(const ScenarioConfig& cfg);

enum class Splitter { Spss, RandomKFold };
const char* to_string(Splitter s) noexcept;

struct McConfig {
  ScenarioConfig scenario;
  int reps = 500;
  int k = 2;
  Splitter splitter = Splitter::Spss;
  LearnerSpec learner_m{RidgeSpec{1.0}};
  LearnerSpec learner_ell{RidgeSpec{1.0}};
  ScoreKind score = ScoreKind::PartiallingOut;
  DmlAlgorithm algorithm = DmlAlgorithm::DML2;
  std::uint64_t master_seed = 0;
  double alpha = 0.05;
  SpConfig sp;  // n_points and seed are set per replication
  int threads = 1;
  std::string method_label;  // defaults to the learner label
};

struct ReplicationResult {
  double beta = 0.0;
  double se = 0.0;
  bool covered = false;
};

struct SimulationRow {
  std::string scenario;
  int p = 0;
  int n = 0;
  std::string method;
  std::string splitter;
  double bias = 0.0;
  double se = 0.0;
  double se_adjusted = 0.0;
  double mse = 0.0;
  double coverage = 0.0;
  double mean_model_se = 0.0;
  double wall_time_s = 0.0;
  int reps = 0;
  std::uint64_t master_seed = 0;
};

/// Seed of replication r: a mix of (master_seed, r), distinct across r.
std::uint64_t replication_seed(std::uint64_t master_seed, int rep);

/// One replication: draw, split, cross-fit, estimate.
ReplicationResult run_replication(const McConfig& mc, int rep);

/// bias = mean(beta) - beta0, se = sample sd of beta, se_adjusted = se / sqrt(n),
/// mse = bias^2 + se^2, coverage = share of intervals containing beta0.
SimulationRow aggregate(const McConfig& mc, const std::vector<ReplicationResult>& reps,
                        double wall_time_s);

/// Runs all replications on `mc.threads` workers; results do not depend on
/// the thread count. A failing replication aborts with ReplicationFailed
/// naming its index and seed.
SimulationRow run_monte_carlo(const McConfig& mc);

enum class ReportFormat { Csv, Json };

/// Column order: scenario,p,n,method,splitter,bias,se,se_adjusted,mse,coverage,
/// mean_model_se,wall_time_s,reps,master_seed.
std::string emit_report(const std::vector<SimulationRow>& rows, ReportFormat format);

/// Parses the JSON form of emit_report back into rows.
std::vector<SimulationRow> parse_report_json(const std::string& text);

}  // namespace dmlspss
