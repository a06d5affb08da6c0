#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dmlspss/dataset.hpp"
#include "dmlspss/learners.hpp"
#include "dmlspss/splitting.hpp"

namespace dmlspss {

/// Both scores are linear in beta: psi = psi_a * beta + psi_b.
///   PartiallingOut: psi_a = -(t - m)^2,      psi_b = (y - l)(t - m)
///   IvType:         psi_a = -t (t - m),      psi_b = (y - g)(t - m)
enum class ScoreKind { PartiallingOut, IvType };
enum class DmlAlgorithm { DML1, DML2 };

const char* to_string(ScoreKind kind) noexcept;
const char* to_string(DmlAlgorithm algorithm) noexcept;

/// Out-of-fold nuisance predictions for one evaluation fold.
struct NuisanceFit {
  Vector m_hat;    // E[T | X]
  Vector ell_hat;  // E[Y | X]
  Vector g_hat;    // g0(X); filled for IvType
  std::size_t fold_id = 0;
};

struct ScoreComponents {
  Vector psi_a;
  Vector psi_b;
  Vector psi;
};

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.05;
};

struct VarianceEstimate {
  double sigma2 = 0.0;
  double j_hat = 0.0;
};

struct DmlEstimate {
  double beta = 0.0;
  double sigma_hat = 0.0;
  std::size_t n_total = 0;
  std::size_t k = 0;
  DmlAlgorithm algorithm = DmlAlgorithm::DML2;
  ScoreKind score = ScoreKind::PartiallingOut;
  std::vector<double> per_fold_beta;  // DML1 only
  ConfidenceInterval ci;
  double j_hat = 0.0;

  double se() const;  // sigma_hat / sqrt(n_total)
};

inline constexpr double kDegenerateMoment = 1e-12;

ScoreComponents score_components(const Vector& y, const Vector& t, const NuisanceFit& nuis,
                                 ScoreKind kind, double beta);

/// Fits E[T|X] and E[Y|X] on each fold's complement and predicts on the fold.
/// IvType additionally forms g = l - beta_prelim * m, where beta_prelim is the
/// partialling-out DML2 estimate on the same folds.
std::vector<NuisanceFit> fit_nuisances_crossfit(const Dataset& d, const FoldPlan& plan,
                                                const LearnerSpec& spec_m,
                                                const LearnerSpec& spec_ell, ScoreKind kind);

DmlEstimate dml1_estimate(const Dataset& d, const FoldPlan& plan,
                          const std::vector<NuisanceFit>& nuis, ScoreKind kind,
                          double alpha = 0.05);
DmlEstimate dml2_estimate(const Dataset& d, const FoldPlan& plan,
                          const std::vector<NuisanceFit>& nuis, ScoreKind kind,
                          double alpha = 0.05);

/// sigma^2 = (1/K) sum_k mean_k(psi^2) / J^2 with J = (1/K) sum_k mean_k(psi_a),
/// scores evaluated at `beta`.
VarianceEstimate variance_estimate(double beta, const Dataset& d, const FoldPlan& plan,
                                   const std::vector<NuisanceFit>& nuis, ScoreKind kind);

ConfidenceInterval confidence_interval(double beta, double sigma2, std::size_t n_total,
                                       double alpha);

/// Standard normal quantile.
double normal_quantile(double p);

/// |d/dr (1/K) sum_k mean_k psi(beta_hat; m + r * direction)| at r = 0 by
/// central differences, other nuisances held fixed and beta_hat the DML2
/// estimate. `direction` defaults to the constant 1 and is indexed by row.
double orthogonality_diagnostic(const Dataset& d, const FoldPlan& plan,
                                const std::vector<NuisanceFit>& nuis, ScoreKind kind, double eps,
                                const std::optional<Vector>& direction = std::nullopt);

/// Cross-fit nuisances and run the chosen algorithm.
DmlEstimate estimate_ate(const Dataset& d, const FoldPlan& plan, const LearnerSpec& spec_m,
                         const LearnerSpec& spec_ell, ScoreKind kind, DmlAlgorithm algorithm,
                         double alpha = 0.05);

}  // namespace dmlspss
