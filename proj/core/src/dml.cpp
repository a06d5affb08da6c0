#include "dmlspss/dml.hpp"

#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace dmlspss {
namespace {

struct FoldMeans {
  double psi_a = 0.0;
  double psi_b = 0.0;
  double psi_sq = 0.0;
};

void check_inputs(const Dataset& d, const FoldPlan& plan, const std::vector<NuisanceFit>& nuis) {
  if (plan.k() < 1) throw Error(Errc::InvalidConfig, "fold plan is empty");
  validate_partition(plan, d.n());
  if (nuis.size() != plan.k()) {
    throw Error(Errc::DimensionMismatch, "need one nuisance fit per fold");
  }
}

FoldMeans fold_means(const Dataset& d, const IndexList& fold, const NuisanceFit& nuis,
                     ScoreKind kind, double beta) {
  const ScoreComponents s = score_components(take(d.y, fold), take(d.t, fold), nuis, kind, beta);
  const auto n = static_cast<double>(fold.size());
  return {s.psi_a.sum() / n, s.psi_b.sum() / n, s.psi.squaredNorm() / n};
}

std::vector<FoldMeans> all_fold_means(const Dataset& d, const FoldPlan& plan,
                                      const std::vector<NuisanceFit>& nuis, ScoreKind kind,
                                      double beta) {
  std::vector<FoldMeans> out;
  out.reserve(plan.k());
  for (std::size_t k = 0; k < plan.k(); ++k) {
    out.push_back(fold_means(d, plan.folds[k], nuis[k], kind, beta));
  }
  return out;
}

double pooled_beta(const std::vector<FoldMeans>& means) {
  double a = 0.0;
  double b = 0.0;
  for (const auto& m : means) {
    a += m.psi_a;
    b += m.psi_b;
  }
  if (std::abs(a / static_cast<double>(means.size())) <= kDegenerateMoment) {
    throw Error(Errc::DegenerateAggregate,
                "pooled mean of psi_a is ~0: no treatment variation left after residualization");
  }
  return -b / a;
}

DmlEstimate finish(double beta, const Dataset& d, const FoldPlan& plan,
                   const std::vector<NuisanceFit>& nuis, ScoreKind kind, DmlAlgorithm algorithm,
                   double alpha) {
  DmlEstimate est;
  est.beta = beta;
  est.n_total = d.n();
  est.k = plan.k();
  est.algorithm = algorithm;
  est.score = kind;
  const VarianceEstimate var = variance_estimate(beta, d, plan, nuis, kind);
  est.sigma_hat = std::sqrt(var.sigma2);
  est.j_hat = var.j_hat;
  est.ci = confidence_interval(beta, var.sigma2, est.n_total, alpha);
  return est;
}

}  // namespace

const char* to_string(ScoreKind kind) noexcept {
  return kind == ScoreKind::PartiallingOut ? "partialling_out" : "iv_type";
}

const char* to_string(DmlAlgorithm algorithm) noexcept {
  return algorithm == DmlAlgorithm::DML1 ? "dml1" : "dml2";
}

double DmlEstimate::se() const { return sigma_hat / std::sqrt(static_cast<double>(n_total)); }

ScoreComponents score_components(const Vector& y, const Vector& t, const NuisanceFit& nuis,
                                 ScoreKind kind, double beta) {
  const Eigen::Index n = y.size();
  const Vector& other = kind == ScoreKind::PartiallingOut ? nuis.ell_hat : nuis.g_hat;
  if (t.size() != n || nuis.m_hat.size() != n || other.size() != n) {
    throw Error(Errc::DimensionMismatch, "score inputs have different lengths");
  }
  const Vector t_res = t - nuis.m_hat;
  ScoreComponents s;
  if (kind == ScoreKind::PartiallingOut) {
    s.psi_a = -t_res.cwiseProduct(t_res);
  } else {
    s.psi_a = -t.cwiseProduct(t_res);
  }
  s.psi_b = (y - other).cwiseProduct(t_res);
  s.psi = s.psi_a * beta + s.psi_b;
  return s;
}

std::vector<NuisanceFit> fit_nuisances_crossfit(const Dataset& d, const FoldPlan& plan,
                                                const LearnerSpec& spec_m,
                                                const LearnerSpec& spec_ell, ScoreKind kind) {
  validate_partition(plan, d.n());
  std::vector<NuisanceFit> out;
  out.reserve(plan.k());
  for (std::size_t k = 0; k < plan.k(); ++k) {
    const IndexList train = plan.complement(k);
    if (train.size() < 2) {
      throw Error(Errc::FoldTooSmall, "fold " + std::to_string(k) + " leaves " +
                                          std::to_string(train.size()) + " training rows");
    }
    const Matrix x_train = take_rows(d.x, train);
    const Matrix x_eval = take_rows(d.x, plan.folds[k]);
    NuisanceFit fit_k;
    fit_k.fold_id = k;
    fit_k.m_hat = fit(spec_m, x_train, take(d.t, train)).predict(x_eval);
    fit_k.ell_hat = fit(spec_ell, x_train, take(d.y, train)).predict(x_eval);
    require_finite(fit_k.m_hat, "treatment nuisance predictions");
    require_finite(fit_k.ell_hat, "outcome nuisance predictions");
    out.push_back(std::move(fit_k));
  }
  if (kind == ScoreKind::IvType) {
    const double prelim = pooled_beta(all_fold_means(d, plan, out, ScoreKind::PartiallingOut, 0.0));
    for (auto& f : out) f.g_hat = f.ell_hat - prelim * f.m_hat;
  }
  return out;
}

DmlEstimate dml1_estimate(const Dataset& d, const FoldPlan& plan,
                          const std::vector<NuisanceFit>& nuis, ScoreKind kind, double alpha) {
  check_inputs(d, plan, nuis);
  const auto means = all_fold_means(d, plan, nuis, kind, 0.0);
  std::vector<double> per_fold;
  double sum = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (std::abs(means[k].psi_a) <= kDegenerateMoment) {
      throw Error(Errc::DegenerateFold, "fold " + std::to_string(k) +
                                            " has mean psi_a ~0 (no residual treatment variation)");
    }
    per_fold.push_back(-means[k].psi_b / means[k].psi_a);
    sum += per_fold.back();
  }
  DmlEstimate est = finish(sum / static_cast<double>(per_fold.size()), d, plan, nuis, kind,
                           DmlAlgorithm::DML1, alpha);
  est.per_fold_beta = std::move(per_fold);
  return est;
}

DmlEstimate dml2_estimate(const Dataset& d, const FoldPlan& plan,
                          const std::vector<NuisanceFit>& nuis, ScoreKind kind, double alpha) {
  check_inputs(d, plan, nuis);
  const double beta = pooled_beta(all_fold_means(d, plan, nuis, kind, 0.0));
  return finish(beta, d, plan, nuis, kind, DmlAlgorithm::DML2, alpha);
}

VarianceEstimate variance_estimate(double beta, const Dataset& d, const FoldPlan& plan,
                                   const std::vector<NuisanceFit>& nuis, ScoreKind kind) {
  check_inputs(d, plan, nuis);
  const auto means = all_fold_means(d, plan, nuis, kind, beta);
  double j = 0.0;
  double psi_sq = 0.0;
  for (const auto& m : means) {
    j += m.psi_a;
    psi_sq += m.psi_sq;
  }
  const auto k = static_cast<double>(means.size());
  j /= k;
  psi_sq /= k;
  if (std::abs(j) <= kDegenerateMoment) {
    throw Error(Errc::DegenerateJacobian, "Jacobian estimate is ~0");
  }
  return {psi_sq / (j * j), j};
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

ConfidenceInterval confidence_interval(double beta, double sigma2, std::size_t n_total,
                                       double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidAlpha, "alpha must lie in (0, 1)");
  if (!(sigma2 >= 0.0)) throw Error(Errc::InvalidConfig, "variance must be >= 0");
  if (n_total < 1) throw Error(Errc::InvalidConfig, "n_total must be >= 1");
  const double half =
      normal_quantile(1.0 - alpha / 2.0) * std::sqrt(sigma2 / static_cast<double>(n_total));
  return {beta - half, beta + half, alpha};
}

double orthogonality_diagnostic(const Dataset& d, const FoldPlan& plan,
                                const std::vector<NuisanceFit>& nuis, ScoreKind kind, double eps,
                                const std::optional<Vector>& direction) {
  if (!(eps > 0.0 && eps <= 0.1)) throw Error(Errc::InvalidConfig, "eps must lie in (0, 0.1]");
  check_inputs(d, plan, nuis);
  if (direction && direction->size() != static_cast<Eigen::Index>(d.n())) {
    throw Error(Errc::DimensionMismatch, "direction must have one entry per row");
  }
  const double beta = pooled_beta(all_fold_means(d, plan, nuis, kind, 0.0));

  auto mean_score = [&](double r) {
    double total = 0.0;
    for (std::size_t k = 0; k < plan.k(); ++k) {
      NuisanceFit shifted = nuis[k];
      const Vector dir = direction ? take(*direction, plan.folds[k])
                                   : Vector::Ones(static_cast<Eigen::Index>(plan.folds[k].size()));
      shifted.m_hat += r * dir;
      const ScoreComponents s =
          score_components(take(d.y, plan.folds[k]), take(d.t, plan.folds[k]), shifted, kind, beta);
      total += s.psi.mean();
    }
    return total / static_cast<double>(plan.k());
  };
  return std::abs((mean_score(eps) - mean_score(-eps)) / (2.0 * eps));
}

DmlEstimate estimate_ate(const Dataset& d, const FoldPlan& plan, const LearnerSpec& spec_m,
                         const LearnerSpec& spec_ell, ScoreKind kind, DmlAlgorithm algorithm,
                         double alpha) {
  const auto nuis = fit_nuisances_crossfit(d, plan, spec_m, spec_ell, kind);
  return algorithm == DmlAlgorithm::DML1 ? dml1_estimate(d, plan, nuis, kind, alpha)
                                         : dml2_estimate(d, plan, nuis, kind, alpha);
}

}  // namespace dmlspss
