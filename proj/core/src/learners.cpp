#include "dmlspss/learners.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmlspss/dataset.hpp"
#include "dmlspss/splitting.hpp"

namespace dmlspss {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void bad_spec(const std::string& what) { throw Error(Errc::InvalidSpec, what); }

void check_training_data(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw Error(Errc::DimensionMismatch, "x and y row counts differ");
  if (x.rows() < 1) throw Error(Errc::DimensionMismatch, "cannot fit on zero rows");
  require_finite(x, "training inputs");
  require_finite(y, "training targets");
}

// Centered columns and the means removed.
struct Centered {
  Eigen::MatrixXd x;  // column-major for column sweeps
  Vector y;
  Vector x_mean;
  double y_mean = 0.0;
};

Centered center(const Matrix& x, const Vector& y) {
  Centered c;
  c.x_mean = x.colwise().mean().transpose();
  c.y_mean = y.mean();
  c.x = x.rowwise() - c.x_mean.transpose();
  c.y = y.array() - c.y_mean;
  return c;
}

FittedModel fit_ridge(const LearnerSpec& spec, const RidgeSpec& ridge, const Matrix& x,
                      const Vector& y) {
  const Centered c = center(x, y);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  Vector coef;
  if (ridge.lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(c.x);
    if (qr.rank() < p) {
      throw Error(Errc::SingularSystem, "ridge with lambda = 0 on a rank-deficient design (rank " +
                                            std::to_string(qr.rank()) + " < p = " +
                                            std::to_string(p) + ")");
    }
    const Eigen::MatrixXd gram = c.x.transpose() * c.x;
    coef = gram.ldlt().solve(c.x.transpose() * c.y);
  } else if (p <= n) {
    Eigen::MatrixXd gram = c.x.transpose() * c.x;
    gram.diagonal().array() += ridge.lambda;
    coef = gram.llt().solve(c.x.transpose() * c.y);
  } else {
    // Dual form: b = X~' (X~ X~' + lambda I)^-1 y~.
    Eigen::MatrixXd outer = c.x * c.x.transpose();
    outer.diagonal().array() += ridge.lambda;
    coef = c.x.transpose() * outer.llt().solve(c.y);
  }
  LinearParams params;
  params.intercept = c.y_mean - c.x_mean.dot(coef);
  params.coef = std::move(coef);
  return FittedModel(spec, std::move(params), static_cast<std::size_t>(n),
                     static_cast<std::size_t>(p));
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

FittedModel fit_lasso(const LearnerSpec& spec, const LassoSpec& lasso, const Matrix& x,
                      const Vector& y) {
  const Centered c = center(x, y);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const auto nd = static_cast<double>(n);
  const Vector col_sq = c.x.colwise().squaredNorm().transpose() / nd;

  Vector coef = Vector::Zero(p);
  Vector resid = c.y;
  LinearParams params;
  params.converged = false;
  for (int it = 0; it < lasso.max_iter; ++it) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq[j] <= 0.0) continue;
      const double old = coef[j];
      const double rho = c.x.col(j).dot(resid) / nd + col_sq[j] * old;
      const double next = soft_threshold(rho, lasso.lambda) / col_sq[j];
      if (next != old) {
        resid -= (next - old) * c.x.col(j);
        coef[j] = next;
        max_change = std::max(max_change, std::abs(next - old) * std::sqrt(col_sq[j]));
      }
    }
    params.iterations = it + 1;
    if (max_change < lasso.tol) {
      params.converged = true;
      break;
    }
  }
  params.intercept = c.y_mean - c.x_mean.dot(coef);
  params.coef = std::move(coef);
  const bool converged = params.converged;
  auto model = std::make_shared<const FittedModel>(spec, std::move(params),
                                                   static_cast<std::size_t>(n),
                                                   static_cast<std::size_t>(p));
  if (!converged) {
    throw NonConvergenceError("lasso coordinate descent did not converge in " +
                                  std::to_string(lasso.max_iter) + " sweeps",
                              model);
  }
  return *model;
}

Matrix rbf_kernel(const Matrix& a, const Matrix& b, double gamma) {
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
    }
  }
  return k;
}

FittedModel fit_kernel(const LearnerSpec& spec, const KernelMachineSpec& km, const Matrix& x,
                       const Vector& y) {
  Matrix k = rbf_kernel(x, x, km.bandwidth);
  k.diagonal().array() += km.lambda;
  KernelParams params;
  params.train_x = x;
  params.bandwidth = km.bandwidth;
  if (km.loss == KernelLoss::Squared) {
    const Eigen::MatrixXd kc = k;
    params.dual = kc.llt().solve(y);
  } else {
    // Coordinate descent on 1/2 a'Ka - y'a + eps |a|_1 subject to |a_i| <= C.
    const Eigen::Index n = x.rows();
    Vector alpha = Vector::Zero(n);
    Vector k_alpha = Vector::Zero(n);
    params.converged = false;
    for (int it = 0; it < km.max_iter; ++it) {
      double max_change = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double rest = k_alpha[i] - k(i, i) * alpha[i];
        const double next =
            std::clamp(soft_threshold(y[i] - rest, km.epsilon) / k(i, i), -km.c, km.c);
        const double delta = next - alpha[i];
        if (delta != 0.0) {
          k_alpha += delta * k.col(i);
          alpha[i] = next;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      if (max_change < 1e-10) {
        params.converged = true;
        break;
      }
    }
    params.dual = std::move(alpha);
  }
  return FittedModel(spec, std::move(params), static_cast<std::size_t>(x.rows()),
                     static_cast<std::size_t>(x.cols()));
}

}  // namespace

void validate_spec(const LearnerSpec& spec) {
  std::visit(
      Overloaded{
          [](const RidgeSpec& s) {
            if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda)) bad_spec("ridge lambda must be >= 0");
          },
          [](const LassoSpec& s) {
            if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda)) bad_spec("lasso lambda must be >= 0");
            if (s.max_iter < 1) bad_spec("lasso max_iter must be positive");
            if (!(s.tol > 0.0)) bad_spec("lasso tol must be positive");
          },
          [](const KernelMachineSpec& s) {
            if (!(s.bandwidth > 0.0)) bad_spec("kernel bandwidth must be positive");
            if (!(s.lambda > 0.0)) bad_spec("kernel lambda must be positive");
            if (s.loss == KernelLoss::EpsilonInsensitive) {
              if (!(s.epsilon >= 0.0)) bad_spec("kernel epsilon must be >= 0");
              if (!(s.c > 0.0)) bad_spec("kernel C must be positive");
              if (s.max_iter < 1) bad_spec("kernel max_iter must be positive");
            }
          },
          [](const MlpSpec& s) {
            for (int h : s.hidden) {
              if (h < 1) bad_spec("mlp hidden widths must be positive");
            }
            if (!(s.step_size > 0.0)) bad_spec("mlp step_size must be positive");
            if (s.epochs < 1) bad_spec("mlp epochs must be positive");
            if (s.batch < 1) bad_spec("mlp batch must be positive");
            if (!(s.l2 >= 0.0)) bad_spec("mlp l2 must be >= 0");
          },
          [](const SuperLearnerSpec& s) {
            if (s.candidates.empty()) bad_spec("super learner needs at least one candidate");
            if (s.v_blocks < 2) bad_spec("super learner v_blocks must be >= 2");
            for (const auto& c : s.candidates) {
              if (std::holds_alternative<SuperLearnerSpec>(c.kind)) {
                bad_spec("super learner candidates cannot be super learners");
              }
              validate_spec(c);
            }
          },
          [](const ConstantSpec& s) {
            if (!std::isfinite(s.value)) bad_spec("constant value must be finite");
          },
          [](const InjectedSpec& s) {
            if (!s.fit) bad_spec("injected learner has no fit function");
          },
      },
      spec.kind);
}

std::string learner_label(const LearnerSpec& spec) {
  return std::visit(Overloaded{
                        [](const RidgeSpec&) -> std::string { return "ridge"; },
                        [](const LassoSpec&) -> std::string { return "lasso"; },
                        [](const KernelMachineSpec&) -> std::string { return "kernel_machine"; },
                        [](const MlpSpec&) -> std::string { return "mlp"; },
                        [](const SuperLearnerSpec& s) -> std::string {
                          std::string out = "super_learner[";
                          for (std::size_t i = 0; i < s.candidates.size(); ++i) {
                            if (i) out += "+";
                            out += learner_label(s.candidates[i]);
                          }
                          return out + "]";
                        },
                        [](const ConstantSpec&) -> std::string { return "constant"; },
                        [](const InjectedSpec& s) -> std::string { return s.name; },
                    },
                    spec.kind);
}

FittedModel::FittedModel(LearnerSpec spec, ModelParams params, std::size_t n_train, std::size_t p)
    : spec_(std::move(spec)), params_(std::move(params)), n_train_(n_train), p_(p) {}

Vector FittedModel::predict(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != p_) {
    throw Error(Errc::DimensionMismatch, "model was trained on " + std::to_string(p_) +
                                             " covariates, got " + std::to_string(x.cols()));
  }
  return std::visit(
      Overloaded{
          [&x](const LinearParams& m) -> Vector {
            return (x * m.coef).array() + m.intercept;
          },
          [&x](const KernelParams& m) -> Vector {
            return rbf_kernel(x, m.train_x, m.bandwidth) * m.dual;
          },
          [&x](const MlpParams& m) -> Vector {
            Matrix z = x;
            for (Eigen::Index j = 0; j < z.cols(); ++j) {
              z.col(j) = (z.col(j).array() - m.x_mean[j]) / m.x_scale[j];
            }
            return mlp::forward(m, z).array() * m.y_scale + m.y_mean;
          },
          [&x](const EnsembleParams& m) -> Vector {
            Vector out = Vector::Zero(x.rows());
            for (std::size_t k = 0; k < m.members.size(); ++k) {
              if (m.members[k] && m.report.weights[k] > 0.0) {
                out += m.report.weights[k] * m.members[k]->predict(x);
              }
            }
            return out;
          },
          [&x](const ConstantParams& m) -> Vector {
            return Vector::Constant(x.rows(), m.value);
          },
          [&x](const InjectedParams& m) -> Vector {
            Vector out = m.predict(x);
            if (out.size() != x.rows()) {
              throw Error(Errc::DimensionMismatch, "injected predictor returned wrong length");
            }
            return out;
          },
      },
      params_);
}

FittedModel fit(const LearnerSpec& spec, const Matrix& x, const Vector& y) {
  validate_spec(spec);
  check_training_data(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  return std::visit(
      Overloaded{
          [&](const RidgeSpec& s) { return fit_ridge(spec, s, x, y); },
          [&](const LassoSpec& s) { return fit_lasso(spec, s, x, y); },
          [&](const KernelMachineSpec& s) { return fit_kernel(spec, s, x, y); },
          [&](const MlpSpec& s) { return fit_mlp(spec, s, x, y); },
          [&](const SuperLearnerSpec& s) { return fit_super_learner(spec, s, x, y); },
          [&](const ConstantSpec& s) { return FittedModel(spec, ConstantParams{s.value}, n, p); },
          [&](const InjectedSpec& s) { return FittedModel(spec, InjectedParams{s.fit(x, y)}, n, p); },
      },
      spec.kind);
}

Vector predict(const FittedModel& model, const Matrix& x) { return model.predict(x); }

double cv_risk(const LearnerSpec& spec, const Matrix& x, const Vector& y, int v_blocks,
               std::uint64_t seed) {
  if (v_blocks < 2 || x.rows() < v_blocks) {
    throw Error(Errc::InvalidConfig, "cv_risk needs 2 <= v_blocks <= n");
  }
  const FoldPlan plan =
      random_kfold(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(v_blocks), seed);
  double total = 0.0;
  for (std::size_t b = 0; b < plan.k(); ++b) {
    const IndexList train = plan.complement(b);
    const FittedModel model = fit(spec, take_rows(x, train), take(y, train));
    total += generalization_error(model, take_rows(x, plan.folds[b]), take(y, plan.folds[b]));
  }
  return total / static_cast<double>(plan.k());
}

double generalization_error(const FittedModel& model, const Matrix& x_test, const Vector& y_test) {
  if (x_test.rows() != y_test.size()) {
    throw Error(Errc::DimensionMismatch, "x_test and y_test row counts differ");
  }
  if (y_test.size() < 1) throw Error(Errc::DimensionMismatch, "empty test set");
  return (model.predict(x_test) - y_test).squaredNorm() / static_cast<double>(y_test.size());
}

Vector project_to_simplex(const Vector& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0);
}

}  // namespace dmlspss
