#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "dmlspss/error.hpp"
#include "dmlspss/types.hpp"

namespace dmlspss {

// ---------------------------------------------------------------------------
// Learner specifications
// ---------------------------------------------------------------------------

/// Centered least squares with an unpenalized intercept:
///   minimize |y~ - X~ b|^2 + lambda |b|^2.
struct RidgeSpec {
  double lambda = 0.0;
};

/// Coordinate descent on (1/(2n)) |y - X b - b0|^2 + lambda |b|_1.
struct LassoSpec {
  double lambda = 0.0;
  int max_iter = 1000;
  double tol = 1e-7;
};

enum class KernelLoss { Squared, EpsilonInsensitive };

/// RBF kernel machine k(a, b) = exp(-bandwidth |a - b|^2) without intercept.
/// Squared loss solves (K + lambda I) alpha = y. EpsilonInsensitive solves the
/// box-constrained SVR dual on K + lambda I.
struct KernelMachineSpec {
  double bandwidth = 1.0;
  double lambda = 1e-3;
  KernelLoss loss = KernelLoss::Squared;
  double epsilon = 0.1;
  double c = 1.0;
  int max_iter = 1000;
};

enum class Activation { ReLU, Tanh };

/// Fully connected network with squared loss, trained by mini-batch Adam.
struct MlpSpec {
  std::vector<int> hidden{32, 32};
  Activation activation = Activation::ReLU;
  double step_size = 1e-3;
  int epochs = 200;
  int batch = 32;
  std::uint64_t seed = 0;
  double l2 = 0.0;
  bool standardize = true;  // z-score inputs and target internally
};

/// Predicts a fixed value regardless of the data.
struct ConstantSpec {
  double value = 0.0;
};

using PredictFn = std::function<Vector(const Matrix&)>;

/// Caller-supplied learner, e.g. an oracle returning the true regression
/// function. `fit` receives the training data and returns a predictor.
struct InjectedSpec {
  std::string name = "injected";
  std::function<PredictFn(const Matrix&, const Vector&)> fit;
};

enum class EnsembleMode { Selector, ConvexWeights };
enum class BlockScheme { Random, SupportPoints };

struct LearnerSpec;

struct SuperLearnerSpec {
  std::vector<LearnerSpec> candidates;
  int v_blocks = 5;
  EnsembleMode mode = EnsembleMode::Selector;
  std::uint64_t seed = 0;
  BlockScheme blocks = BlockScheme::Random;
};

struct LearnerSpec {
  std::variant<RidgeSpec, LassoSpec, KernelMachineSpec, MlpSpec, SuperLearnerSpec, ConstantSpec,
               InjectedSpec>
      kind;
};

/// Throws InvalidSpec when a hyperparameter is out of range.
void validate_spec(const LearnerSpec& spec);

/// Short label such as "ridge" or "super_learner[ridge+lasso+mlp]".
std::string learner_label(const LearnerSpec& spec);

// ---------------------------------------------------------------------------
// Fitted models
// ---------------------------------------------------------------------------

struct LinearParams {
  Vector coef;
  double intercept = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct KernelParams {
  Matrix train_x;
  Vector dual;
  double bandwidth = 1.0;
  bool converged = true;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
};

struct MlpParams {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::ReLU;
  Vector x_mean;
  Vector x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
  std::vector<double> loss_trace;  // epoch mean of mini-batch losses
};

struct ConstantParams {
  double value = 0.0;
};

struct InjectedParams {
  PredictFn predict;
};

struct CvRiskReport {
  std::vector<double> risks;  // cross-validated MSE per candidate, +inf if it failed
  std::size_t chosen = 0;
  std::vector<double> weights;
};

class FittedModel;

struct EnsembleParams {
  std::vector<std::shared_ptr<const FittedModel>> members;  // null where weight is 0
  CvRiskReport report;
};

using ModelParams = std::variant<LinearParams, KernelParams, MlpParams, EnsembleParams,
                                 ConstantParams, InjectedParams>;

/// Immutable fitted predictor.
class FittedModel {
 public:
  FittedModel(LearnerSpec spec, ModelParams params, std::size_t n_train, std::size_t p);

  const LearnerSpec& spec() const { return spec_; }
  const ModelParams& params() const { return params_; }
  std::size_t n_train() const { return n_train_; }
  std::size_t p() const { return p_; }

  Vector predict(const Matrix& x) const;

 private:
  LearnerSpec spec_;
  ModelParams params_;
  std::size_t n_train_;
  std::size_t p_;
};

/// Thrown by Lasso and Mlp when the solver does not settle; carries the
/// partially trained model.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::shared_ptr<const FittedModel> partial)
      : Error(Errc::NonConvergence, what), partial_(std::move(partial)) {}
  const std::shared_ptr<const FittedModel>& partial() const { return partial_; }

 private:
  std::shared_ptr<const FittedModel> partial_;
};

FittedModel fit(const LearnerSpec& spec, const Matrix& x, const Vector& y);
Vector predict(const FittedModel& model, const Matrix& x);

/// Mean over `v_blocks` seeded random blocks of the validation MSE, each block
/// predicted by a model trained on the other blocks.
double cv_risk(const LearnerSpec& spec, const Matrix& x, const Vector& y, int v_blocks,
               std::uint64_t seed);

/// Mean squared prediction error on held-out data.
double generalization_error(const FittedModel& model, const Matrix& x_test, const Vector& y_test);

// Entry points used by fit(); exposed for testing.
FittedModel fit_mlp(const LearnerSpec& spec, const MlpSpec& mlp, const Matrix& x, const Vector& y);
FittedModel fit_super_learner(const LearnerSpec& spec, const SuperLearnerSpec& sl, const Matrix& x,
                              const Vector& y);

/// Euclidean projection onto the probability simplex.
Vector project_to_simplex(const Vector& v);

namespace mlp {

/// Layer widths input -> hidden... -> 1, initialised from `seed`.
MlpParams init(std::size_t inputs, const std::vector<int>& hidden, Activation activation,
               std::uint64_t seed);

/// Network output on raw inputs (no standardization applied).
Vector forward(const MlpParams& net, const Matrix& x);

/// (1 / (2 b)) sum (f(x) - y)^2 + (l2_weight / 2) sum |W|^2 over a batch of b rows.
double loss(const MlpParams& net, const Matrix& x, const Vector& y, double l2_weight);

struct Gradient {
  std::vector<DenseLayer> layers;
  double loss = 0.0;
};

/// Backpropagated gradient of `loss` with respect to every weight and bias.
Gradient loss_gradient(const MlpParams& net, const Matrix& x, const Vector& y, double l2_weight);

}  // namespace mlp

}  // namespace dmlspss
