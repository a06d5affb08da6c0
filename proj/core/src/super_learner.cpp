#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "dmlspss/dataset.hpp"
#include "dmlspss/learners.hpp"
#include "dmlspss/splitting.hpp"

namespace dmlspss {
namespace {

constexpr double kWeightTol = 1e-8;
constexpr int kMaxWeightIter = 100000;

FoldPlan make_blocks(const SuperLearnerSpec& sl, const Matrix& x, const Vector& y) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto v = static_cast<std::size_t>(sl.v_blocks);
  if (sl.blocks == BlockScheme::SupportPoints) {
    Matrix cloud(x.rows(), x.cols() + 1);
    cloud << x, y;
    SpConfig cfg;
    cfg.seed = sl.seed;
    return sp_kfold_cloud(standardize(cloud).values, v, cfg);
  }
  return random_kfold(n, v, sl.seed);
}

double stacked_loss(const Matrix& z, const Vector& y, const Vector& w) {
  return 0.5 * (z * w - y).squaredNorm();
}

// Simplex-constrained least squares of y on the columns of z by projected
// gradient with step 1/L.
Vector convex_weights(const Matrix& z, const Vector& y) {
  const Eigen::Index m = z.cols();
  const Eigen::MatrixXd gram = z.transpose() * z;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const Vector zty = z.transpose() * y;

  Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
  for (int it = 0; it < kMaxWeightIter; ++it) {
    const Vector grad = gram * w - zty;
    const Vector next = project_to_simplex(w - grad / lipschitz);
    const double change = (next - w).cwiseAbs().maxCoeff();
    w = next;
    if (change < kWeightTol) break;
  }
  // Never do worse than the best single column.
  double best = stacked_loss(z, y, w);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vector vertex = Vector::Unit(m, k);
    const double v = stacked_loss(z, y, vertex);
    if (v < best) {
      best = v;
      w = vertex;
    }
  }
  return w;
}

}  // namespace

FittedModel fit_super_learner(const LearnerSpec& spec, const SuperLearnerSpec& sl, const Matrix& x,
                              const Vector& y) {
  const Eigen::Index n = x.rows();
  if (n < sl.v_blocks) {
    throw Error(Errc::InvalidConfig, "super learner needs at least v_blocks rows");
  }
  const FoldPlan blocks = make_blocks(sl, x, y);
  const std::size_t m = sl.candidates.size();

  CvRiskReport report;
  report.risks.assign(m, std::numeric_limits<double>::infinity());
  Matrix oof(n, static_cast<Eigen::Index>(m));
  std::exception_ptr first_failure;

  for (std::size_t c = 0; c < m; ++c) {
    try {
      double total = 0.0;
      for (std::size_t b = 0; b < blocks.k(); ++b) {
        const IndexList train = blocks.complement(b);
        const IndexList& valid = blocks.folds[b];
        const FittedModel model = fit(sl.candidates[c], take_rows(x, train), take(y, train));
        const Vector pred = model.predict(take_rows(x, valid));
        for (std::size_t i = 0; i < valid.size(); ++i) {
          oof(static_cast<Eigen::Index>(valid[i]), static_cast<Eigen::Index>(c)) =
              pred[static_cast<Eigen::Index>(i)];
        }
        total += (pred - take(y, valid)).squaredNorm() / static_cast<double>(valid.size());
      }
      const double risk = total / static_cast<double>(blocks.k());
      if (std::isfinite(risk)) report.risks[c] = risk;
    } catch (const Error&) {
      if (!first_failure) first_failure = std::current_exception();
    }
  }

  std::vector<std::size_t> usable;
  for (std::size_t c = 0; c < m; ++c) {
    if (std::isfinite(report.risks[c])) usable.push_back(c);
  }
  if (usable.empty()) {
    if (first_failure) std::rethrow_exception(first_failure);
    throw Error(Errc::NonConvergence, "no super learner candidate produced a finite risk");
  }

  report.chosen = usable.front();
  for (std::size_t c : usable) {
    if (report.risks[c] < report.risks[report.chosen]) report.chosen = c;
  }
  report.weights.assign(m, 0.0);
  if (sl.mode == EnsembleMode::Selector) {
    report.weights[report.chosen] = 1.0;
  } else {
    Matrix z(n, static_cast<Eigen::Index>(usable.size()));
    for (std::size_t k = 0; k < usable.size(); ++k) {
      z.col(static_cast<Eigen::Index>(k)) = oof.col(static_cast<Eigen::Index>(usable[k]));
    }
    const Vector w = convex_weights(z, y);
    for (std::size_t k = 0; k < usable.size(); ++k) {
      report.weights[usable[k]] = w[static_cast<Eigen::Index>(k)];
    }
  }

  EnsembleParams params;
  params.members.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    if (report.weights[c] > 0.0) {
      params.members[c] = std::make_shared<const FittedModel>(fit(sl.candidates[c], x, y));
    }
  }
  params.report = std::move(report);
  return FittedModel(spec, std::move(params), static_cast<std::size_t>(n),
                     static_cast<std::size_t>(x.cols()));
}

}  // namespace dmlspss
