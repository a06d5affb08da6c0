#include "dmlspss/support_points.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "dmlspss/dataset.hpp"
#include "dmlspss/error.hpp"

namespace dmlspss {
namespace {

// Entries whose squared distance falls below this fraction of |a|^2 + |b|^2
// are recomputed directly; the Gram expansion loses them to cancellation.
constexpr double kGramRecomputeRatio = 1e-4;
constexpr int kMaxHalvings = 40;

double exact_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).norm();
}

Matrix pairwise_distances(const Matrix& a, const Matrix& b, bool same) {
  const Vector a_sq = a.rowwise().squaredNorm();
  const Vector b_sq = same ? a_sq : Vector(b.rowwise().squaredNorm());
  Matrix d = a * b.transpose();
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (same && i == j) {
        d(i, j) = 0.0;
        continue;
      }
      const double scale = a_sq[i] + b_sq[j];
      const double d2 = scale - 2.0 * d(i, j);
      d(i, j) = d2 <= kGramRecomputeRatio * scale ? exact_distance(a, i, b, j)
                                                  : std::sqrt(d2);
    }
  }
  return d;
}

struct Distances {
  Matrix cross;   // n x N
  Matrix within;  // n x n
  double objective = 0.0;
};

Distances evaluate(const Matrix& points, const Matrix& full) {
  Distances out;
  out.cross = pairwise_distances(points, full, false);
  out.within = pairwise_distances(points, points, true);
  const auto n = static_cast<double>(points.rows());
  const auto big_n = static_cast<double>(full.rows());
  out.objective = 2.0 * out.cross.sum() / (n * big_n) - out.within.sum() / (n * n);
  return out;
}

Matrix mm_step(const Matrix& points, const Matrix& full, const Distances& dist, double eps) {
  const Eigen::Index n = points.rows();
  const double ratio = static_cast<double>(full.rows()) / static_cast<double>(n);

  Matrix attract = dist.cross.unaryExpr([eps](double v) { return v >= eps ? 1.0 / v : 0.0; });
  Matrix repel = dist.within.unaryExpr([eps](double v) { return v >= eps ? 1.0 / v : 0.0; });
  repel.diagonal().setZero();

  const Vector denom = attract.rowwise().sum();
  const Vector repel_sum = repel.rowwise().sum();
  Matrix next = attract * full;
  next += ratio * (repel_sum.asDiagonal() * points - repel * points);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (denom[i] > 0.0) {
      next.row(i) /= denom[i];
    } else {
      next.row(i) = points.row(i);
    }
  }
  return next;
}

void validate(const Matrix& full, const SpConfig& cfg) {
  if (full.rows() < 1) throw Error(Errc::InvalidConfig, "support points need a non-empty cloud");
  if (cfg.n_points < 1 || cfg.n_points > static_cast<std::size_t>(full.rows())) {
    throw Error(Errc::InvalidConfig, "n_points must lie in [1, " + std::to_string(full.rows()) +
                                         "], got " + std::to_string(cfg.n_points));
  }
  if (!(cfg.tol > 0.0)) throw Error(Errc::InvalidConfig, "tol must be positive");
  if (cfg.max_iter < 1) throw Error(Errc::InvalidConfig, "max_iter must be positive");
  if (!(cfg.zero_dist_eps > 0.0)) throw Error(Errc::InvalidConfig, "zero_dist_eps must be positive");
  if (!(cfg.init_jitter >= 0.0)) throw Error(Errc::InvalidConfig, "init_jitter must be >= 0");
  if (cfg.refine_max_swaps < 0) throw Error(Errc::InvalidConfig, "refine_max_swaps must be >= 0");
  if (cfg.initial_points) {
    if (cfg.initial_points->rows() != static_cast<Eigen::Index>(cfg.n_points) ||
        cfg.initial_points->cols() != full.cols()) {
      throw Error(Errc::InvalidConfig, "initial_points must be n_points x d");
    }
  }
  require_finite(full, "point cloud");
}

IndexList random_rows(std::size_t total, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  IndexList pool(total);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

IndexList kmeanspp_rows(const Matrix& full, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto total = static_cast<std::size_t>(full.rows());
  std::vector<bool> used(total, false);
  std::vector<double> d2(total, std::numeric_limits<double>::infinity());
  IndexList chosen;
  chosen.reserve(count);

  std::uniform_int_distribution<std::size_t> first(0, total - 1);
  std::size_t next = first(rng);
  while (chosen.size() < count) {
    chosen.push_back(next);
    used[next] = true;
    double weight_sum = 0.0;
    for (std::size_t r = 0; r < total; ++r) {
      if (used[r]) {
        d2[r] = 0.0;
        continue;
      }
      d2[r] = std::min(d2[r], (full.row(static_cast<Eigen::Index>(r)) -
                               full.row(static_cast<Eigen::Index>(next)))
                                  .squaredNorm());
      weight_sum += d2[r];
    }
    if (chosen.size() == count) break;
    if (weight_sum > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, weight_sum)(rng);
      double acc = 0.0;
      next = total;
      for (std::size_t r = 0; r < total; ++r) {
        if (used[r] || d2[r] <= 0.0) continue;
        acc += d2[r];
        next = r;
        if (acc > target) break;
      }
    } else {
      // Every remaining row duplicates a chosen one.
      IndexList rest;
      for (std::size_t r = 0; r < total; ++r) {
        if (!used[r]) rest.push_back(r);
      }
      next = rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
    }
  }
  return chosen;
}

}  // namespace

Matrix initial_support_points(const Matrix& full, const SpConfig& cfg) {
  validate(full, cfg);
  if (cfg.initial_points) return *cfg.initial_points;
  const auto total = static_cast<std::size_t>(full.rows());
  Matrix points = cfg.init == SpInit::KMeansPlusPlusRows
                      ? take_rows(full, kmeanspp_rows(full, cfg.n_points, cfg.seed))
                      : take_rows(full, random_rows(total, cfg.n_points, cfg.seed));
  if (cfg.init_jitter > 0.0 && full.rows() > 1) {
    const Eigen::RowVectorXd mean = full.colwise().mean();
    const Eigen::RowVectorXd sd =
        ((full.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(full.rows())).cwiseSqrt();
    std::mt19937_64 rng(mix_seed(cfg.seed, 1));
    std::normal_distribution<double> noise;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      for (Eigen::Index j = 0; j < points.cols(); ++j) {
        points(i, j) += cfg.init_jitter * sd(j) * noise(rng);
      }
    }
  }
  return points;
}

SpResult compute_support_points(const Matrix& full, const SpConfig& cfg) {
  SpResult result;
  result.points = initial_support_points(full, cfg);
  Distances current = evaluate(result.points, full);
  result.objective_trace.push_back(current.objective);

  for (int it = 0; it < cfg.max_iter; ++it) {
    Matrix candidate = mm_step(result.points, full, current, cfg.zero_dist_eps);
    Distances trial = evaluate(candidate, full);
    int halvings = 0;
    while (trial.objective > current.objective && halvings < kMaxHalvings) {
      candidate = 0.5 * (candidate + result.points);
      trial = evaluate(candidate, full);
      ++halvings;
    }
    if (trial.objective > current.objective) {
      // No descent left along the MM direction: a fixed point.
      result.converged = true;
      break;
    }
    const double previous = current.objective;
    result.points = std::move(candidate);
    current = std::move(trial);
    result.objective_trace.push_back(current.objective);
    result.iterations = it + 1;

    const double denom = std::max(std::abs(previous), std::numeric_limits<double>::min());
    if (std::abs(previous - current.objective) / denom < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

IndexList snap_to_rows(const Matrix& points, const Matrix& full) {
  if (points.cols() != full.cols()) {
    throw Error(Errc::DimensionMismatch, "points and cloud have different dimensions");
  }
  if (points.rows() > full.rows()) {
    throw Error(Errc::InvalidConfig, "more points than rows to snap to");
  }
  const auto total = static_cast<std::size_t>(full.rows());
  std::vector<bool> used(total, false);
  IndexList out;
  out.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    std::size_t best = total;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < total; ++r) {
      if (used[r]) continue;
      const double d2 = (points.row(i) - full.row(static_cast<Eigen::Index>(r))).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = r;
      }
    }
    used[best] = true;
    out.push_back(best);
  }
  return out;
}

IndexList refine_subset(const Matrix& full, IndexList chosen, int max_swaps) {
  const auto total = static_cast<std::size_t>(full.rows());
  const std::size_t n = chosen.size();
  if (n == 0 || n >= total || max_swaps <= 0) return chosen;
  std::vector<bool> in(total, false);
  for (std::size_t r : chosen) {
    if (r >= total) throw Error(Errc::IndexOutOfRange, "chosen row out of range");
    if (in[r]) throw Error(Errc::DuplicateIndex, "chosen rows must be distinct");
    in[r] = true;
  }

  auto distances_from = [&](std::size_t r) {
    return (full.rowwise() - full.row(static_cast<Eigen::Index>(r))).rowwise().norm().eval();
  };
  // a[k]: distance sum from row k to the whole cloud; s[k]: to the chosen rows.
  Vector a = Vector::Zero(static_cast<Eigen::Index>(total));
  for (std::size_t r = 0; r < total; ++r) a += distances_from(r);
  Matrix block(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(total));
  for (std::size_t slot = 0; slot < n; ++slot) {
    block.row(static_cast<Eigen::Index>(slot)) = distances_from(chosen[slot]).transpose();
  }
  Vector s = block.colwise().sum().transpose();

  const double nn = static_cast<double>(n);
  const double cross_w = 2.0 / (nn * static_cast<double>(total));
  const double within_w = 2.0 / (nn * nn);
  const double scale = std::max(a.mean() * cross_w, std::numeric_limits<double>::min());

  for (int swap = 0; swap < max_swaps; ++swap) {
    double best = -1e-12 * scale;
    std::size_t best_slot = n;
    std::size_t best_row = total;
    for (std::size_t slot = 0; slot < n; ++slot) {
      const std::size_t i = chosen[slot];
      const double base = -cross_w * a(static_cast<Eigen::Index>(i)) + within_w * s(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < total; ++j) {
        if (in[j]) continue;
        const auto jj = static_cast<Eigen::Index>(j);
        const double delta =
            base + cross_w * a(jj) - within_w * (s(jj) - block(static_cast<Eigen::Index>(slot), jj));
        if (delta < best) {
          best = delta;
          best_slot = slot;
          best_row = j;
        }
      }
    }
    if (best_slot == n) break;
    const auto bs = static_cast<Eigen::Index>(best_slot);
    const Vector fresh = distances_from(best_row);
    s += fresh - block.row(bs).transpose();
    block.row(bs) = fresh.transpose();
    in[chosen[best_slot]] = false;
    in[best_row] = true;
    chosen[best_slot] = best_row;
  }
  return chosen;
}

}  // namespace dmlspss
