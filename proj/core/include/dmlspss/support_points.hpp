#pragma once

#include <optional>
#include <vector>

#include "dmlspss/types.hpp"

namespace dmlspss {

enum class SpInit { RandomRows, KMeansPlusPlusRows };

struct SpConfig {
  std::size_t n_points = 0;
  int max_iter = 200;
  double tol = 1e-8;  // relative objective change
  std::uint64_t seed = 0;
  SpInit init = SpInit::RandomRows;
  /// Gaussian perturbation of the initial rows, in units of each column's sd.
  double init_jitter = 1.0;
  double zero_dist_eps = 1e-10;
  /// Explicit starting points; overrides `init` when set.
  std::optional<Matrix> initial_points;
  /// Whether SPSS splitting includes the outcome column in the cloud.
  bool include_outcome = true;
  /// Exchange passes applied by SPSS splitting after snapping (0 disables).
  int refine_max_swaps = 10000;
};

struct SpResult {
  Matrix points;
  std::vector<double> objective_trace;  // [0] is the initial objective
  int iterations = 0;
  bool converged = false;
};

/// Support points of the empirical distribution of `full` (rows are points),
/// found by majorization-minimization on the support-points criterion.
///
/// Each sweep moves every point to
///   y_i <- (sum_m x_m / |y_i - x_m| + (N/n) sum_{j != i} (y_i - y_j) / |y_i - y_j|)
///          / sum_m 1 / |y_i - x_m|
/// with terms whose distance is below zero_dist_eps dropped. A sweep that
/// would raise the criterion is halved back towards the previous iterate, so
/// the recorded trace never increases.
SpResult compute_support_points(const Matrix& full, const SpConfig& cfg);

/// Initial points used by compute_support_points for this config.
Matrix initial_support_points(const Matrix& full, const SpConfig& cfg);

/// Sequential nearest-neighbour assignment of points to distinct rows of
/// `full`, in point order, ties to the lowest row index.
IndexList snap_to_rows(const Matrix& points, const Matrix& full);

/// Greedy best-improvement exchange: repeatedly swaps one chosen row for an
/// unchosen one while that lowers energy_two_sample(chosen rows, full). Slots
/// keep their position in the list. Stops after `max_swaps` swaps or when no
/// swap helps.
IndexList refine_subset(const Matrix& full, IndexList chosen, int max_swaps);

}  // namespace dmlspss
