#pragma once

#include "dmlspss/dataset.hpp"
#include "dmlspss/support_points.hpp"

namespace dmlspss {

struct SplitResult {
  IndexList test_idx;   // in snapping order
  IndexList train_idx;  // ascending
  SpResult sp;          // solver diagnostics for the test set
};

/// Disjoint folds covering 0..n-1.
struct FoldPlan {
  std::vector<IndexList> folds;

  std::size_t k() const { return folds.size(); }
  std::size_t n() const;
  /// Rows outside fold `k`, ascending.
  IndexList complement(std::size_t k) const;
};

/// Checks that `plan` partitions 0..n-1; throws InvalidConfig otherwise.
void validate_partition(const FoldPlan& plan, std::size_t n);

/// Test-set-first support-points split of the standardized joint (T, X, Y)
/// cloud. The test set is the snapped support points of size
/// round(test_fraction * N); `cfg.n_points` is ignored.
SplitResult spss_split(const Dataset& d, double test_fraction, const SpConfig& cfg);

/// Same as spss_split on an already standardized cloud, with an explicit size.
SplitResult sp_split_cloud(const Matrix& cloud, std::size_t n_test, const SpConfig& cfg);

/// K folds by sequential peeling: fold k is the snapped support points of the
/// rows not yet assigned; the last fold takes the remainder. Fold sizes
/// differ by at most one, larger folds first.
FoldPlan spss_kfold(const Dataset& d, std::size_t k, const SpConfig& cfg);
FoldPlan sp_kfold_cloud(const Matrix& cloud, std::size_t k, const SpConfig& cfg);

/// Uniformly shuffled partition into k folds (sizes differ by at most one).
FoldPlan random_kfold(std::size_t n, std::size_t k, std::uint64_t seed);

/// Uniform random subset of `count` distinct rows out of `n`, ascending.
IndexList random_subset(std::size_t n, std::size_t count, std::uint64_t seed);

}  // namespace dmlspss
