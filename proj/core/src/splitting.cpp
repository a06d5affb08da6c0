#include "dmlspss/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dmlspss/error.hpp"

namespace dmlspss {
namespace {

std::vector<std::size_t> fold_sizes(std::size_t n, std::size_t k) {
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];
  return sizes;
}

IndexList complement_of(const IndexList& chosen, std::size_t n) {
  std::vector<bool> in(n, false);
  for (std::size_t i : chosen) in[i] = true;
  IndexList out;
  out.reserve(n - chosen.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

Matrix spss_cloud(const Dataset& d, const SpConfig& cfg) {
  return standardize(joint_cloud(d, cfg.include_outcome)).values;
}

}  // namespace

std::size_t FoldPlan::n() const {
  std::size_t total = 0;
  for (const auto& f : folds) total += f.size();
  return total;
}

IndexList FoldPlan::complement(std::size_t k) const {
  const std::size_t total = n();
  std::vector<bool> in(total, false);
  for (std::size_t i : folds.at(k)) in[i] = true;
  IndexList out;
  for (std::size_t i = 0; i < total; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

void validate_partition(const FoldPlan& plan, std::size_t n) {
  std::vector<int> hits(n, 0);
  for (const auto& fold : plan.folds) {
    if (fold.empty()) throw Error(Errc::InvalidConfig, "fold plan contains an empty fold");
    for (std::size_t i : fold) {
      if (i >= n) throw Error(Errc::InvalidConfig, "fold index " + std::to_string(i) + " >= n");
      if (++hits[i] > 1) {
        throw Error(Errc::InvalidConfig, "row " + std::to_string(i) + " in two folds");
      }
    }
  }
  if (plan.n() != n) throw Error(Errc::InvalidConfig, "fold plan does not cover every row");
}

SplitResult sp_split_cloud(const Matrix& cloud, std::size_t n_test, const SpConfig& cfg) {
  const auto total = static_cast<std::size_t>(cloud.rows());
  SpConfig local = cfg;
  local.n_points = n_test;
  SplitResult out;
  out.sp = compute_support_points(cloud, local);
  out.test_idx = refine_subset(cloud, snap_to_rows(out.sp.points, cloud), cfg.refine_max_swaps);
  out.train_idx = complement_of(out.test_idx, total);
  return out;
}

SplitResult spss_split(const Dataset& d, double test_fraction, const SpConfig& cfg) {
  const std::size_t total = d.n();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::InvalidFraction, "test fraction must lie in (0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(total)));
  if (n_test < 1 || n_test > total - 1) {
    throw Error(Errc::InvalidFraction, "round(" + std::to_string(test_fraction) + " * " +
                                           std::to_string(total) + ") leaves an empty side");
  }
  return sp_split_cloud(spss_cloud(d, cfg), n_test, cfg);
}

FoldPlan sp_kfold_cloud(const Matrix& cloud, std::size_t k, const SpConfig& cfg) {
  const auto total = static_cast<std::size_t>(cloud.rows());
  if (k < 2 || 2 * k > total) {
    throw Error(Errc::InvalidConfig, "SPSS folds need 2 <= K <= N/2 (K=" + std::to_string(k) +
                                         ", N=" + std::to_string(total) + ")");
  }
  const auto sizes = fold_sizes(total, k);
  IndexList pool(total);
  std::iota(pool.begin(), pool.end(), std::size_t{0});

  FoldPlan plan;
  for (std::size_t f = 0; f + 1 < k; ++f) {
    SpConfig local = cfg;
    local.n_points = sizes[f];
    local.seed = f == 0 ? cfg.seed : mix_seed(cfg.seed, f);
    local.initial_points.reset();
    const Matrix sub = take_rows(cloud, pool);
    const SpResult sp = compute_support_points(sub, local);
    IndexList fold;
    std::vector<bool> taken(pool.size(), false);
    for (std::size_t local_row :
         refine_subset(sub, snap_to_rows(sp.points, sub), cfg.refine_max_swaps)) {
      fold.push_back(pool[local_row]);
      taken[local_row] = true;
    }
    IndexList rest;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!taken[i]) rest.push_back(pool[i]);
    }
    pool = std::move(rest);
    plan.folds.push_back(std::move(fold));
  }
  plan.folds.push_back(std::move(pool));
  return plan;
}

FoldPlan spss_kfold(const Dataset& d, std::size_t k, const SpConfig& cfg) {
  return sp_kfold_cloud(spss_cloud(d, cfg), k, cfg);
}

FoldPlan random_kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw Error(Errc::InvalidConfig, "random folds need 2 <= K <= n (K=" + std::to_string(k) +
                                         ", n=" + std::to_string(n) + ")");
  }
  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  FoldPlan plan;
  std::size_t offset = 0;
  for (std::size_t size : fold_sizes(n, k)) {
    IndexList fold(order.begin() + static_cast<std::ptrdiff_t>(offset),
                   order.begin() + static_cast<std::ptrdiff_t>(offset + size));
    std::sort(fold.begin(), fold.end());
    plan.folds.push_back(std::move(fold));
    offset += size;
  }
  return plan;
}

IndexList random_subset(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (count > n) throw Error(Errc::InvalidConfig, "subset larger than population");
  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace dmlspss
