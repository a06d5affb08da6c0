#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace dmlspss {

/// Row-major so that a row (one observation) is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<std::size_t>;

/// Gathers the listed rows of `m` in the given order.
Matrix take_rows(const Matrix& m, const IndexList& idx);
Vector take(const Vector& v, const IndexList& idx);

/// SplitMix64 finalizer applied to a (master, stream) pair. Distinct streams
/// give distinct, well-mixed seeds.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) noexcept;

}  // namespace dmlspss
