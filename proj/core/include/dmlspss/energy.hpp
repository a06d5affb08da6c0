#pragma once

#include "dmlspss/types.hpp"

namespace dmlspss {

/// Mean Euclidean distance over all (i, j) pairs of rows of `a` and `b`.
double mean_cross_distance(const Matrix& a, const Matrix& b);

/// Mean Euclidean distance over all ordered pairs of rows of `a`, diagonal
/// included (the 1/m^2 convention).
double mean_within_distance(const Matrix& a);

/// Two-sample energy distance between the empirical distributions of the
/// rows of `a` and `b`:
///   2 E|A - B| - E|A - A'| - E|B - B'|
/// using plain double summation in a fixed order.
double energy_two_sample(const Matrix& a, const Matrix& b);

/// Support-points criterion of a candidate set against the full cloud:
///   (2 / (n N)) sum_i sum_j |c_i - f_j| - (1 / n^2) sum_i sum_k |c_i - c_k|.
/// Differs from energy_two_sample(candidate, full) by mean_within_distance(full).
double sp_objective(const Matrix& candidate, const Matrix& full);

}  // namespace dmlspss
