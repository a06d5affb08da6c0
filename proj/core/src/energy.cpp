#include "dmlspss/energy.hpp"

#include <cmath>

#include "dmlspss/error.hpp"

namespace dmlspss {
namespace {

void check_pair(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(Errc::DimensionMismatch, "point sets have different dimensions (" +
                                             std::to_string(a.cols()) + " vs " +
                                             std::to_string(b.cols()) + ")");
  }
  if (a.rows() < 1 || b.rows() < 1) throw Error(Errc::DimensionMismatch, "empty point set");
}

inline double row_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  double s = 0.0;
  const double* pa = a.row(i).data();
  const double* pb = b.row(j).data();
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const double diff = pa[k] - pb[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace

double mean_cross_distance(const Matrix& a, const Matrix& b) {
  check_pair(a, b);
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < b.rows(); ++j) row_sum += row_distance(a, i, b, j);
    total += row_sum;
  }
  return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

double mean_within_distance(const Matrix& a) {
  if (a.rows() < 1) throw Error(Errc::DimensionMismatch, "empty point set");
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = i + 1; j < a.rows(); ++j) row_sum += row_distance(a, i, a, j);
    total += row_sum;
  }
  const auto m = static_cast<double>(a.rows());
  return 2.0 * total / (m * m);
}

double energy_two_sample(const Matrix& a, const Matrix& b) {
  check_pair(a, b);
  return 2.0 * mean_cross_distance(a, b) - mean_within_distance(a) - mean_within_distance(b);
}

double sp_objective(const Matrix& candidate, const Matrix& full) {
  check_pair(candidate, full);
  return 2.0 * mean_cross_distance(candidate, full) - mean_within_distance(candidate);
}

}  // namespace dmlspss
