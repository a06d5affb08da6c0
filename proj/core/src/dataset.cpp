#include "dmlspss/dataset.hpp"

#include <cmath>
#include <string>

#include "dmlspss/error.hpp"

namespace dmlspss {

Matrix take_rows(const Matrix& m, const IndexList& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

Vector take(const Vector& v, const IndexList& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(idx[i])];
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void require_finite(const Matrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        throw Error(Errc::NonFinite, std::string(what) + " has a non-finite entry at row " +
                                         std::to_string(i) + ", column " + std::to_string(j));
      }
    }
  }
}

void require_finite(const Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(Errc::NonFinite,
                  std::string(what) + " has a non-finite entry at row " + std::to_string(i));
    }
  }
}

Dataset Dataset::make(Vector y, Vector t, Matrix x, std::vector<std::string> column_names) {
  if (y.size() != t.size() || y.size() != x.rows()) {
    throw Error(Errc::DimensionMismatch, "y, t and x must have the same number of rows");
  }
  if (y.size() < 2) throw Error(Errc::DimensionMismatch, "a dataset needs at least 2 rows");
  if (x.cols() < 1) throw Error(Errc::DimensionMismatch, "a dataset needs at least 1 covariate");
  if (!column_names.empty() && column_names.size() != static_cast<std::size_t>(x.cols())) {
    throw Error(Errc::DimensionMismatch, "column_names must label every covariate");
  }
  require_finite(y, "outcome");
  require_finite(t, "treatment");
  require_finite(x, "covariates");
  return Dataset{std::move(y), std::move(t), std::move(x), std::move(column_names)};
}

Standardized standardize(const Matrix& m) {
  if (m.rows() < 2) throw Error(Errc::DimensionMismatch, "standardize needs at least 2 rows");
  require_finite(m, "matrix");
  const auto n = static_cast<double>(m.rows());
  const Eigen::Index d = m.cols();

  Standardized out;
  out.values.resize(m.rows(), d);
  out.report.means.resize(d);
  out.report.scales.resize(d);
  out.report.degenerate.assign(static_cast<std::size_t>(d), false);

  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = m.col(j).sum() / n;
    const auto centered = (m.col(j).array() - mean).eval();
    const double sd = std::sqrt(centered.square().sum() / n);
    out.report.means[j] = mean;
    if (sd < kDegenerateScale) {
      out.report.scales[j] = 1.0;
      out.report.degenerate[static_cast<std::size_t>(j)] = true;
      out.values.col(j).setZero();
    } else {
      out.report.scales[j] = sd;
      out.values.col(j) = centered.matrix() / sd;
    }
  }
  return out;
}

Matrix unstandardize(const Matrix& z, const StandardizationReport& report) {
  if (z.cols() != report.means.size()) {
    throw Error(Errc::DimensionMismatch, "report does not match matrix width");
  }
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    out.col(j) = (z.col(j).array() * report.scales[j] + report.means[j]).matrix();
  }
  return out;
}

Dataset subset_rows(const Dataset& d, const IndexList& idx) {
  std::vector<bool> seen(d.n(), false);
  for (std::size_t i : idx) {
    if (i >= d.n()) {
      throw Error(Errc::IndexOutOfRange,
                  "row " + std::to_string(i) + " outside [0, " + std::to_string(d.n()) + ")");
    }
    if (seen[i]) throw Error(Errc::DuplicateIndex, "row " + std::to_string(i) + " listed twice");
    seen[i] = true;
  }
  Dataset out;
  out.y = take(d.y, idx);
  out.t = take(d.t, idx);
  out.x = take_rows(d.x, idx);
  out.column_names = d.column_names;
  return out;
}

Matrix joint_cloud(const Dataset& d, bool include_outcome) {
  const Eigen::Index n = static_cast<Eigen::Index>(d.n());
  const Eigen::Index p = static_cast<Eigen::Index>(d.p());
  Matrix cloud(n, p + 1 + (include_outcome ? 1 : 0));
  cloud.col(0) = d.t;
  cloud.middleCols(1, p) = d.x;
  if (include_outcome) cloud.col(p + 1) = d.y;
  return cloud;
}

}  // namespace dmlspss
