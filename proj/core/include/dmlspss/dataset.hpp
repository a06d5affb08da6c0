#pragma once

#include <string>
#include <vector>

#include "dmlspss/types.hpp"

namespace dmlspss {

/// Outcome, treatment and covariates of n observations.
///
/// Construct through `Dataset::make`, which enforces n >= 2, p >= 1, matching
/// lengths and finite entries. Treat as immutable afterwards.
struct Dataset {
  Vector y;
  Vector t;
  Matrix x;
  std::vector<std::string> column_names;  // covariate labels, may be empty

  static Dataset make(Vector y, Vector t, Matrix x, std::vector<std::string> column_names = {});

  std::size_t n() const { return static_cast<std::size_t>(y.size()); }
  std::size_t p() const { return static_cast<std::size_t>(x.cols()); }
};

struct StandardizationReport {
  Vector means;
  Vector scales;  // population sd; 1.0 for degenerate columns
  std::vector<bool> degenerate;
};

inline constexpr double kDegenerateScale = 1e-12;

struct Standardized {
  Matrix values;
  StandardizationReport report;
};

/// Centers each column and divides by its population (1/n) standard
/// deviation. Columns with sd below 1e-12 come out as zeros and are flagged.
Standardized standardize(const Matrix& m);

/// Inverse map x * scale + mean.
Matrix unstandardize(const Matrix& z, const StandardizationReport& report);

/// Rows of `d` in the order given by `idx`. Throws IndexOutOfRange or
/// DuplicateIndex.
Dataset subset_rows(const Dataset& d, const IndexList& idx);

/// Joint point cloud (T, X[, Y]) used for support-points splitting.
Matrix joint_cloud(const Dataset& d, bool include_outcome = true);

void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

}  // namespace dmlspss
