#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "nbsparse/error.hpp"

namespace nbsparse {

/// Affine map applied to a raw column at build time:
/// stored = multiplier * raw + offset.
struct ColumnScaling {
  double multiplier = 1.0;
  double offset = 0.0;

  double apply(double raw) const noexcept { return multiplier * raw + offset; }
  double invert(double stored) const noexcept { return (stored - offset) / multiplier; }

  bool operator==(const ColumnScaling&) const = default;
};

/// Dense design matrix with an all-ones intercept in column 0 and a vector of
/// non-negative integer counts. Immutable once constructed.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<std::string> column_names,
          std::vector<ColumnScaling> scaling = {})
      : X_(std::move(X)), y_(std::move(y)), names_(std::move(column_names)), scaling_(std::move(scaling)) {
    if (scaling_.empty()) scaling_.assign(static_cast<std::size_t>(X_.cols()), ColumnScaling{});
    validate();
  }

  std::size_t rows() const noexcept { return static_cast<std::size_t>(X_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(X_.cols()); }

  const Eigen::MatrixXd& X() const noexcept { return X_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  const std::vector<ColumnScaling>& scaling() const noexcept { return scaling_; }

  /// Rows picked by index; indices may repeat (bootstrap resampling).
  Dataset select_rows(std::span<const std::size_t> idx) const {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), X_.cols());
    Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] >= rows()) throw ContractViolation("select_rows: row index out of range");
      X.row(static_cast<Eigen::Index>(r)) = X_.row(static_cast<Eigen::Index>(idx[r]));
      y[static_cast<Eigen::Index>(r)] = y_[static_cast<Eigen::Index>(idx[r])];
    }
    return Dataset(std::move(X), std::move(y), names_, scaling_);
  }

  /// Row-wise concatenation; schemas must agree.
  friend Dataset concat(const Dataset& a, const Dataset& b) {
    if (a.names_ != b.names_) throw ContractViolation("concat: column names differ");
    Eigen::MatrixXd X(a.X_.rows() + b.X_.rows(), a.X_.cols());
    X << a.X_, b.X_;
    Eigen::VectorXd y(a.y_.size() + b.y_.size());
    y << a.y_, b.y_;
    return Dataset(std::move(X), std::move(y), a.names_, a.scaling_);
  }

 private:
  void validate() const {
    const auto n = X_.rows();
    const auto p = X_.cols();
    if (n < 1 || p < 1) throw ContractViolation("Dataset: need at least one row and one column");
    if (y_.size() != n) throw ContractViolation("Dataset: y length does not match row count");
    if (names_.size() != static_cast<std::size_t>(p))
      throw ContractViolation("Dataset: column_names must have one entry per column");
    if (scaling_.size() != static_cast<std::size_t>(p))
      throw ContractViolation("Dataset: scaling must have one entry per column");
    std::unordered_set<std::string> seen;
    for (const auto& nm : names_) {
      if (!seen.insert(nm).second) throw ContractViolation("Dataset: duplicate column name '" + nm + "'");
    }
    if (!X_.allFinite()) throw ContractViolation("Dataset: X has non-finite entries");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = y_[j];
      if (!(v >= 0.0) || v != std::floor(v) || !std::isfinite(v))
        throw ContractViolation("Dataset: y[" + std::to_string(j) + "] is not a non-negative integer");
      if (X_(j, 0) != 1.0) throw ContractViolation("Dataset: column 0 must be the all-ones intercept");
    }
    if (scaling_[0] != ColumnScaling{}) throw ContractViolation("Dataset: the intercept cannot be rescaled");
  }

  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  std::vector<std::string> names_;
  std::vector<ColumnScaling> scaling_;
};

/// Standardizes every non-intercept column to mean 0 and (population) sd 1,
/// composing with any existing scaling. Constant columns are left untouched.
inline Dataset standardize(const Dataset& data) {
  Eigen::MatrixXd X = data.X();
  std::vector<ColumnScaling> scaling = data.scaling();
  const double n = static_cast<double>(data.rows());
  for (Eigen::Index c = 1; c < X.cols(); ++c) {
    auto col = X.col(c);
    const double mean = col.sum() / n;
    const double var = (col.array() - mean).square().sum() / n;
    if (!(var > 0.0)) continue;
    const double sd = std::sqrt(var);
    col = (col.array() - mean) / sd;
    auto& s = scaling[static_cast<std::size_t>(c)];
    s = ColumnScaling{s.multiplier / sd, (s.offset - mean) / sd};
  }
  return Dataset(std::move(X), data.y(), data.column_names(), std::move(scaling));
}

}  // namespace nbsparse
