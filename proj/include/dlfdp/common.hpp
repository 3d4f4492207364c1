#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dlfdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorKind {
  invalid_dimension,
  invalid_data,
  dimension_mismatch,
  degenerate_column,
  saturated_model,
  degenerate_sigma,
  invalid_precision,
  non_finite,
  config,
  parse,
  generation,
  undefined_tpp,
  experiment,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Library error. `index()` carries the 0-based predictor index when the
/// failure is attributable to a single column or coordinate.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<Index> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<Index> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<Index> index_;
};

/// Observed data of the linear model y = X beta + eps. Rows of `x` are
/// observations, columns are predictors.
struct Dataset {
  Matrix x;
  Vector y;

  Index n() const noexcept { return x.rows(); }
  Index p() const noexcept { return x.cols(); }

  /// Validates shape (n >= 2, p >= 2, matching y) and finiteness.
  static Dataset make(Matrix x, Vector y);
};

/// Selects between the OpenMP kernels and their serial reference.
enum class ExecPolicy { serial, parallel };

}  // namespace dlfdp
