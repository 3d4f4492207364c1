#include "dlfdp/common.hpp"

namespace dlfdp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid_dimension";
    case ErrorKind::invalid_data: return "invalid_data";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::degenerate_column: return "degenerate_column";
    case ErrorKind::saturated_model: return "saturated_model";
    case ErrorKind::degenerate_sigma: return "degenerate_sigma";
    case ErrorKind::invalid_precision: return "invalid_precision";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
    case ErrorKind::generation: return "generation";
    case ErrorKind::undefined_tpp: return "undefined_tpp";
    case ErrorKind::experiment: return "experiment";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::optional<Index> index)
    : std::runtime_error(message), kind_(kind), index_(index) {}

Dataset Dataset::make(Matrix x, Vector y) {
  if (x.rows() < 2 || x.cols() < 2) {
    throw Error(ErrorKind::invalid_dimension,
                "dataset needs n >= 2 and p >= 2, got n=" + std::to_string(x.rows()) +
                    " p=" + std::to_string(x.cols()));
  }
  if (y.size() != x.rows()) {
    throw Error(ErrorKind::dimension_mismatch,
                "y has " + std::to_string(y.size()) + " entries but X has " +
                    std::to_string(x.rows()) + " rows");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw Error(ErrorKind::invalid_data, "dataset contains non-finite entries");
  }
  return Dataset{std::move(x), std::move(y)};
}

}  // namespace dlfdp
