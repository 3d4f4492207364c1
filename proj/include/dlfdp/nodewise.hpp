#pragma once

// Relaxed inverse of the Gram matrix from p nodewise Lasso regressions.
//
// Row j of theta_hat is tau_j^-2 * (-gamma_{j,1}, ..., 1, ..., -gamma_{j,p}),
// where gamma_j regresses x_j on the remaining columns and
//   tau_j^2 = ||x_j - X_{-j} gamma_j||^2 / n + c lambda_j ||gamma_j||_1
// with c = 2 by default. Setting c = 1 gives the normalization under which
// the diagonal of theta_hat * Sigma_hat is exactly one at the Lasso optimum.

#include "dlfdp/common.hpp"
#include "dlfdp/lasso.hpp"

#include <iosfwd>
#include <vector>

namespace dlfdp {

struct NodewiseColumnFit {
  Index j = 0;
  Vector gamma_hat;  // length p - 1, columns of X_{-j} in ascending order
  double lambda_j = 0.0;
  double tau_sq = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct PrecisionFit {
  Matrix theta_hat;
  Matrix sigma_hat_gram;
  Matrix omega_hat;  // theta_hat * sigma_hat_gram * theta_hat', symmetrized
  double kappa = 0.0;
  std::vector<NodewiseColumnFit> column_fits;
};

struct PrecisionOptions {
  double kappa = 2.0;
  SolverOptions solver;
  /// Multiply lambda_j by sqrt(Sigma_hat_jj). Off by default: the theory
  /// uses one common lambda for all columns.
  bool scale_lambda_by_column = false;
  ExecPolicy policy = ExecPolicy::parallel;
  /// Coefficient c of the penalty term in tau_j^2.
  double tau_penalty_factor = 2.0;
};

inline constexpr double kDegenerateTauSq = 1e-12;

/// X'X / n, exactly symmetric.
Matrix gram(const Dataset& data);

/// kappa * sqrt(ln p / n).
double nodewise_lambda(Index n, Index p, double kappa);

/// Nodewise regression for column j (0-based). Throws degenerate_column when
/// tau_j^2 <= 1e-12.
NodewiseColumnFit fit_nodewise_column(const Dataset& data, Index j, double lambda_j,
                                      const SolverOptions& opts = {},
                                      double tau_penalty_factor = 2.0);

PrecisionFit build_precision(const Dataset& data, const PrecisionOptions& opts = {});

inline PrecisionFit build_precision(const Dataset& data, double kappa,
                                    const SolverOptions& solver,
                                    ExecPolicy policy = ExecPolicy::parallel) {
  return build_precision(data, PrecisionOptions{kappa, solver, false, policy});
}

/// Theta-hat as headerless CSV, 17 significant digits, so a design's
/// precision estimate can be reused across runs.
void write_theta_csv(std::ostream& out, const Matrix& theta);
Matrix read_theta_csv(std::istream& in);

}  // namespace dlfdp
