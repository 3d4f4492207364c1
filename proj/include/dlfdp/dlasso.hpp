#pragma once

#include "dlfdp/common.hpp"
#include "dlfdp/lasso.hpp"
#include "dlfdp/nodewise.hpp"

#include <string>

namespace dlfdp {

/// How the noise level is obtained: given, from Lasso residuals (with or
/// without the active-set size as a degrees-of-freedom correction), or jointly
/// with the coefficients by the scaled Lasso.
struct SigmaMode {
  enum class Kind { known, residual_df, residual, scaled };
  Kind kind = Kind::residual_df;
  double value = 0.0;

  static SigmaMode known(double sigma) { return {Kind::known, sigma}; }
  static SigmaMode residual_df() { return {Kind::residual_df, 0.0}; }
  static SigmaMode residual() { return {Kind::residual, 0.0}; }
  static SigmaMode scaled() { return {Kind::scaled, 0.0}; }

  /// "known:<v>", "estimate", "residual" or "scaled".
  static SigmaMode parse(const std::string& text);
  std::string to_string() const;
};

struct DLassoResult {
  Vector beta_lasso;
  Vector b_hat;
  double sigma_used = 0.0;
  Vector omega_diag;
  Vector z;
  double lambda = 0.0;
  bool lasso_converged = false;
};

struct DeltaDiagnostic {
  Vector delta;
  double delta_inf = 0.0;
};

/// b = beta + Theta X'(y - X beta) / n.
Vector debias(const Vector& beta_lasso, const PrecisionFit& precision, const Dataset& data);

/// Known value, or the residual estimate ||y - X beta||_2 / sqrt(m) with
/// m = n - |active| (estimate) or m = n (residual). Scaled mode is rejected
/// here; use scaled_lasso.
double estimate_sigma(const Dataset& data, const LassoFit& fit, SigmaMode mode);

struct ScaledLassoFit {
  LassoFit fit;
  double sigma = 0.0;
  int iterations = 0;
};

/// Alternates lambda = lambda0 * sigma and sigma = ||y - X beta||_2 / sqrt(n)
/// from sigma = sd(y), with lambda0 = sqrt(2 ln p / n) unless given. With
/// `standardize`, the Lasso runs on columns rescaled to unit mean square and
/// the returned coefficients are mapped back to the original scale.
ScaledLassoFit scaled_lasso(const Dataset& data, const SolverOptions& solver = {},
                            double lambda0 = 0.0, int max_iterations = 100,
                            bool standardize = true);

/// z_j = sqrt(n) b_j / (sigma sqrt(Omega_jj)).
Vector standardize(const Vector& b_hat, const PrecisionFit& precision, double sigma, Index n);

/// delta = sqrt(n) (Theta Sigma_hat - I)(beta_lasso - beta_true); simulation only.
DeltaDiagnostic delta_diagnostic(const PrecisionFit& precision, const Vector& beta_lasso,
                                 const Vector& beta_true, Index n);

enum class LambdaRule {
  theory,  // lambda_scale * sigma * sqrt(ln p / n)
  cv,      // K-fold cross-validation
};

struct DLassoOptions {
  LambdaRule lambda_rule = LambdaRule::theory;
  double lambda_scale = 8.0;
  int cv_folds = 10;
  SigmaMode sigma = SigmaMode::residual_df();
  SolverOptions solver;
  /// Fixed-point iterations between lambda(sigma) and the residual estimate
  /// when sigma is unknown.
  int max_sigma_iterations = 30;
};

/// Noise level under `mode` for a finished DLasso run: the known value, the
/// residual estimate at the run's Lasso coefficients, or a fresh scaled Lasso.
double noise_level(const Dataset& data, const DLassoResult& result, SigmaMode mode,
                   const SolverOptions& solver = {});

/// Lasso fit, noise level, debiasing and standardization in one pass.
DLassoResult run_dlasso(const Dataset& data, const PrecisionFit& precision,
                        const DLassoOptions& opts = {});

}  // namespace dlfdp
