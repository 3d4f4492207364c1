#pragma once

// Lasso by cyclic coordinate descent for the objective
//
//   ||y - X b||_2^2 / n + 2 lambda ||b||_1
//
// (twice the usual 1/(2n) convention, so minimizers agree at equal lambda).
// No intercept is fitted; `SolverOptions::center` centers X and y first.

#include "dlfdp/common.hpp"

#include <span>
#include <vector>

namespace dlfdp {

struct SolverOptions {
  double tol = 1e-7;       // max absolute coefficient change in a full sweep
  int max_sweeps = 10000;  // counts full and active-set sweeps alike
  bool center = false;

  void validate() const;
};

struct LassoFit {
  Vector beta_hat;
  double lambda = 0.0;
  Vector residuals;  // y - X beta_hat (of the centered data when center = true)
  int iterations = 0;
  bool converged = false;
  std::vector<Index> active_set;  // ascending indices with beta_hat != 0
};

double soft_threshold(double x, double lambda);

/// scale * sigma * sqrt(ln p / n). The theory default is scale = 8.
double default_lambda(Index n, Index p, double sigma, double scale = 8.0);

/// max_j |x_j' y / n|, the smallest lambda with an all-zero solution.
double lambda_max(const Dataset& data);

/// Tolerance used to certify convergence: 1e-5 * max(1, ||X'y/n||_inf).
double kkt_tolerance(const Dataset& data);

double lasso_objective(const Dataset& data, const Vector& beta, double lambda);

LassoFit fit_lasso(const Dataset& data, double lambda, const SolverOptions& opts = {});
LassoFit fit_lasso(const Dataset& data, double lambda, const SolverOptions& opts,
                   const Vector& warm_start);

/// Largest violation of the Lasso optimality conditions, with
/// g_j = x_j'(y - X beta)/n:  max(|g_j| - lambda, 0) on zero coordinates and
/// |g_j - lambda sign(beta_j)| on nonzero ones.
double kkt_residual(const LassoFit& fit, const Dataset& data, double lambda);

/// Ranks predictors (0-based) by the lambda at which they first enter the
/// active set along a warm-started geometric grid from lambda_max down to
/// lambda_max * 1e-3. Same-lambda entries are ordered by |beta| at entry,
/// then index; predictors that never enter follow in index order.
std::vector<Index> lasso_path_ranking(const Dataset& data, int grid_size,
                                      const SolverOptions& opts = {});

struct CvResult {
  double lambda = 0.0;           // grid value with the smallest mean held-out MSE
  std::vector<double> grid;      // descending
  std::vector<double> cv_error;  // mean held-out squared error per grid value
};

/// K-fold cross-validation over a geometric grid from lambda_max down to
/// lambda_max * min_ratio. Observation i belongs to fold i mod folds.
CvResult cv_lambda(const Dataset& data, int folds = 10, int grid_size = 100,
                   double min_ratio = 0.01, const SolverOptions& opts = {});

namespace detail {

struct CdOutcome {
  int iterations = 0;
  bool converged = false;
};

/// Coordinate descent over the columns of `x` except `skip` (pass -1 for
/// none). `beta` and `resid` must satisfy resid = response - x * beta on
/// entry; both are updated in place. `col_sq_norms[j]` is ||x_j||^2 / n.
CdOutcome coordinate_descent(const Matrix& x, std::span<const double> col_sq_norms,
                             double lambda, const SolverOptions& opts, Index skip,
                             double kkt_tol, Vector& beta, Vector& resid);

/// KKT residual of (beta, resid) over all columns except `skip`.
double kkt_residual(const Matrix& x, const Vector& beta, const Vector& resid,
                    double lambda, Index skip);

}  // namespace detail

}  // namespace dlfdp
