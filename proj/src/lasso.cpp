#include "dlfdp/lasso.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace dlfdp {

namespace {

std::vector<double> squared_column_norms(const Matrix& x) {
  const double n = static_cast<double>(x.rows());
  std::vector<double> norms(static_cast<std::size_t>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j) norms[j] = x.col(j).squaredNorm() / n;
  return norms;
}

Dataset centered(const Dataset& data) {
  Dataset out = data;
  out.x.rowwise() -= data.x.colwise().mean();
  out.y.array() -= data.y.mean();
  return out;
}

std::vector<Index> nonzero_indices(const Vector& beta) {
  std::vector<Index> out;
  for (Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) out.push_back(j);
  return out;
}

[[maybe_unused]] double objective(const Vector& beta, const Vector& resid, double lambda) {
  return resid.squaredNorm() / static_cast<double>(resid.size()) +
         2.0 * lambda * beta.lpNorm<1>();
}

}  // namespace

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorKind::config, "solver tol must be positive");
  if (max_sweeps < 1) throw Error(ErrorKind::config, "solver max_sweeps must be >= 1");
}

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

double default_lambda(Index n, Index p, double sigma, double scale) {
  if (p < 2 || n < 1) {
    throw Error(ErrorKind::invalid_dimension,
                "default_lambda needs n >= 1 and p >= 2, got n=" + std::to_string(n) +
                    " p=" + std::to_string(p));
  }
  return scale * sigma * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

double lambda_max(const Dataset& data) {
  return (data.x.transpose() * data.y).lpNorm<Eigen::Infinity>() /
         static_cast<double>(data.n());
}

double kkt_tolerance(const Dataset& data) { return 1e-5 * std::max(1.0, lambda_max(data)); }

double lasso_objective(const Dataset& data, const Vector& beta, double lambda) {
  const Vector r = data.y - data.x * beta;
  return r.squaredNorm() / static_cast<double>(data.n()) + 2.0 * lambda * beta.lpNorm<1>();
}

namespace detail {

double kkt_residual(const Matrix& x, const Vector& beta, const Vector& resid, double lambda,
                    Index skip) {
  const double n = static_cast<double>(x.rows());
  double worst = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    if (j == skip) continue;
    const double g = x.col(j).dot(resid) / n;
    const double v = beta[j] == 0.0 ? std::max(std::abs(g) - lambda, 0.0)
                                    : std::abs(g - lambda * (beta[j] > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

CdOutcome coordinate_descent(const Matrix& x, std::span<const double> col_sq_norms,
                             double lambda, const SolverOptions& opts, Index skip,
                             double kkt_tol, Vector& beta, Vector& resid) {
  const double n = static_cast<double>(x.rows());
  const Index p = x.cols();

  auto update = [&](Index k) -> double {
    const double nk = col_sq_norms[k];
    if (k == skip || nk <= 0.0) return 0.0;
    const double old = beta[k];
    const double g = x.col(k).dot(resid) / n + nk * old;
    const double next = soft_threshold(g, lambda) / nk;
    const double delta = next - old;
    if (delta != 0.0) {
      resid.noalias() -= delta * x.col(k);
      beta[k] = next;
    }
    return std::abs(delta);
  };

#ifndef NDEBUG
  double last_objective = objective(beta, resid, lambda);
  auto check_descent = [&] {
    const double obj = objective(beta, resid, lambda);
    assert(obj <= last_objective + 1e-12 * std::max(1.0, std::abs(last_objective)));
    last_objective = obj;
  };
#else
  auto check_descent = [] {};
#endif

  CdOutcome out;
  std::vector<Index> active;
  while (out.iterations < opts.max_sweeps) {
    double max_change = 0.0;
    for (Index k = 0; k < p; ++k) max_change = std::max(max_change, update(k));
    ++out.iterations;
    check_descent();
    if (max_change < opts.tol && kkt_residual(x, beta, resid, lambda, skip) <= kkt_tol) {
      out.converged = true;
      break;
    }
    // Iterate on the current support until it settles, then re-check everything.
    active = nonzero_indices(beta);
    while (out.iterations < opts.max_sweeps) {
      double active_change = 0.0;
      for (Index k : active) active_change = std::max(active_change, update(k));
      ++out.iterations;
      check_descent();
      if (active_change < opts.tol) break;
    }
  }
  return out;
}

}  // namespace detail

LassoFit fit_lasso(const Dataset& data, double lambda, const SolverOptions& opts) {
  return fit_lasso(data, lambda, opts, Vector::Zero(data.p()));
}

LassoFit fit_lasso(const Dataset& data, double lambda, const SolverOptions& opts,
                   const Vector& warm_start) {
  opts.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::config, "lambda must be positive and finite");
  if (!data.x.allFinite() || !data.y.allFinite())
    throw Error(ErrorKind::invalid_data, "dataset contains non-finite entries");
  if (data.y.size() != data.n() || warm_start.size() != data.p())
    throw Error(ErrorKind::dimension_mismatch, "fit_lasso: inconsistent dimensions");

  const Dataset work = opts.center ? centered(data) : data;
  const auto norms = squared_column_norms(work.x);

  LassoFit fit;
  fit.lambda = lambda;
  fit.beta_hat = warm_start;
  fit.residuals = work.y - work.x * fit.beta_hat;
  const auto outcome = detail::coordinate_descent(work.x, norms, lambda, opts, -1,
                                                  kkt_tolerance(work), fit.beta_hat,
                                                  fit.residuals);
  fit.iterations = outcome.iterations;
  fit.converged = outcome.converged;
  fit.active_set = nonzero_indices(fit.beta_hat);
  return fit;
}

double kkt_residual(const LassoFit& fit, const Dataset& data, double lambda) {
  if (fit.beta_hat.size() != data.p() || data.y.size() != data.n())
    throw Error(ErrorKind::dimension_mismatch, "kkt_residual: fit does not match data");
  const Vector resid = data.y - data.x * fit.beta_hat;
  return detail::kkt_residual(data.x, fit.beta_hat, resid, lambda, -1);
}

std::vector<Index> lasso_path_ranking(const Dataset& data, int grid_size,
                                      const SolverOptions& opts) {
  if (grid_size < 2) throw Error(ErrorKind::config, "path grid_size must be >= 2");
  const Index p = data.p();
  const double top = lambda_max(data);

  std::vector<int> entry_step(static_cast<std::size_t>(p), grid_size);
  std::vector<double> entry_size(static_cast<std::size_t>(p), 0.0);

  if (top > 0.0) {
    Vector beta = Vector::Zero(p);
    for (int k = 0; k < grid_size; ++k) {
      const double frac = static_cast<double>(k) / static_cast<double>(grid_size - 1);
      const double lambda = top * std::pow(1e-3, frac);
      const LassoFit fit = fit_lasso(data, lambda, opts, beta);
      beta = fit.beta_hat;
      for (Index j : fit.active_set) {
        if (entry_step[j] == grid_size) {
          entry_step[j] = k;
          entry_size[j] = std::abs(beta[j]);
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (entry_step[a] != entry_step[b]) return entry_step[a] < entry_step[b];
    return entry_size[a] > entry_size[b];
  });
  return order;
}

CvResult cv_lambda(const Dataset& data, int folds, int grid_size, double min_ratio,
                   const SolverOptions& opts) {
  if (folds < 2 || folds > data.n()) throw Error(ErrorKind::config, "cv folds must lie in [2, n]");
  if (grid_size < 2) throw Error(ErrorKind::config, "cv grid_size must be >= 2");
  if (!(min_ratio > 0.0 && min_ratio < 1.0))
    throw Error(ErrorKind::config, "cv min_ratio must lie in (0, 1)");
  const double top = lambda_max(data);
  if (!(top > 0.0)) throw Error(ErrorKind::invalid_data, "response is orthogonal to every predictor");

  CvResult out;
  for (int k = 0; k < grid_size; ++k)
    out.grid.push_back(top * std::pow(min_ratio, static_cast<double>(k) / (grid_size - 1)));
  out.cv_error.assign(out.grid.size(), 0.0);

  const Index n = data.n();
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) (i % folds == f ? test : train).push_back(i);
    Dataset fold{data.x(train, Eigen::all), data.y(train)};
    const Matrix x_test = data.x(test, Eigen::all);
    const Vector y_test = data.y(test);
    Vector beta = Vector::Zero(data.p());
    for (std::size_t k = 0; k < out.grid.size(); ++k) {
      beta = fit_lasso(fold, out.grid[k], opts, beta).beta_hat;
      out.cv_error[k] += (y_test - x_test * beta).squaredNorm() / static_cast<double>(n);
    }
  }
  const auto best = std::min_element(out.cv_error.begin(), out.cv_error.end());
  out.lambda = out.grid[static_cast<std::size_t>(best - out.cv_error.begin())];
  return out;
}

}  // namespace dlfdp
