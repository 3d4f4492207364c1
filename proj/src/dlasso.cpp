#include "dlfdp/dlasso.hpp"

#include <cmath>
#include <sstream>

namespace dlfdp {

SigmaMode SigmaMode::parse(const std::string& text) {
  if (text == "estimate") return residual_df();
  if (text == "scaled") return scaled();
  if (text == "residual") return residual();
  constexpr std::string_view prefix = "known:";
  if (text.rfind(prefix, 0) == 0) {
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(text.substr(prefix.size()), &used);
      if (used != text.size() - prefix.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, "sigma mode '" + text + "': value is not a number");
    }
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorKind::config, "sigma mode '" + text + "': sigma must be positive");
    return known(v);
  }
  throw Error(ErrorKind::config,
              "sigma mode must be 'known:<v>', 'estimate', 'residual' or 'scaled', got '" +
                  text + "'");
}

std::string SigmaMode::to_string() const {
  if (kind == Kind::residual_df) return "estimate";
  if (kind == Kind::scaled) return "scaled";
  if (kind == Kind::residual) return "residual";
  std::ostringstream os;
  os.precision(17);
  os << "known:" << value;
  return os.str();
}

Vector debias(const Vector& beta_lasso, const PrecisionFit& precision, const Dataset& data) {
  const Index p = data.p();
  if (beta_lasso.size() != p || precision.theta_hat.rows() != p ||
      precision.theta_hat.cols() != p || data.y.size() != data.n())
    throw Error(ErrorKind::dimension_mismatch, "debias: dimensions disagree");
  const Vector resid = data.y - data.x * beta_lasso;
  const Vector score = data.x.transpose() * resid / static_cast<double>(data.n());
  Vector b = beta_lasso + precision.theta_hat * score;
  for (Index j = 0; j < p; ++j)
    if (!std::isfinite(b[j]))
      throw Error(ErrorKind::non_finite,
                  "debiased estimate is non-finite at predictor " + std::to_string(j + 1), j);
  return b;
}

double estimate_sigma(const Dataset& data, const LassoFit& fit, SigmaMode mode) {
  if (mode.kind == SigmaMode::Kind::known) {
    if (!(mode.value > 0.0) || !std::isfinite(mode.value))
      throw Error(ErrorKind::config, "known sigma must be positive");
    return mode.value;
  }
  if (mode.kind == SigmaMode::Kind::scaled)
    throw Error(ErrorKind::config, "scaled noise estimates come from scaled_lasso");
  const auto active = mode.kind == SigmaMode::Kind::residual
                          ? Index{0}
                          : static_cast<Index>(fit.active_set.size());
  if (active >= data.n()) {
    throw Error(ErrorKind::saturated_model,
                "active set has " + std::to_string(active) + " predictors for n=" +
                    std::to_string(data.n()) + " observations");
  }
  const Vector resid = data.y - data.x * fit.beta_hat;
  const double sigma = std::sqrt(resid.squaredNorm() / static_cast<double>(data.n() - active));
  if (!std::isfinite(sigma) || sigma <= 1e-12)
    throw Error(ErrorKind::degenerate_sigma, "residual noise estimate is zero or non-finite");
  return sigma;
}

namespace {

double response_sd(const Dataset& data) {
  const double mean = data.y.mean();
  const double sd = std::sqrt((data.y.array() - mean).square().sum() /
                              static_cast<double>(data.n() - 1));
  if (!(sd > 0.0)) throw Error(ErrorKind::degenerate_sigma, "response is constant");
  return sd;
}

}  // namespace

ScaledLassoFit scaled_lasso(const Dataset& data, const SolverOptions& solver, double lambda0,
                            int max_iterations, bool standardize) {
  const double n = static_cast<double>(data.n());
  if (lambda0 <= 0.0) lambda0 = std::sqrt(2.0 * std::log(static_cast<double>(data.p())) / n);
  Vector scale = Vector::Ones(data.p());
  Dataset work = data;
  if (standardize) {
    for (Index j = 0; j < data.p(); ++j) {
      const double rms = data.x.col(j).norm() / std::sqrt(n);
      if (!(rms > 0.0))
        throw Error(ErrorKind::degenerate_column, "column " + std::to_string(j + 1) + " is zero", j);
      scale[j] = rms;
      work.x.col(j) /= rms;
    }
  }
  ScaledLassoFit out;
  out.sigma = response_sd(data);
  Vector warm = Vector::Zero(data.p());
  for (int it = 0; it < max_iterations; ++it) {
    out.fit = fit_lasso(work, lambda0 * out.sigma, solver, warm);
    warm = out.fit.beta_hat;
    out.iterations = it + 1;
    const double next = out.fit.residuals.norm() / std::sqrt(n);
    if (!std::isfinite(next) || next <= 1e-12)
      throw Error(ErrorKind::degenerate_sigma, "scaled Lasso noise estimate collapsed to zero");
    const bool settled = std::abs(next - out.sigma) <= 1e-8 * out.sigma;
    out.sigma = next;
    if (settled) break;
  }
  out.fit.beta_hat = out.fit.beta_hat.cwiseQuotient(scale);
  return out;
}

Vector standardize(const Vector& b_hat, const PrecisionFit& precision, double sigma, Index n) {
  const Vector diag = precision.omega_hat.diagonal();
  if (diag.size() != b_hat.size())
    throw Error(ErrorKind::dimension_mismatch, "standardize: dimensions disagree");
  if (!(sigma > 0.0)) throw Error(ErrorKind::config, "sigma must be positive");
  const double root_n = std::sqrt(static_cast<double>(n));
  Vector z(b_hat.size());
  for (Index j = 0; j < b_hat.size(); ++j) {
    if (!(diag[j] > 0.0))
      throw Error(ErrorKind::invalid_precision,
                  "Omega diagonal is not positive at predictor " + std::to_string(j + 1), j);
    z[j] = root_n * b_hat[j] / (sigma * std::sqrt(diag[j]));
  }
  return z;
}

DeltaDiagnostic delta_diagnostic(const PrecisionFit& precision, const Vector& beta_lasso,
                                 const Vector& beta_true, Index n) {
  const Index p = precision.theta_hat.rows();
  if (beta_lasso.size() != p || beta_true.size() != p)
    throw Error(ErrorKind::dimension_mismatch, "delta_diagnostic: dimensions disagree");
  const Matrix m = precision.theta_hat * precision.sigma_hat_gram - Matrix::Identity(p, p);
  DeltaDiagnostic out;
  out.delta = std::sqrt(static_cast<double>(n)) * (m * (beta_lasso - beta_true));
  out.delta_inf = out.delta.lpNorm<Eigen::Infinity>();
  return out;
}

double noise_level(const Dataset& data, const DLassoResult& result, SigmaMode mode,
                   const SolverOptions& solver) {
  if (mode.kind == SigmaMode::Kind::scaled) return scaled_lasso(data, solver).sigma;
  LassoFit fit;
  fit.beta_hat = result.beta_lasso;
  for (Index j = 0; j < fit.beta_hat.size(); ++j)
    if (fit.beta_hat[j] != 0.0) fit.active_set.push_back(j);
  return estimate_sigma(data, fit, mode);
}

DLassoResult run_dlasso(const Dataset& data, const PrecisionFit& precision,
                        const DLassoOptions& opts) {
  if (!(opts.lambda_scale > 0.0)) throw Error(ErrorKind::config, "lambda_scale must be positive");
  const Index n = data.n();
  const Index p = data.p();

  DLassoResult out;
  LassoFit fit;
  if (opts.lambda_rule == LambdaRule::cv) {
    out.lambda = cv_lambda(data, opts.cv_folds, 100, p > n ? 0.01 : 1e-4, opts.solver).lambda;
    fit = fit_lasso(data, out.lambda, opts.solver);
    out.sigma_used = opts.sigma.kind == SigmaMode::Kind::scaled
                         ? scaled_lasso(data, opts.solver).sigma
                         : estimate_sigma(data, fit, opts.sigma);
  } else if (opts.sigma.kind == SigmaMode::Kind::scaled) {
    ScaledLassoFit sl = scaled_lasso(data, opts.solver);
    out.lambda = sl.fit.lambda;
    out.sigma_used = sl.sigma;
    fit = std::move(sl.fit);
  } else if (opts.sigma.kind == SigmaMode::Kind::known) {
    out.sigma_used = estimate_sigma(data, fit, opts.sigma);
    out.lambda = default_lambda(n, p, out.sigma_used, opts.lambda_scale);
    fit = fit_lasso(data, out.lambda, opts.solver);
  } else {
    // Alternate lambda(sigma) and the residual estimate, starting from sd(y).
    double sigma = response_sd(data);
    Vector warm = Vector::Zero(p);
    for (int it = 0; it < opts.max_sigma_iterations; ++it) {
      out.lambda = default_lambda(n, p, sigma, opts.lambda_scale);
      fit = fit_lasso(data, out.lambda, opts.solver, warm);
      warm = fit.beta_hat;
      const double next = estimate_sigma(data, fit, opts.sigma);
      const bool settled = std::abs(next - sigma) <= 1e-6 * sigma;
      sigma = next;
      if (settled) break;
    }
    out.sigma_used = sigma;
  }

  out.lasso_converged = fit.converged;
  out.beta_lasso = fit.beta_hat;
  out.b_hat = debias(fit.beta_hat, precision, data);
  out.omega_diag = precision.omega_hat.diagonal();
  out.z = standardize(out.b_hat, precision, out.sigma_used, n);
  return out;
}

}  // namespace dlfdp
