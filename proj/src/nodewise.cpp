#include "dlfdp/nodewise.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace dlfdp {

namespace {

struct ColumnWork {
  Vector beta;  // length p, entry j pinned at zero
  Vector resid;
  detail::CdOutcome outcome;
};

ColumnWork solve_column(const Matrix& x, std::span<const double> norms, Index j,
                        double lambda_j, const SolverOptions& opts) {
  const double n = static_cast<double>(x.rows());
  ColumnWork w;
  w.beta = Vector::Zero(x.cols());
  w.resid = x.col(j);
  const double kkt_tol =
      1e-5 * std::max(1.0, (x.transpose() * w.resid).lpNorm<Eigen::Infinity>() / n);
  w.outcome = detail::coordinate_descent(x, norms, lambda_j, opts, j, kkt_tol, w.beta, w.resid);
  return w;
}

NodewiseColumnFit to_column_fit(const ColumnWork& w, Index j, double lambda_j,
                                double tau_penalty_factor) {
  const Index p = w.beta.size();
  NodewiseColumnFit fit;
  fit.j = j;
  fit.lambda_j = lambda_j;
  fit.gamma_hat.resize(p - 1);
  fit.gamma_hat.head(j) = w.beta.head(j);
  fit.gamma_hat.tail(p - 1 - j) = w.beta.tail(p - 1 - j);
  fit.tau_sq = w.resid.squaredNorm() / static_cast<double>(w.resid.size()) +
               tau_penalty_factor * lambda_j * fit.gamma_hat.lpNorm<1>();
  fit.iterations = w.outcome.iterations;
  fit.converged = w.outcome.converged;
  if (!(fit.tau_sq > kDegenerateTauSq)) {
    throw Error(ErrorKind::degenerate_column,
                "nodewise regression reproduces column " + std::to_string(j + 1) +
                    " (tau^2 = " + std::to_string(fit.tau_sq) + ")",
                j);
  }
  return fit;
}

std::vector<double> squared_column_norms(const Matrix& gram_matrix) {
  std::vector<double> norms(static_cast<std::size_t>(gram_matrix.cols()));
  for (Index j = 0; j < gram_matrix.cols(); ++j) norms[j] = gram_matrix(j, j);
  return norms;
}

}  // namespace

Matrix gram(const Dataset& data) {
  if (!data.x.allFinite()) throw Error(ErrorKind::invalid_data, "design has non-finite entries");
  const Index p = data.p();
  Matrix g = Matrix::Zero(p, p);
  g.selfadjointView<Eigen::Lower>().rankUpdate(data.x.transpose(),
                                               1.0 / static_cast<double>(data.n()));
  return g.selfadjointView<Eigen::Lower>();
}

double nodewise_lambda(Index n, Index p, double kappa) {
  if (p < 2 || n < 1) {
    throw Error(ErrorKind::invalid_dimension,
                "nodewise_lambda needs n >= 1 and p >= 2, got n=" + std::to_string(n) +
                    " p=" + std::to_string(p));
  }
  return kappa * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

NodewiseColumnFit fit_nodewise_column(const Dataset& data, Index j, double lambda_j,
                                      const SolverOptions& opts, double tau_penalty_factor) {
  opts.validate();
  if (!(tau_penalty_factor >= 0.0))
    throw Error(ErrorKind::config, "tau_penalty_factor must be nonnegative");
  if (j < 0 || j >= data.p())
    throw Error(ErrorKind::dimension_mismatch, "column index out of range", j);
  if (!(lambda_j > 0.0)) throw Error(ErrorKind::config, "lambda_j must be positive");
  const Matrix& x = data.x;
  std::vector<double> norms(static_cast<std::size_t>(x.cols()));
  for (Index k = 0; k < x.cols(); ++k)
    norms[k] = x.col(k).squaredNorm() / static_cast<double>(x.rows());
  return to_column_fit(solve_column(x, norms, j, lambda_j, opts), j, lambda_j,
                       tau_penalty_factor);
}

PrecisionFit build_precision(const Dataset& data, const PrecisionOptions& opts) {
  opts.solver.validate();
  if (!(opts.kappa > 0.0)) throw Error(ErrorKind::config, "kappa must be positive");
  if (!(opts.tau_penalty_factor >= 0.0))
    throw Error(ErrorKind::config, "tau_penalty_factor must be nonnegative");
  const Index n = data.n();
  const Index p = data.p();

  PrecisionFit out;
  out.kappa = opts.kappa;
  out.sigma_hat_gram = gram(data);
  const auto norms = squared_column_norms(out.sigma_hat_gram);
  const double base_lambda = nodewise_lambda(n, p, opts.kappa);

  std::vector<ColumnWork> work(static_cast<std::size_t>(p));
  std::vector<double> lambdas(static_cast<std::size_t>(p), base_lambda);
  if (opts.scale_lambda_by_column)
    for (Index j = 0; j < p; ++j) lambdas[j] *= std::sqrt(norms[j]);

  if (opts.policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (Index j = 0; j < p; ++j)
      work[j] = solve_column(data.x, norms, j, lambdas[j], opts.solver);
  } else {
    for (Index j = 0; j < p; ++j)
      work[j] = solve_column(data.x, norms, j, lambdas[j], opts.solver);
  }

  out.column_fits.reserve(static_cast<std::size_t>(p));
  out.theta_hat.resize(p, p);
  for (Index j = 0; j < p; ++j) {
    out.column_fits.push_back(to_column_fit(work[j], j, lambdas[j], opts.tau_penalty_factor));
    const double inv_tau_sq = 1.0 / out.column_fits.back().tau_sq;
    out.theta_hat.row(j) = -inv_tau_sq * work[j].beta.transpose();
    out.theta_hat(j, j) = inv_tau_sq;
  }

  const Matrix omega = out.theta_hat * out.sigma_hat_gram * out.theta_hat.transpose();
  out.omega_hat = 0.5 * (omega + omega.transpose());
  return out;
}

void write_theta_csv(std::ostream& out, const Matrix& theta) {
  out << std::setprecision(17);
  for (Index i = 0; i < theta.rows(); ++i) {
    for (Index j = 0; j < theta.cols(); ++j) {
      if (j) out << ',';
      out << theta(i, j);
    }
    out << '\n';
  }
}

Matrix read_theta_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorKind::parse, "theta csv line " + std::to_string(rows.size() + 1) +
                                          ": non-numeric entry '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const auto p = static_cast<Index>(rows.size());
  Matrix theta(p, p);
  for (Index i = 0; i < p; ++i) {
    if (static_cast<Index>(rows[i].size()) != p)
      throw Error(ErrorKind::parse, "theta csv line " + std::to_string(i + 1) +
                                        ": expected " + std::to_string(p) + " entries");
    for (Index j = 0; j < p; ++j) theta(i, j) = rows[i][j];
  }
  return theta;
}

}  // namespace dlfdp
