#include "dlfdp/simgen.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <numeric>
#include <vector>

namespace dlfdp {

void ModelTruth::index_support() {
  support.clear();
  nulls.clear();
  for (Index j = 0; j < beta.size(); ++j) (beta[j] != 0.0 ? support : nulls).push_back(j);
}

Rng make_stream(std::uint64_t seed, std::uint64_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32),
                    0x64666470u};
  return Rng(seq);
}

std::string_view to_string(SignMode mode) {
  return mode == SignMode::positive ? "positive" : "random";
}

SignMode parse_sign_mode(const std::string& text) {
  if (text == "positive") return SignMode::positive;
  if (text == "random") return SignMode::random;
  throw Error(ErrorKind::config, "sign_mode must be 'positive' or 'random', got '" + text + "'");
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
  if (p < 2) fail("p must be >= 2");
  if (n < 2) fail("n must be >= 2");
  if (s0 < 0 || s0 > p) fail("s0 must lie in [0, p]");
  if (s0 > 0 && beta1 == 0.0) fail("beta1 must be nonzero when s0 > 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail("sigma must be >= 0");
  if (!(edge_prob >= 0.0 && edge_prob < 1.0)) fail("edge_prob must lie in [0, 1)");
  if (!(magnitude_low >= 0.0 && magnitude_low < magnitude_high))
    fail("magnitude range must satisfy 0 <= low < high");
  if (!(spd_eps > 0.0)) fail("spd_eps must be positive");
  if (reps < 1) fail("reps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
}

Index max_row_sparsity(const Matrix& m) {
  Index best = 0;
  for (Index i = 0; i < m.rows(); ++i) {
    Index count = 0;
    for (Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) ++count;
    best = std::max(best, count);
  }
  return best;
}

namespace {

bool try_precision(Index p, const SimConfig& cfg, Rng& rng, PrecisionPair& out) {
  boost::random::binomial_distribution<Index> degree_dist(p, cfg.edge_prob);
  boost::random::uniform_real_distribution<double> magnitude(cfg.magnitude_low, cfg.magnitude_high);
  boost::random::bernoulli_distribution<> coin(0.5);

  Matrix b = Matrix::Zero(p, p);
  const Index shared_degree = std::min(degree_dist(rng), p - 1);
  out.degree = cfg.per_row_degree ? 0 : shared_degree;
  std::vector<Index> candidates(static_cast<std::size_t>(p - 1));
  for (Index i = 0; i < p; ++i) {
    Index degree = shared_degree;
    if (cfg.per_row_degree) {
      degree = std::min(degree_dist(rng), p - 1);
      out.degree = std::max(out.degree, degree);
    }
    // Partial Fisher-Yates over the off-diagonal positions of row i.
    std::iota(candidates.begin(), candidates.begin() + i, Index{0});
    std::iota(candidates.begin() + i, candidates.end(), i + 1);
    for (Index k = 0; k < degree; ++k) {
      boost::random::uniform_int_distribution<Index> pick(k, p - 2);
      std::swap(candidates[k], candidates[pick(rng)]);
      double v = magnitude(rng);
      if (cfg.sign_mode == SignMode::random && coin(rng)) v = -v;
      b(i, candidates[k]) = v;
    }
  }
  b = (0.5 * (b + b.transpose())).eval();
  b.diagonal().setOnes();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(b, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return false;
  const double lambda_min = eig.eigenvalues().minCoeff();
  if (!std::isfinite(lambda_min)) return false;
  if (lambda_min < cfg.spd_eps) b.diagonal().array() += cfg.spd_eps - lambda_min;

  if (cfg.unit_diagonal) {
    const Vector inv_root = b.diagonal().array().rsqrt();
    out.theta = inv_root.asDiagonal() * b * inv_root.asDiagonal();
    out.theta = (0.5 * (out.theta + out.theta.transpose())).eval();
    out.theta.diagonal().setOnes();
  } else {
    out.theta = std::move(b);
  }

  Eigen::LLT<Matrix> llt(out.theta);
  if (llt.info() != Eigen::Success) return false;
  out.sigma = llt.solve(Matrix::Identity(p, p));
  out.sigma = (0.5 * (out.sigma + out.sigma.transpose())).eval();
  return out.sigma.allFinite();
}

}  // namespace

PrecisionPair gen_precision_er(Index p, const SimConfig& cfg, Rng& rng) {
  if (p < 1) throw Error(ErrorKind::invalid_dimension, "p must be positive");
  PrecisionPair out;
  for (int attempt = 0; attempt < 5; ++attempt)
    if (try_precision(p, cfg, rng, out)) return out;
  throw Error(ErrorKind::generation, "precision matrix generation failed after 5 attempts");
}

Matrix sample_design(Index n, const Matrix& sigma, Rng& rng) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::generation, "covariance is not positive definite");
  const Index p = sigma.rows();
  boost::random::normal_distribution<double> normal;
  Matrix g(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) g(i, j) = normal(rng);
  return g * llt.matrixL().transpose();
}

std::pair<Dataset, ModelTruth> gen_dataset(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  ModelTruth truth;
  auto pair = gen_precision_er(cfg.p, cfg, rng);
  truth.theta = std::move(pair.theta);
  truth.sigma_cov = std::move(pair.sigma);
  truth.s_max = max_row_sparsity(truth.theta);
  truth.sigma = cfg.sigma;
  truth.noiseless = cfg.sigma == 0.0;
  truth.beta = Vector::Zero(cfg.p);
  truth.beta.head(cfg.s0).setConstant(cfg.beta1);
  truth.index_support();

  Matrix x = sample_design(cfg.n, truth.sigma_cov, rng);
  boost::random::normal_distribution<double> normal;
  Vector eps(cfg.n);
  for (Index i = 0; i < cfg.n; ++i) eps[i] = normal(rng);
  Vector y = x * truth.beta + cfg.sigma * eps;
  return {Dataset::make(std::move(x), std::move(y)), std::move(truth)};
}

std::pair<Dataset, ModelTruth> gen_replication(const SimConfig& cfg, std::uint64_t rep) {
  Rng rng = make_stream(cfg.seed, rep);
  return gen_dataset(cfg, rng);
}

}  // namespace dlfdp
