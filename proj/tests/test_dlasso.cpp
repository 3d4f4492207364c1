#include "doctest.h"

#include "dlfdp/dlasso.hpp"
#include "dlfdp/simgen.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace dlfdp;
using dlfdp::testing::random_dataset;

namespace {

// Precision fit whose theta is the exact inverse of the sample Gram matrix.
PrecisionFit exact_inverse_precision(const Dataset& d) {
  PrecisionFit fit;
  fit.sigma_hat_gram = d.x.transpose() * d.x / static_cast<double>(d.n());
  fit.theta_hat = fit.sigma_hat_gram.inverse();
  fit.omega_hat = fit.theta_hat * fit.sigma_hat_gram * fit.theta_hat.transpose();
  fit.omega_hat = (0.5 * (fit.omega_hat + fit.omega_hat.transpose())).eval();
  return fit;
}

}  // namespace

TEST_CASE("debias matches an explicit loop") {
  const Dataset d = random_dataset(40, 12, 3, 1.0, 1.0, 6);
  const PrecisionFit prec = build_precision(d, PrecisionOptions{});
  const LassoFit fit = fit_lasso(d, 0.2);
  const Vector b = debias(fit.beta_hat, prec, d);
  for (Index j = 0; j < 12; ++j) {
    double corr = 0.0;
    for (Index k = 0; k < 12; ++k) {
      double score = 0.0;
      for (Index i = 0; i < 40; ++i) {
        double r = d.y[i];
        for (Index m = 0; m < 12; ++m) r -= d.x(i, m) * fit.beta_hat[m];
        score += d.x(i, k) * r;
      }
      corr += prec.theta_hat(j, k) * score / 40.0;
    }
    CHECK(b[j] == doctest::Approx(fit.beta_hat[j] + corr).epsilon(1e-10));
  }
}

TEST_CASE("exact inverse turns the debiased estimate into least squares") {
  const Dataset d = random_dataset(80, 10, 4, 1.0, 1.0, 8);
  const PrecisionFit prec = exact_inverse_precision(d);
  const Vector ols = (d.x.transpose() * d.x).ldlt().solve(d.x.transpose() * d.y);
  for (double lambda : {0.01, 0.1, 0.5}) {
    const Vector b = debias(fit_lasso(d, lambda).beta_hat, prec, d);
    CHECK((b - ols).lpNorm<Eigen::Infinity>() < 1e-8);
  }
  const DeltaDiagnostic delta = delta_diagnostic(prec, Vector::Ones(10), Vector::Zero(10), 80);
  CHECK(delta.delta_inf < 1e-9);
}

TEST_CASE("standardize") {
  PrecisionFit prec;
  prec.omega_hat = Vector::Constant(3, 4.0).asDiagonal();
  Vector b(3);
  b << 1.0, -2.0, 0.0;
  const Vector z = standardize(b, prec, 0.5, 100);
  CHECK(z[0] == doctest::Approx(10.0));
  CHECK(z[1] == doctest::Approx(-20.0));
  CHECK(z[2] == 0.0);

  prec.omega_hat(1, 1) = 0.0;
  try {
    standardize(b, prec, 1.0, 100);
    FAIL("expected invalid_precision");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_precision);
    CHECK(*e.index() == 1);
  }
}

TEST_CASE("sigma modes parse and print") {
  CHECK(SigmaMode::parse("estimate").kind == SigmaMode::Kind::residual_df);
  CHECK(SigmaMode::parse("residual").kind == SigmaMode::Kind::residual);
  CHECK(SigmaMode::parse("scaled").kind == SigmaMode::Kind::scaled);
  const SigmaMode k = SigmaMode::parse("known:1.5");
  CHECK(k.kind == SigmaMode::Kind::known);
  CHECK(k.value == 1.5);
  for (const char* text : {"estimate", "residual", "scaled", "known:0.25"})
    CHECK(SigmaMode::parse(text).to_string() == text);
  CHECK_THROWS_AS(SigmaMode::parse("known:"), Error);
  CHECK_THROWS_AS(SigmaMode::parse("known:-1"), Error);
  CHECK_THROWS_AS(SigmaMode::parse("known:1x"), Error);
  CHECK_THROWS_AS(SigmaMode::parse("guess"), Error);
}

TEST_CASE("residual noise estimates") {
  const Dataset d = random_dataset(60, 20, 3, 1.0, 1.0, 2);
  const LassoFit fit = fit_lasso(d, 0.1);
  const double rss = (d.y - d.x * fit.beta_hat).squaredNorm();
  const double active = static_cast<double>(fit.active_set.size());
  CHECK(estimate_sigma(d, fit, SigmaMode::residual_df()) ==
        doctest::Approx(std::sqrt(rss / (60.0 - active))));
  CHECK(estimate_sigma(d, fit, SigmaMode::residual()) == doctest::Approx(std::sqrt(rss / 60.0)));
  CHECK(estimate_sigma(d, fit, SigmaMode::known(3.0)) == 3.0);
  CHECK_THROWS_AS(estimate_sigma(d, fit, SigmaMode::scaled()), Error);
}

TEST_CASE("saturated and degenerate noise estimates") {
  const Dataset wide = random_dataset(10, 40, 3, 1.0, 1.0, 3);
  const LassoFit dense = fit_lasso(wide, 1e-4);
  REQUIRE(static_cast<Index>(dense.active_set.size()) >= 10);
  try {
    estimate_sigma(wide, dense, SigmaMode::residual_df());
    FAIL("expected saturated_model");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::saturated_model);
  }

  Dataset exact = random_dataset(30, 4, 0, 0.0, 0.0, 3);
  exact.y = exact.x.col(0);
  LassoFit perfect;
  perfect.beta_hat = Vector::Unit(4, 0);
  perfect.active_set = {0};
  try {
    estimate_sigma(exact, perfect, SigmaMode::residual_df());
    FAIL("expected degenerate_sigma");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_sigma);
  }
}

TEST_CASE("scaled Lasso is a fixed point and tracks sigma") {
  const Dataset d = random_dataset(400, 20, 3, 1.0, 2.0, 5);
  const ScaledLassoFit sl = scaled_lasso(d, SolverOptions{1e-10, 100000, false});
  const double resid = (d.y - d.x * sl.fit.beta_hat).norm() / std::sqrt(400.0);
  CHECK(sl.sigma == doctest::Approx(resid).epsilon(1e-6));
  CHECK(sl.sigma > 1.6);
  CHECK(sl.sigma < 2.4);
}

TEST_CASE("run_dlasso with known sigma uses the theory lambda") {
  const Dataset d = random_dataset(100, 50, 5, 1.0, 1.0, 7);
  const PrecisionFit prec = build_precision(d, PrecisionOptions{});
  DLassoOptions opts;
  opts.sigma = SigmaMode::known(1.0);
  opts.lambda_scale = 0.5;
  const DLassoResult r = run_dlasso(d, prec, opts);
  CHECK(r.lambda == doctest::Approx(0.5 * std::sqrt(std::log(50.0) / 100.0)));
  CHECK(r.sigma_used == 1.0);
  CHECK(r.lasso_converged);
  const Vector z = standardize(debias(r.beta_lasso, prec, d), prec, 1.0, 100);
  CHECK((z - r.z).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("estimated sigma is a fixed point of lambda(sigma)") {
  const Dataset d = random_dataset(120, 60, 5, 1.0, 1.0, 9);
  const PrecisionFit prec = build_precision(d, PrecisionOptions{});
  DLassoOptions opts;
  opts.lambda_scale = 0.5;
  const DLassoResult r = run_dlasso(d, prec, opts);
  CHECK(r.lambda == doctest::Approx(0.5 * r.sigma_used * std::sqrt(std::log(60.0) / 120.0)).epsilon(1e-5));
  CHECK(r.sigma_used > 0.6);
  CHECK(r.sigma_used < 1.4);
}

TEST_CASE("z is invariant to rescaling y when sigma is estimated") {
  const Dataset d = random_dataset(120, 60, 5, 1.0, 1.0, 10);
  const PrecisionFit prec = build_precision(d, PrecisionOptions{});
  DLassoOptions opts;
  opts.lambda_scale = 0.5;
  opts.solver = SolverOptions{1e-12, 100000, false};
  const DLassoResult a = run_dlasso(d, prec, opts);
  const Dataset scaled{d.x, 7.0 * d.y};
  const DLassoResult b = run_dlasso(scaled, prec, opts);
  CHECK(b.sigma_used == doctest::Approx(7.0 * a.sigma_used).epsilon(1e-5));
  CHECK((a.z - b.z).lpNorm<Eigen::Infinity>() < 1e-3);
}

TEST_CASE("noise_level for baseline plug-ins") {
  const Dataset d = random_dataset(100, 40, 4, 1.0, 1.0, 11);
  const PrecisionFit prec = build_precision(d, PrecisionOptions{});
  DLassoOptions opts;
  opts.lambda_scale = 0.5;
  const DLassoResult r = run_dlasso(d, prec, opts);
  CHECK(noise_level(d, r, SigmaMode::residual_df()) == doctest::Approx(r.sigma_used).epsilon(1e-5));
  CHECK(noise_level(d, r, SigmaMode::residual()) < r.sigma_used);
  CHECK(noise_level(d, r, SigmaMode::known(2.0)) == 2.0);
}

TEST_CASE("non-finite debiased estimate names the coordinate") {
  const Dataset d = random_dataset(30, 5, 1, 1.0, 1.0, 12);
  PrecisionFit prec = exact_inverse_precision(d);
  prec.theta_hat(3, 0) = INFINITY;
  try {
    debias(Vector::Zero(5), prec, d);
    FAIL("expected non_finite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_finite);
    CHECK(*e.index() == 3);
  }
}
