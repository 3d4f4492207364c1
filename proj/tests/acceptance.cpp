// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails. Simulation criteria use 100 replications at
// p = 200 with the calibrated experiment defaults.

#include "dlfdp/bench.hpp"
#include "test_util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace dlfdp;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s [%s]\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ExperimentConfig table_config(Index n, double beta1, Index s0, bool rankings) {
  ExperimentConfig cfg;
  cfg.sim.p = 200;
  cfg.sim.n = n;
  cfg.sim.s0 = s0;
  cfg.sim.beta1 = beta1;
  cfg.sim.reps = 100;
  cfg.sim.seed = 1;
  cfg.sim.alpha = 0.1;
  cfg.rankings = rankings;
  return cfg;
}

struct Row {
  double fdp[3];
  double tpp[3];
};

Row row_of(const ExperimentReport& r) {
  Row row{};
  for (std::size_t m = 0; m < 3; ++m) {
    row.fdp[m] = r.methods[m].mean_fdp;
    row.tpp[m] = r.methods[m].mean_tpp;
  }
  return row;
}

std::string row_text(const Row& r) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << "FDP fdp/bh/holm " << r.fdp[0] << '/' << r.fdp[1] << '/' << r.fdp[2]
     << ", TPP " << r.tpp[0] << '/' << r.tpp[1] << '/' << r.tpp[2];
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Smallest t on a 1e-4 grid with fdp_hat <= alpha, searched far enough into
// the tail that 2 p Phi(-t) <= alpha is reached.
double grid_threshold(const Vector& z, double alpha) {
  const double p = static_cast<double>(z.size());
  const double tail = -normal_quantile(alpha / (2.0 * p)) + 1e-3;
  for (long k = 0;; ++k) {
    const double t = 1e-4 * static_cast<double>(k);
    if (fdp_hat(z, t) <= alpha || t > tail) return t;
  }
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  std::printf("# acceptance: p = 200, 100 replications per configuration, alpha = 0.1, seed = 1\n");

  // s0 = 10 grid over n and beta1, plus one dense row with s0 = 30.
  std::map<std::pair<Index, double>, ExperimentReport> table1;
  for (Index n : {Index{100}, Index{150}}) {
    for (double beta1 : {0.5, 0.7, 1.0}) {
      const auto t0 = std::chrono::steady_clock::now();
      const bool rankings = (n == 100 && beta1 == 1.0);
      table1.emplace(std::make_pair(n, beta1), run_experiment(table_config(n, beta1, 10, rankings)));
      const Row r = row_of(table1.at({n, beta1}));
      std::printf("# n=%ld beta1=%.1f s0=10: %s (%.0f s)\n", static_cast<long>(n), beta1,
                  row_text(r).c_str(), seconds_since(t0));
    }
  }
  const auto t_dense = std::chrono::steady_clock::now();
  const ExperimentReport dense = run_experiment(table_config(150, 1.0, 30, false));
  std::printf("# n=150 beta1=1.0 s0=30: %s (%.0f s)\n", row_text(row_of(dense)).c_str(),
              seconds_since(t_dense));

  {
    const Row r = row_of(table1.at({150, 0.5}));
    const bool pass = std::abs(r.fdp[0] - 0.090) <= 0.05 && std::abs(r.tpp[0] - 0.832) <= 0.10;
    verdict(1, pass, "n=150 beta1=0.5 s0=10: FDP 0.090+-0.05, TPP 0.832+-0.10",
            fmt("FDP %.3f", r.fdp[0]) + fmt(", TPP %.3f", r.tpp[0]));
  }
  {
    const Row r = row_of(table1.at({150, 1.0}));
    const bool pass = std::abs(r.fdp[0] - 0.084) <= 0.05 && std::abs(r.tpp[0] - 0.983) <= 0.05;
    verdict(2, pass, "n=150 beta1=1 s0=10: FDP 0.084+-0.05, TPP 0.983+-0.05",
            fmt("FDP %.3f", r.fdp[0]) + fmt(", TPP %.3f", r.tpp[0]));
  }
  {
    const Row r = row_of(dense);
    const bool fdp_ok = std::abs(r.fdp[0] - 0.052) <= 0.06;
    const bool tpp_ok = std::abs(r.tpp[0] - 0.477) <= 0.15;
    verdict(3, fdp_ok && tpp_ok, "n=150 beta1=1 s0=30: FDP 0.052+-0.06, TPP 0.477+-0.15",
            fmt("FDP %.3f", r.fdp[0]) + (fdp_ok ? " ok" : " out of range") +
                fmt(", TPP %.3f", r.tpp[0]) + (tpp_ok ? " ok" : " out of range"));
  }
  {
    int ordered = 0;
    std::string detail;
    for (const auto& [key, report] : table1) {
      const Row r = row_of(report);
      const bool ok = r.fdp[1] > r.fdp[0] && r.fdp[0] > r.fdp[2];
      ordered += ok;
      if (!ok)
        detail += "violated at n=" + std::to_string(key.first) + fmt(" beta1=%.1f; ", key.second);
    }
    verdict(4, ordered == 6, "mean FDP(BH) > FDP(DLasso-FDP) > FDP(Holm) in all six s0=10 configurations",
            std::to_string(ordered) + "/6 rows ordered" + (detail.empty() ? "" : "; " + detail));
  }
  {
    const ExperimentReport& r = table1.at({150, 0.5});
    double worst = 0.0, worst_t = 0.0;
    int points = 0;
    for (const auto& row : r.calibration) {
      if (row.t < 2.5 - 1e-9 || row.t > 4.0 + 1e-9) continue;
      ++points;
      const double gap = std::abs(row.mean_fdp_hat - row.mean_fdp_true);
      if (gap > worst) {
        worst = gap;
        worst_t = row.t;
      }
    }
    verdict(5, points == 16 && worst <= 0.1,
            "|mean FDP-hat - mean true FDP| <= 0.1 for t in [2.5, 4.0] (n=150, beta1=0.5)",
            std::to_string(points) + " grid points, worst gap " + fmt("%.3f", worst) +
                fmt(" at t=%.1f", worst_t));
  }
  {
    const ExperimentReport& r = table1.at({100, 1.0});
    int at_or_below = 0;
    std::string curve;
    for (const auto& row : r.curves) {
      at_or_below += row.z_ranking <= row.lasso_path;
      curve += fmt("%.3f", row.z_ranking) + fmt("/%.3f ", row.lasso_path);
    }
    const int points = static_cast<int>(r.curves.size());
    verdict(6, points == 10 && at_or_below * 10 >= points * 9,
            "z-ranking FDP-TPP curve <= Lasso-path curve at >= 90% of levels (n=100, beta1=1)",
            std::to_string(at_or_below) + "/" + std::to_string(points) + " levels; z/path: " + curve);
  }

  // Criterion 7: Lasso optimality on converged fits and p = 2 brute force.
  {
    std::mt19937_64 rng(7);
    int fits = 0, bad_kkt = 0, brute_bad = 0;
    double worst_ratio = 0.0, worst_brute = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
      const Index n = 30 + 10 * (inst % 5), p = 10 + 20 * (inst % 4);
      const Dataset d = testing::random_dataset(n, p, 3, 1.0, 1.0, 1000 + inst);
      for (double frac : {0.05, 0.2, 0.5, 0.9}) {
        const double lambda = frac * lambda_max(d);
        const LassoFit fit = fit_lasso(d, lambda);
        if (!fit.converged) continue;
        ++fits;
        const double ratio = kkt_residual(fit, d, lambda) / kkt_tolerance(d);
        worst_ratio = std::max(worst_ratio, ratio);
        bad_kkt += ratio > 1.0;
      }
      // p = 2: exhaustive search of the objective over a grid refined twice.
      const Dataset d2 = testing::random_dataset(25, 2, 1, 1.0, 1.0, 2000 + inst);
      const double lambda2 = std::uniform_real_distribution<double>(0.02, 0.8)(rng) * lambda_max(d2);
      const LassoFit fit2 = fit_lasso(d2, lambda2);
      Vector best = Vector::Zero(2);
      double best_obj = lasso_objective(d2, best, lambda2);
      double half = 4.0;
      Vector centre = Vector::Zero(2);
      for (double step : {0.01, 1e-4, 1e-6}) {
        for (double a = centre[0] - half; a <= centre[0] + half + 1e-15; a += step)
          for (double b = centre[1] - half; b <= centre[1] + half + 1e-15; b += step) {
            Vector v(2);
            v << a, b;
            const double obj = lasso_objective(d2, v, lambda2);
            if (obj < best_obj) {
              best_obj = obj;
              best = v;
            }
          }
        centre = best;
        half = 2.0 * step;
        // Keep exact zeros reachable in the refined grids.
        for (Index k = 0; k < 2; ++k) {
          Vector v = best;
          v[k] = 0.0;
          if (lasso_objective(d2, v, lambda2) <= best_obj) {
            best_obj = lasso_objective(d2, v, lambda2);
            best = v;
            centre = v;
          }
        }
      }
      const double err = (fit2.beta_hat - best).lpNorm<Eigen::Infinity>();
      worst_brute = std::max(worst_brute, err);
      brute_bad += err > 1e-3;
    }
    verdict(7, bad_kkt == 0 && brute_bad == 0 && fits > 0,
            "Lasso KKT residual <= tolerance on converged fits; p=2 brute force within 1e-3",
            std::to_string(fits) + " fits, worst KKT/tol " + fmt("%.3g", worst_ratio) +
                ", 50 p=2 instances, worst |diff| " + fmt("%.2g", worst_brute));
  }

  // Criterion 8: nodewise KKT bound, for both tau normalizations.
  {
    int violations = 0;
    double worst_slack = -1e300;
    for (int inst = 0; inst < 20; ++inst) {
      SimConfig sc;
      sc.p = 40 + 10 * (inst % 3);
      sc.n = 60 + 20 * (inst % 4);
      sc.s0 = 3;
      sc.seed = 300 + inst;
      const Dataset d = gen_replication(sc, 0).first;
      for (double factor : {1.0, 2.0}) {
        PrecisionOptions opts;
        opts.kappa = 1.0;
        opts.tau_penalty_factor = factor;
        const PrecisionFit fit = build_precision(d, opts);
        const Index p = d.p();
        const Matrix m = fit.theta_hat * fit.sigma_hat_gram - Matrix::Identity(p, p);
        for (Index j = 0; j < p; ++j) {
          const auto& col = fit.column_fits[j];
          double off = 0.0;
          for (Index k = 0; k < p; ++k)
            if (k != j) off = std::max(off, std::abs(m(j, k)));
          // The diagonal is also checked for tau factor 1, where it vanishes.
          const double bound = col.lambda_j / col.tau_sq;
          const double slack = off - bound;
          worst_slack = std::max(worst_slack, slack);
          violations += slack > 1e-6;
          if (factor == 1.0) violations += std::abs(m(j, j)) > 1e-6;
        }
      }
    }
    verdict(8, violations == 0,
            "max_k!=j |(Theta Sigma_hat - I)_jk| <= lambda_j / tau_j^2 + 1e-6 on 20 instances (tau factor 1 and 2)",
            std::to_string(violations) + " violations, max(off - bound) " + fmt("%.3g", worst_slack));
  }

  // Criterion 9: threshold search against a dense grid.
  {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    int over_alpha = 0;
    for (int inst = 0; inst < 100; ++inst) {
      const Index p = 20 + 10 * (inst % 19);
      const Index s = static_cast<Index>(unif(rng) * 0.3 * static_cast<double>(p));
      const double shift = 1.0 + 4.0 * unif(rng);
      Vector z(p);
      for (Index j = 0; j < p; ++j) z[j] = gauss(rng) + (j < s ? shift : 0.0);
      const double alpha = 0.01 + 0.3 * unif(rng);
      const double t = find_threshold(z, alpha);
      worst = std::max(worst, std::abs(t - grid_threshold(z, alpha)));
      over_alpha += fdp_hat(z, t) > alpha;
    }
    verdict(9, worst <= 1e-3 && over_alpha == 0,
            "find_threshold within 1e-3 of a dense-grid oracle and fdp_hat(t_alpha) <= alpha (100 vectors)",
            "worst |diff| " + fmt("%.2g", worst) + ", " + std::to_string(over_alpha) +
                " cases with fdp_hat > alpha");
  }

  // Criterion 10: global null with identity covariance and known sigma.
  {
    ExperimentConfig cfg;
    cfg.sim.p = 50;
    cfg.sim.n = 200;
    cfg.sim.s0 = 0;
    cfg.sim.beta1 = 0.0;
    cfg.sim.edge_prob = 0.0;
    cfg.sim.seed = 10;
    cfg.estimate_sigma = false;
    cfg.rankings = false;
    const int reps = 200;
    Matrix zs(reps, 50);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r) {
      const Dataset d = gen_replication(cfg.sim, static_cast<std::uint64_t>(r)).first;
      zs.row(r) = run_pipeline(d, cfg, ExecPolicy::serial).dlasso.z.transpose();
    }
    const double mean = zs.mean();
    const double var = (zs.array() - mean).square().sum() / static_cast<double>(zs.size() - 1);
    const Eigen::RowVectorXd col_mean = zs.colwise().mean();
    const Eigen::RowVectorXd col_var =
        (zs.rowwise() - col_mean).array().square().colwise().sum() / static_cast<double>(reps - 1);
    const bool pass = std::abs(mean) <= 0.05 && var >= 0.85 && var <= 1.15;
    verdict(10, pass,
            "global null, Sigma=I, known sigma, n=200, p=50, 200 reps: z mean within +-0.05, variance in [0.85, 1.15]",
            "pooled mean " + fmt("%.4f", mean) + ", pooled variance " + fmt("%.4f", var) +
                "; per-coordinate means in [" + fmt("%.3f", col_mean.minCoeff()) + ", " +
                fmt("%.3f", col_mean.maxCoeff()) + "], variances in [" + fmt("%.3f", col_var.minCoeff()) +
                ", " + fmt("%.3f", col_var.maxCoeff()) + "]");
  }

  // Criterion 11: separation of relevant and irrelevant predictors.
  {
    ExperimentConfig cfg;
    cfg.sim.p = 100;
    cfg.sim.n = 300;
    cfg.sim.s0 = 5;
    cfg.sim.beta1 = 2.0;
    cfg.sim.sigma = 1.0;
    cfg.sim.seed = 11;
    const int reps = 100;
    std::vector<int> separated(reps, 0);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r) {
      const auto [d, truth] = gen_replication(cfg.sim, static_cast<std::uint64_t>(r));
      const Vector z = run_pipeline(d, cfg, ExecPolicy::serial).dlasso.z.cwiseAbs();
      double min_s = INFINITY, max_n = 0.0;
      for (Index j : truth.support) min_s = std::min(min_s, z[j]);
      for (Index j : truth.nulls) max_n = std::max(max_n, z[j]);
      separated[r] = min_s > max_n;
    }
    int count = 0;
    for (int s : separated) count += s;
    verdict(11, count >= 95, "min over S0 of |z| > max over I0 of |z| in >= 95% of 100 reps (n=300, p=100, s0=5, beta1=2)",
            std::to_string(count) + "/100 separated");
  }

  // Criterion 12: byte-identical reports.
  {
    ExperimentConfig cfg = table_config(100, 1.0, 10, true);
    cfg.sim.reps = 20;
    cfg.sim.seed = 12;
    const fs::path base = fs::temp_directory_path() / "dlfdp_acceptance_determinism";
    fs::remove_all(base);
    const auto a = write_report(run_experiment(cfg), base / "a");
    const auto b = write_report(run_experiment(cfg), base / "b");
    bool same = a.size() == b.size() && !a.empty();
    for (std::size_t i = 0; same && i < a.size(); ++i) same = slurp(a[i]) == slurp(b[i]);
    const auto c = write_report(run_experiment(cfg, ExecPolicy::serial), base / "c");
    bool serial_same = c.size() == a.size();
    for (std::size_t i = 0; serial_same && i < a.size(); ++i) serial_same = slurp(a[i]) == slurp(c[i]);
    verdict(12, same && serial_same, "re-running an experiment with the same config gives byte-identical reports",
            std::to_string(a.size()) + " files compared across two parallel runs and one serial run");
    fs::remove_all(base);
  }

  std::printf("# %d criteria failed; total %.0f s\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
