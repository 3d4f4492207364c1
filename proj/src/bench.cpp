#include "dlfdp/bench.hpp"

#include "dlfdp/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dlfdp {

namespace {

EvalMetrics metrics_for(const std::vector<Index>& selected, const ModelTruth& truth) {
  if (truth.s0() > 0) return evaluate(selected, truth);
  // Global null: every discovery is false and TPP is reported as 0.
  EvalMetrics m;
  m.discoveries = static_cast<Index>(selected.size());
  m.false_discoveries = m.discoveries;
  m.fdp = m.discoveries > 0 ? 1.0 : 0.0;
  return m;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string histogram_file_name(double t) {
  std::ostringstream os;
  os << "fdp_histogram_t" << t << ".csv";
  return os.str();
}

}  // namespace

std::vector<double> default_t_grid() {
  std::vector<double> grid;
  for (int i = 5; i <= 50; ++i) grid.push_back(i / 10.0);
  return grid;
}

SigmaMode ExperimentConfig::sigma_mode() const {
  return estimate_sigma ? SigmaMode::residual_df() : SigmaMode::known(sim.sigma);
}

void ExperimentConfig::validate() const {
  sim.validate();
  solver.validate();
  if (!(kappa > 0.0)) throw Error(ErrorKind::config, "kappa must be positive");
  if (!(lambda_scale > 0.0)) throw Error(ErrorKind::config, "lambda_scale must be positive");
  if (!(tau_penalty_factor >= 0.0))
    throw Error(ErrorKind::config, "tau_penalty_factor must be nonnegative");
  if (baseline_sigma && baseline_sigma->kind == SigmaMode::Kind::known && !(baseline_sigma->value > 0.0))
    throw Error(ErrorKind::config, "baseline sigma must be positive");
  if (!estimate_sigma && !(sim.sigma > 0.0))
    throw Error(ErrorKind::config, "sigma = 0 is only usable for solver tests, not experiments");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
      throw Error(ErrorKind::config, "t_grid must be positive and strictly increasing");
  }
  for (double t : histogram_t)
    if (!(t > 0.0)) throw Error(ErrorKind::config, "histogram_t values must be positive");
  if (rankings && sim.s0 < 1) throw Error(ErrorKind::config, "rankings need s0 >= 1");
  if (path_grid_size < 2) throw Error(ErrorKind::config, "path_grid_size must be >= 2");
}

PipelineOutput run_pipeline(const Dataset& data, const ExperimentConfig& cfg, ExecPolicy policy) {
  PipelineOutput out;
  PrecisionOptions popts;
  popts.kappa = cfg.kappa;
  popts.solver = cfg.solver;
  popts.scale_lambda_by_column = cfg.scale_lambda_by_column;
  popts.policy = policy;
  popts.tau_penalty_factor = cfg.tau_penalty_factor;
  out.precision = build_precision(data, popts);
  DLassoOptions opts;
  opts.lambda_scale = cfg.lambda_scale;
  opts.lambda_rule = cfg.lambda_rule;
  opts.sigma = cfg.sigma_mode();
  opts.solver = cfg.solver;
  out.dlasso = run_dlasso(data, out.precision, opts);
  return out;
}

ReplicationRecord run_replication(const ExperimentConfig& cfg, int rep, ExecPolicy policy) {
  cfg.validate();
  ReplicationRecord rec;
  rec.rep = rep;
  try {
    const auto [data, truth] = gen_replication(cfg.sim, static_cast<std::uint64_t>(rep));
    rec.s_max = truth.s_max;
    const PipelineOutput out = run_pipeline(data, cfg, policy);
    const Vector& z = out.dlasso.z;
    rec.sigma_used = out.dlasso.sigma_used;

    const double alpha = cfg.sim.alpha;
    Vector z_baseline = z;
    if (cfg.baseline_sigma) {
      const double sigma_b = noise_level(data, out.dlasso, *cfg.baseline_sigma, cfg.solver);
      z_baseline *= out.dlasso.sigma_used / sigma_b;
    }
    const std::array<SelectionResult, kReportedMethods.size()> selections = {
        select_fdp(z, alpha), select_bh(z_baseline, alpha), select_fwer(z_baseline, alpha)};
    rec.t_alpha = selections[0].threshold;
    for (std::size_t m = 0; m < selections.size(); ++m)
      rec.metrics[m] = metrics_for(selections[m].selected, truth);

    for (double t : cfg.t_grid) {
      rec.fdp_hat_grid.push_back(fdp_hat(z, t));
      rec.fdp_true_grid.push_back(true_fdp(z, t, truth));
    }
    for (double t : cfg.histogram_t) {
      rec.hist_fdp_hat.push_back(fdp_hat(z, t));
      rec.hist_fdp_true.push_back(true_fdp(z, t, truth));
    }
    if (cfg.rankings) {
      rec.curve_z = fdp_tpp_curve(rank_by_z(z), truth);
      rec.curve_path = fdp_tpp_curve(lasso_path_ranking(data, cfg.path_grid_size, cfg.solver), truth);
    }
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.failure = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return rec;
}

std::vector<ReplicationRecord> run_replications(const ExperimentConfig& cfg, ExecPolicy policy) {
  cfg.validate();
  const int reps = cfg.sim.reps;
  std::vector<ReplicationRecord> records(static_cast<std::size_t>(reps));
  if (policy == ExecPolicy::parallel) {
    // Replications are the outer parallel loop; each one runs its kernels serially.
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r) records[r] = run_replication(cfg, r, ExecPolicy::serial);
  } else {
    for (int r = 0; r < reps; ++r) records[r] = run_replication(cfg, r, ExecPolicy::serial);
  }
  return records;
}

ExperimentReport aggregate(const ExperimentConfig& cfg, std::vector<ReplicationRecord> records) {
  ExperimentReport report;
  report.config = cfg;
  std::vector<const ReplicationRecord*> ok;
  for (const auto& rec : records) {
    if (rec.ok)
      ok.push_back(&rec);
    else
      report.failures.emplace_back(rec.rep, rec.failure);
  }
  report.completed = static_cast<int>(ok.size());
  const auto total = records.size();
  if (total == 0 || static_cast<double>(report.failures.size()) > 0.2 * static_cast<double>(total)) {
    std::string msg = std::to_string(report.failures.size()) + " of " + std::to_string(total) +
                      " replications failed";
    if (!report.failures.empty()) msg += " (first: " + report.failures.front().second + ")";
    throw Error(ErrorKind::experiment, msg);
  }
  const double count = static_cast<double>(ok.size());

  for (std::size_t m = 0; m < kReportedMethods.size(); ++m) {
    MethodSummary s;
    s.method = kReportedMethods[m];
    for (const auto* rec : ok) {
      s.mean_fdp += rec->metrics[m].fdp;
      s.mean_tpp += rec->metrics[m].tpp;
      s.mean_discoveries += static_cast<double>(rec->metrics[m].discoveries);
    }
    s.mean_fdp /= count;
    s.mean_tpp /= count;
    s.mean_discoveries /= count;
    report.methods.push_back(s);
  }

  for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) {
    CalibrationRow row;
    row.t = cfg.t_grid[i];
    for (const auto* rec : ok) {
      row.mean_fdp_hat += std::min(rec->fdp_hat_grid[i], 1.0);
      row.mean_fdp_true += rec->fdp_true_grid[i];
    }
    row.mean_fdp_hat /= count;
    row.mean_fdp_true /= count;
    report.calibration.push_back(row);
  }

  for (std::size_t i = 0; i < cfg.histogram_t.size(); ++i) {
    HistogramData h;
    h.t = cfg.histogram_t[i];
    for (const auto* rec : ok) {
      h.fdp_hat.push_back(std::min(rec->hist_fdp_hat[i], 1.0));
      h.fdp_true.push_back(rec->hist_fdp_true[i]);
    }
    report.histograms.push_back(std::move(h));
  }

  if (cfg.rankings) {
    const auto s0 = static_cast<std::size_t>(cfg.sim.s0);
    for (std::size_t k = 0; k < s0; ++k) {
      CurveRow row;
      row.tpp_level = static_cast<double>(k + 1) / static_cast<double>(s0);
      for (const auto* rec : ok) {
        row.z_ranking += rec->curve_z[k].fdp;
        row.lasso_path += rec->curve_path[k].fdp;
      }
      row.z_ranking /= count;
      row.lasso_path /= count;
      report.curves.push_back(row);
    }
  }

  if (cfg.keep_records) report.records = std::move(records);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, ExecPolicy policy) {
  return aggregate(cfg, run_replications(cfg, policy));
}

std::vector<CalibrationRow> fdp_calibration(ExperimentConfig cfg, const std::vector<double>& t_grid,
                                            ExecPolicy policy) {
  cfg.t_grid = t_grid;
  cfg.rankings = false;
  return run_experiment(cfg, policy).calibration;
}

std::vector<CurveRow> ranking_comparison(ExperimentConfig cfg, ExecPolicy policy) {
  if (cfg.sim.s0 < 1) throw Error(ErrorKind::config, "ranking comparison needs s0 >= 1");
  cfg.rankings = true;
  cfg.t_grid.clear();
  cfg.histogram_t.clear();
  return run_experiment(cfg, policy).curves;
}

nlohmann::json provenance_json(const ExperimentConfig& cfg) {
  return {{"seed", cfg.sim.seed},
          {"generator", std::string(kGeneratorName)},
          {"kappa", cfg.kappa},
          {"lambda_scale", cfg.lambda_scale},
          {"sigma_mode", cfg.sigma_mode().to_string()},
          {"baseline_sigma", cfg.baseline_sigma ? cfg.baseline_sigma->to_string() : "shared"},
          {"tau_penalty_factor", cfg.tau_penalty_factor},
          {"lambda_rule", cfg.lambda_rule == LambdaRule::cv ? "cv" : "theory"},
          {"unit_diagonal", cfg.sim.unit_diagonal},
          {"sign_mode", std::string(to_string(cfg.sim.sign_mode))},
          {"degree_mode", cfg.sim.per_row_degree ? "per_row" : "shared"},
          {"spd_eps", cfg.sim.spd_eps},
          {"fwer_method", "holm"},
          {"fwer_caveat", std::string(kFwerCaveat)}};
}

std::string provenance_line(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# seed=" << cfg.sim.seed << " generator=" << kGeneratorName
     << " kappa=" << format_number(cfg.kappa) << " lambda_scale=" << format_number(cfg.lambda_scale)
     << " tau_factor=" << format_number(cfg.tau_penalty_factor)
     << " sigma_mode=" << cfg.sigma_mode().to_string()
     << " baseline_sigma=" << (cfg.baseline_sigma ? cfg.baseline_sigma->to_string() : "shared")
     << " sign_mode=" << to_string(cfg.sim.sign_mode) << " fwer=holm";
  return os.str();
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["config"] = io::config_to_json(report.config);
  j["provenance"] = provenance_json(report.config);
  j["completed_replications"] = report.completed;
  ordered_json failures = ordered_json::array();
  for (const auto& [rep, why] : report.failures) failures.push_back({{"rep", rep}, {"cause", why}});
  j["failed_replications"] = failures;

  ordered_json methods = ordered_json::array();
  for (const auto& m : report.methods)
    methods.push_back({{"method", std::string(to_string(m.method))},
                       {"mean_fdp", m.mean_fdp},
                       {"mean_tpp", m.mean_tpp},
                       {"mean_discoveries", m.mean_discoveries}});
  j["methods"] = methods;

  ordered_json calib = ordered_json::array();
  for (const auto& row : report.calibration)
    calib.push_back({{"t", row.t}, {"mean_fdp_hat", row.mean_fdp_hat}, {"mean_fdp_true", row.mean_fdp_true}});
  j["fdp_calibration"] = calib;

  ordered_json curves = ordered_json::array();
  for (const auto& row : report.curves)
    curves.push_back({{"tpp_level", row.tpp_level},
                      {"z_ranking_fdp", row.z_ranking},
                      {"lasso_path_fdp", row.lasso_path}});
  j["fdp_tpp_curves"] = curves;

  ordered_json hists = ordered_json::array();
  for (const auto& h : report.histograms)
    hists.push_back({{"t", h.t}, {"fdp_hat", h.fdp_hat}, {"fdp_true", h.fdp_true}});
  j["fdp_histograms"] = hists;

  if (!report.records.empty()) {
    ordered_json recs = ordered_json::array();
    for (const auto& rec : report.records) {
      ordered_json r;
      r["rep"] = rec.rep;
      r["ok"] = rec.ok;
      if (!rec.ok) r["failure"] = rec.failure;
      ordered_json ms = ordered_json::object();
      for (std::size_t m = 0; m < kReportedMethods.size(); ++m)
        ms[std::string(to_string(kReportedMethods[m]))] = {
            {"V", rec.metrics[m].false_discoveries},
            {"R", rec.metrics[m].discoveries},
            {"fdp", rec.metrics[m].fdp},
            {"tpp", rec.metrics[m].tpp}};
      r["metrics"] = ms;
      r["t_alpha"] = rec.t_alpha;
      r["sigma_used"] = rec.sigma_used;
      r["s_max"] = rec.s_max;
      r["fdp_hat_grid"] = rec.fdp_hat_grid;
      r["fdp_true_grid"] = rec.fdp_true_grid;
      recs.push_back(std::move(r));
    }
    j["records"] = recs;
  }
  return j;
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir.string());
  std::vector<std::filesystem::path> written;
  const std::string header = provenance_line(report.config) + "\n";

  auto emit = [&](const std::string& name, const std::string& body) {
    const auto path = dir / name;
    io::write_text_file(path, body);
    written.push_back(path);
  };

  emit("report.json", to_json(report).dump(2) + "\n");

  {
    std::ostringstream os;
    os << header << "method,mean_fdp,mean_tpp,mean_discoveries\n";
    for (const auto& m : report.methods)
      os << to_string(m.method) << ',' << format_number(m.mean_fdp) << ','
         << format_number(m.mean_tpp) << ',' << format_number(m.mean_discoveries) << '\n';
    emit("table_methods.csv", os.str());
  }
  if (!report.calibration.empty()) {
    std::ostringstream os;
    os << header << "t,mean_fdp_hat,mean_fdp_true\n";
    for (const auto& row : report.calibration)
      os << format_number(row.t) << ',' << format_number(row.mean_fdp_hat) << ','
         << format_number(row.mean_fdp_true) << '\n';
    emit("fdp_calibration.csv", os.str());
  }
  if (!report.curves.empty()) {
    std::ostringstream os;
    os << header << "tpp_level,z_ranking_fdp,lasso_path_fdp\n";
    for (const auto& row : report.curves)
      os << format_number(row.tpp_level) << ',' << format_number(row.z_ranking) << ','
         << format_number(row.lasso_path) << '\n';
    emit("fdp_tpp_curves.csv", os.str());
  }
  for (const auto& h : report.histograms) {
    // 20 bins of width 0.05 on [0, 1]; the last bin is closed.
    constexpr int bins = 20;
    std::array<int, bins> est{}, tru{};
    auto bin_of = [](double v) { return std::clamp(static_cast<int>(v * bins), 0, bins - 1); };
    for (double v : h.fdp_hat) ++est[bin_of(v)];
    for (double v : h.fdp_true) ++tru[bin_of(v)];
    std::ostringstream os;
    os << header << "bin_lo,bin_hi,count_fdp_true,count_fdp_estimated\n";
    for (int b = 0; b < bins; ++b)
      os << format_number(b / double(bins)) << ',' << format_number((b + 1) / double(bins)) << ','
         << tru[b] << ',' << est[b] << '\n';
    emit(histogram_file_name(h.t), os.str());
  }
  return written;
}

}  // namespace dlfdp
