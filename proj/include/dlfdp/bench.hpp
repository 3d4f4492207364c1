#pragma once

// Replicated simulation experiments: method comparison tables, FDP
// calibration sweeps, FDP histograms and ranking-efficiency curves.

#include "dlfdp/common.hpp"
#include "dlfdp/dlasso.hpp"
#include "dlfdp/inference.hpp"
#include "dlfdp/nodewise.hpp"
#include "dlfdp/simgen.hpp"

#include <array>
#include <optional>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dlfdp {

inline constexpr std::string_view kFwerCaveat =
    "dlasso_fwer is Holm step-down on normal p-values, not the bootstrap "
    "dependence-adjusted FWER method";

/// The three selection rules compared in every replication, in report order.
inline constexpr std::array<Method, 3> kReportedMethods = {Method::dlasso_fdp, Method::dlasso_bh,
                                                           Method::dlasso_fwer};

std::vector<double> default_t_grid();  // 0.5, 0.6, ..., 5.0

/// Defaults are the calibrated pipeline settings used for the simulation
/// studies; they differ from the bare library defaults (lambda scale 8,
/// kappa 2, tau factor 2, known sigma), which select almost nothing at
/// n = 100..150, p = 200.
struct ExperimentConfig {
  SimConfig sim;
  double kappa = 1.0;
  /// Nodewise lambda_j scaled by sqrt(Sigma_hat_jj).
  bool scale_lambda_by_column = false;
  double lambda_scale = 0.5;
  LambdaRule lambda_rule = LambdaRule::theory;
  double tau_penalty_factor = 1.0;
  /// Residual noise estimate (true) or the simulation's sigma (false).
  bool estimate_sigma = true;
  /// Noise level plugged into the p-values of the BH and Holm baselines.
  /// Empty: the baselines see the same z as the FDP rule.
  std::optional<SigmaMode> baseline_sigma = SigmaMode::residual();
  std::vector<double> t_grid = default_t_grid();
  std::vector<double> histogram_t = {2.0, 3.6};
  /// Compute z-ranking and Lasso-path FDP-TPP curves.
  bool rankings = true;
  int path_grid_size = 100;
  bool keep_records = false;
  SolverOptions solver;

  SigmaMode sigma_mode() const;
  void validate() const;
};

/// Everything the pipeline produces for one dataset.
struct PipelineOutput {
  PrecisionFit precision;
  DLassoResult dlasso;
};

PipelineOutput run_pipeline(const Dataset& data, const ExperimentConfig& cfg,
                            ExecPolicy policy = ExecPolicy::parallel);

struct ReplicationRecord {
  int rep = 0;
  bool ok = false;
  std::string failure;
  std::array<EvalMetrics, kReportedMethods.size()> metrics{};
  double t_alpha = 0.0;
  double sigma_used = 0.0;
  Index s_max = 0;
  std::vector<double> fdp_hat_grid;   // uncapped, one per t_grid entry
  std::vector<double> fdp_true_grid;
  std::vector<double> hist_fdp_hat;   // uncapped, one per histogram_t entry
  std::vector<double> hist_fdp_true;
  std::vector<CurvePoint> curve_z;
  std::vector<CurvePoint> curve_path;
};

struct MethodSummary {
  Method method = Method::dlasso_fdp;
  double mean_fdp = 0.0;
  double mean_tpp = 0.0;
  double mean_discoveries = 0.0;
};

struct CalibrationRow {
  double t = 0.0;
  double mean_fdp_hat = 0.0;  // capped at 1 per replication before averaging
  double mean_fdp_true = 0.0;
};

struct CurveRow {
  double tpp_level = 0.0;
  double z_ranking = 0.0;
  double lasso_path = 0.0;
};

struct HistogramData {
  double t = 0.0;
  std::vector<double> fdp_hat;  // capped at 1, one per completed replication
  std::vector<double> fdp_true;
};

struct ExperimentReport {
  ExperimentConfig config;
  int completed = 0;
  std::vector<std::pair<int, std::string>> failures;
  std::vector<MethodSummary> methods;
  std::vector<CalibrationRow> calibration;
  std::vector<CurveRow> curves;
  std::vector<HistogramData> histograms;
  std::vector<ReplicationRecord> records;  // only when config.keep_records
};

/// One replication on make_stream(seed, rep). Stage failures are captured in
/// the record (ok = false) rather than thrown; invalid configs throw.
ReplicationRecord run_replication(const ExperimentConfig& cfg, int rep,
                                  ExecPolicy policy = ExecPolicy::parallel);

/// All replications; the parallel policy distributes replications over threads.
std::vector<ReplicationRecord> run_replications(const ExperimentConfig& cfg,
                                                ExecPolicy policy = ExecPolicy::parallel);

/// Means over successful records. Throws experiment error when more than 20%
/// of replications failed.
ExperimentReport aggregate(const ExperimentConfig& cfg, std::vector<ReplicationRecord> records);

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                ExecPolicy policy = ExecPolicy::parallel);

std::vector<CalibrationRow> fdp_calibration(ExperimentConfig cfg, const std::vector<double>& t_grid,
                                            ExecPolicy policy = ExecPolicy::parallel);

std::vector<CurveRow> ranking_comparison(ExperimentConfig cfg,
                                         ExecPolicy policy = ExecPolicy::parallel);

nlohmann::json provenance_json(const ExperimentConfig& cfg);
std::string provenance_line(const ExperimentConfig& cfg);

nlohmann::ordered_json to_json(const ExperimentReport& report);

/// report.json plus table_methods.csv, fdp_calibration.csv, fdp_tpp_curves.csv
/// and fdp_histogram_t{t}.csv; returns the files written.
std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const std::filesystem::path& dir);

}  // namespace dlfdp
