// dlfdp command-line front end.
//
//   dlfdp select     --x X.csv --y y.csv [--alpha a] [--bh] [--fwer] [--out dir]
//   dlfdp simulate   [--config cfg.json] [--seed s] [--rep r] --out dir
//   dlfdp experiment --config cfg.json [--reps r] [--t-grid lo:hi:step] --out dir
//   dlfdp rank       --x X.csv --y y.csv [--truth truth.json] [--out dir]
//
// Predictor indices in every output are 1-based. Failures print a JSON
// object {"error": {...}} on stderr and exit with a nonzero status.

#include "dlfdp/bench.hpp"
#include "dlfdp/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace dlfdp;

namespace {

struct Common {
  std::optional<double> alpha;
  std::optional<double> kappa;
  std::optional<std::string> sigma;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<std::string> t_grid;
  std::string out;
  bool verbose = false;
};

struct DataArgs {
  std::string x_csv;
  std::string y_csv;
  std::optional<double> lambda_scale;
  std::optional<double> tau_factor;
  std::optional<std::string> baseline;
};

void log(const Common& c, const std::string& msg) {
  if (c.verbose) std::cerr << "dlfdp: " << msg << '\n';
}

std::vector<Index> one_based(const std::vector<Index>& idx) {
  std::vector<Index> out;
  out.reserve(idx.size());
  for (Index j : idx) out.push_back(j + 1);
  return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// Pipeline settings for user data: calibrated defaults plus command-line overrides.
ExperimentConfig data_config(const Common& c, const DataArgs& d) {
  ExperimentConfig cfg;
  if (c.alpha) cfg.sim.alpha = *c.alpha;
  if (!(cfg.sim.alpha > 0.0 && cfg.sim.alpha < 1.0))
    throw Error(ErrorKind::config, "--alpha must lie in (0, 1)");
  if (c.kappa) cfg.kappa = *c.kappa;
  if (d.lambda_scale) cfg.lambda_scale = *d.lambda_scale;
  if (d.tau_factor) cfg.tau_penalty_factor = *d.tau_factor;
  if (d.baseline) {
    if (*d.baseline == "shared")
      cfg.baseline_sigma.reset();
    else
      cfg.baseline_sigma = SigmaMode::parse(*d.baseline);
  }
  if (c.sigma) {
    const SigmaMode mode = SigmaMode::parse(*c.sigma);
    if (mode.kind == SigmaMode::Kind::known) {
      cfg.estimate_sigma = false;
      cfg.sim.sigma = mode.value;
    } else if (mode.kind != SigmaMode::Kind::residual_df) {
      throw Error(ErrorKind::config, "--sigma must be 'estimate' or 'known:<v>'");
    }
  }
  return cfg;
}

nlohmann::ordered_json data_provenance(const ExperimentConfig& cfg, const Dataset& data) {
  return {{"n", data.n()},
          {"p", data.p()},
          {"kappa", cfg.kappa},
          {"lambda_scale", cfg.lambda_scale},
          {"tau_penalty_factor", cfg.tau_penalty_factor},
          {"sigma_mode", cfg.sigma_mode().to_string()},
          {"baseline_sigma", cfg.baseline_sigma ? cfg.baseline_sigma->to_string() : "shared"},
          {"fwer_method", "holm"},
          {"fwer_caveat", std::string(kFwerCaveat)}};
}

void emit_json(const Common& c, const std::string& file, const nlohmann::ordered_json& j) {
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + c.out);
  io::write_text_file(fs::path(c.out) / file, text);
  log(c, "wrote " + (fs::path(c.out) / file).string());
}

nlohmann::ordered_json baseline_section(const SelectionResult& r, double sigma) {
  return {{"threshold", r.threshold}, {"selected", one_based(r.selected)}, {"sigma", sigma}};
}

void cmd_select(const Common& c, const DataArgs& d, bool bh, bool fwer,
                const std::string& theta_out) {
  const ExperimentConfig cfg = data_config(c, d);
  cfg.validate();
  const Dataset data = io::read_dataset(d.x_csv, d.y_csv);
  log(c, "read n=" + std::to_string(data.n()) + " p=" + std::to_string(data.p()));
  const PipelineOutput out = run_pipeline(data, cfg);
  const Vector& z = out.dlasso.z;
  const double alpha = cfg.sim.alpha;
  const SelectionResult sel = select_fdp(z, alpha);

  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(Method::dlasso_fdp));
  j["alpha"] = alpha;
  j["t_alpha"] = sel.threshold;
  j["selected"] = one_based(sel.selected);
  j["fdp_hat"] = sel.fdp_hat_at_threshold;
  j["sigma_used"] = out.dlasso.sigma_used;
  j["lambda"] = out.dlasso.lambda;
  j["z"] = to_std(z);
  if (bh || fwer) {
    double sigma_b = out.dlasso.sigma_used;
    if (cfg.baseline_sigma) sigma_b = noise_level(data, out.dlasso, *cfg.baseline_sigma, cfg.solver);
    const Vector zb = z * (out.dlasso.sigma_used / sigma_b);
    if (bh) j[std::string(to_string(Method::dlasso_bh))] = baseline_section(select_bh(zb, alpha), sigma_b);
    if (fwer)
      j[std::string(to_string(Method::dlasso_fwer))] = baseline_section(select_fwer(zb, alpha), sigma_b);
  }
  j["provenance"] = data_provenance(cfg, data);
  emit_json(c, "selection.json", j);
  if (!theta_out.empty()) {
    std::ofstream os(theta_out, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::io, "cannot write " + theta_out);
    write_theta_csv(os, out.precision.theta_hat);
  }
}

void cmd_rank(const Common& c, const DataArgs& d, const std::string& truth_json) {
  const ExperimentConfig cfg = data_config(c, d);
  cfg.validate();
  const Dataset data = io::read_dataset(d.x_csv, d.y_csv);
  const PipelineOutput out = run_pipeline(data, cfg);
  const std::vector<Index> ranking = rank_by_z(out.dlasso.z);

  nlohmann::ordered_json j;
  j["ranking"] = one_based(ranking);
  j["z"] = to_std(out.dlasso.z);
  j["sigma_used"] = out.dlasso.sigma_used;
  if (!truth_json.empty()) {
    const ModelTruth truth = io::truth_from_json(io::read_json_file(truth_json));
    if (truth.p() != data.p())
      throw Error(ErrorKind::dimension_mismatch, "truth has p = " + std::to_string(truth.p()) +
                                                     " but the data has p = " +
                                                     std::to_string(data.p()));
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (const auto& pt : fdp_tpp_curve(ranking, truth))
      curve.push_back({{"tpp_level", pt.tpp_level}, {"fdp", pt.fdp}});
    j["fdp_tpp_curve"] = curve;
  }
  j["provenance"] = data_provenance(cfg, data);
  emit_json(c, "ranking.json", j);
}

void cmd_simulate(const Common& c, const std::string& config, std::uint64_t rep) {
  SimConfig cfg;
  if (!config.empty()) cfg = io::parse_sim_config(io::read_json_file(config));
  if (c.seed) cfg.seed = *c.seed;
  if (c.sigma) {
    const SigmaMode mode = SigmaMode::parse(*c.sigma);
    if (mode.kind != SigmaMode::Kind::known)
      throw Error(ErrorKind::config, "simulate takes --sigma known:<v> only");
    cfg.sigma = mode.value;
  }
  cfg.validate();
  if (c.out.empty()) throw Error(ErrorKind::config, "simulate needs --out <dir>");
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + c.out);
  const auto [data, truth] = gen_replication(cfg, rep);
  const fs::path dir(c.out);
  io::write_dataset(data, dir / "X.csv", dir / "y.csv");
  io::write_text_file(dir / "truth.json", io::truth_to_json(truth, cfg).dump(2) + "\n");
  log(c, "wrote X.csv, y.csv and truth.json to " + c.out);
}

void cmd_experiment(const Common& c, const std::string& config, bool serial) {
  ExperimentConfig cfg = io::parse_experiment_config(io::read_json_file(config));
  if (c.alpha) cfg.sim.alpha = *c.alpha;
  if (c.kappa) cfg.kappa = *c.kappa;
  if (c.seed) cfg.sim.seed = *c.seed;
  if (c.reps) cfg.sim.reps = *c.reps;
  if (c.t_grid) cfg.t_grid = io::parse_t_grid(*c.t_grid);
  if (c.sigma) {
    const SigmaMode mode = SigmaMode::parse(*c.sigma);
    if (mode.kind == SigmaMode::Kind::known) {
      cfg.estimate_sigma = false;
      cfg.sim.sigma = mode.value;
    } else if (mode.kind == SigmaMode::Kind::residual_df) {
      cfg.estimate_sigma = true;
    } else {
      throw Error(ErrorKind::config, "--sigma must be 'estimate' or 'known:<v>'");
    }
  }
  cfg.validate();
  if (c.out.empty()) throw Error(ErrorKind::config, "experiment needs --out <dir>");
  log(c, "running " + std::to_string(cfg.sim.reps) + " replications");
  const ExperimentReport report = run_experiment(cfg, serial ? ExecPolicy::serial : ExecPolicy::parallel);
  for (const auto& path : write_report(report, c.out)) log(c, "wrote " + path.string());
}

int report_error(std::string_view kind, const std::string& message,
                 std::optional<Index> index = std::nullopt) {
  nlohmann::ordered_json e{{"kind", std::string(kind)}, {"message", message}};
  if (index) e["index"] = *index + 1;
  std::cerr << nlohmann::ordered_json{{"error", e}}.dump() << '\n';
  return 1;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--alpha", c.alpha, "Target FDP level in (0, 1)");
  sub->add_option("--kappa", c.kappa, "Nodewise tuning constant");
  sub->add_option("--sigma", c.sigma, "Noise level: known:<v> or estimate");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_flag("-v,--verbose", c.verbose, "Progress messages on stderr");
}

void add_data(CLI::App* sub, DataArgs& d) {
  sub->add_option("--x", d.x_csv, "Design matrix CSV with header x1..xp")->required();
  sub->add_option("--y", d.y_csv, "Response CSV with header y")->required();
  sub->add_option("--lambda-scale", d.lambda_scale, "Lasso lambda = scale * sigma * sqrt(ln p / n)");
  sub->add_option("--tau-factor", d.tau_factor, "Penalty coefficient in the nodewise tau^2");
  sub->add_option("--baseline-sigma", d.baseline,
                  "Noise level for BH/Holm p-values: shared, estimate, residual, scaled or known:<v>");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Debiased-Lasso variable selection with FDP control"};
  app.require_subcommand(1, 1);

  Common common;
  DataArgs data_args;
  bool bh = false, fwer = false, serial = false;
  std::string theta_out, config, truth;
  std::uint64_t rep = 0;

  auto* select = app.add_subcommand("select", "Select predictors at FDP level alpha");
  add_common(select, common);
  add_data(select, data_args);
  select->add_flag("--bh", bh, "Add the Benjamini-Hochberg selection");
  select->add_flag("--fwer", fwer, "Add the Holm selection");
  select->add_option("--theta-out", theta_out, "Write the estimated precision matrix as CSV");

  auto* rank = app.add_subcommand("rank", "Rank predictors by |z|");
  add_common(rank, common);
  add_data(rank, data_args);
  rank->add_option("--truth", truth, "truth.json; adds the FDP-TPP curve");

  auto* simulate = app.add_subcommand("simulate", "Generate a simulated dataset");
  add_common(simulate, common);
  simulate->add_option("--config", config, "Simulation config JSON");
  simulate->add_option("--seed", common.seed, "Experiment seed");
  simulate->add_option("--rep", rep, "Replication stream index");

  auto* experiment = app.add_subcommand("experiment", "Run a replicated simulation experiment");
  add_common(experiment, common);
  experiment->add_option("--config", config, "Experiment config JSON")->required();
  experiment->add_option("--seed", common.seed, "Experiment seed");
  experiment->add_option("--reps", common.reps, "Number of replications");
  experiment->add_option("--t-grid", common.t_grid, "Calibration grid lo:hi:step");
  experiment->add_flag("--serial", serial, "Use the serial reference kernels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    if (*select)
      cmd_select(common, data_args, bh, fwer, theta_out);
    else if (*rank)
      cmd_rank(common, data_args, truth);
    else if (*simulate)
      cmd_simulate(common, config, rep);
    else
      cmd_experiment(common, config, serial);
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), e.index());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
