#pragma once

#include "dlfdp/bench.hpp"
#include "dlfdp/common.hpp"
#include "dlfdp/model.hpp"
#include "dlfdp/simgen.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

namespace dlfdp::io {

/// Numeric CSV with a header row. Returns rows x columns; `what` names the
/// file in error messages.
Matrix read_numeric_csv(std::istream& in, const std::string& what);

Dataset read_dataset(const std::filesystem::path& x_csv, const std::filesystem::path& y_csv);

/// X with header x1..xp, y with header y; 17 significant digits.
void write_dataset(const Dataset& data, const std::filesystem::path& x_csv,
                   const std::filesystem::path& y_csv);

nlohmann::ordered_json truth_to_json(const ModelTruth& truth, const SimConfig& cfg);
ModelTruth truth_from_json(const nlohmann::json& j);

/// Config objects use SimConfig field names plus the experiment options.
/// Unknown fields are rejected; p, n, s0, beta1 and seed are required.
SimConfig parse_sim_config(const nlohmann::json& j);
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// "lo:hi:step" -> lo, lo+step, ..., <= hi (with a 1e-9 step slack).
std::vector<double> parse_t_grid(const std::string& text);

}  // namespace dlfdp::io
