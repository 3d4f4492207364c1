#include "dlfdp/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace dlfdp::io {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

const std::set<std::string>& sim_fields() {
  static const std::set<std::string> fields = {
      "p", "n", "s0", "beta1", "sigma", "edge_prob", "magnitude_range", "sign_mode",
      "spd_eps", "per_row_degree", "unit_diagonal", "seed", "reps", "alpha"};
  return fields;
}

const std::set<std::string>& experiment_fields() {
  static const std::set<std::string> fields = {
      "kappa", "lambda_scale", "sigma_mode", "t_grid", "histogram_t", "rankings",
      "path_grid_size", "keep_records", "solver_tol", "max_sweeps", "tau_penalty_factor",
      "baseline_sigma", "lambda_rule", "scale_lambda_by_column"};
  return fields;
}

template <class T>
T field(const nlohmann::json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::config, std::string("config field '") + name + "' has the wrong type");
  }
}

void require(const nlohmann::json& j, std::initializer_list<const char*> names) {
  for (const char* name : names)
    if (!j.contains(name))
      throw Error(ErrorKind::config, std::string("config is missing required field '") + name + "'");
}

void fill_sim(const nlohmann::json& j, SimConfig& cfg) {
  require(j, {"p", "n", "s0", "beta1", "seed"});
  cfg.p = field<Index>(j, "p");
  cfg.n = field<Index>(j, "n");
  cfg.s0 = field<Index>(j, "s0");
  cfg.beta1 = field<double>(j, "beta1");
  cfg.seed = field<std::uint64_t>(j, "seed");
  if (j.contains("sigma")) cfg.sigma = field<double>(j, "sigma");
  if (j.contains("edge_prob")) cfg.edge_prob = field<double>(j, "edge_prob");
  if (j.contains("magnitude_range")) {
    const auto range = field<std::vector<double>>(j, "magnitude_range");
    if (range.size() != 2)
      throw Error(ErrorKind::config, "config field 'magnitude_range' needs [low, high]");
    cfg.magnitude_low = range[0];
    cfg.magnitude_high = range[1];
  }
  if (j.contains("sign_mode")) cfg.sign_mode = parse_sign_mode(field<std::string>(j, "sign_mode"));
  if (j.contains("spd_eps")) cfg.spd_eps = field<double>(j, "spd_eps");
  if (j.contains("per_row_degree")) cfg.per_row_degree = field<bool>(j, "per_row_degree");
  if (j.contains("unit_diagonal")) cfg.unit_diagonal = field<bool>(j, "unit_diagonal");
  if (j.contains("reps")) cfg.reps = field<int>(j, "reps");
  if (j.contains("alpha")) cfg.alpha = field<double>(j, "alpha");
}

}  // namespace

Matrix read_numeric_csv(std::istream& in, const std::string& what) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_commas(line);
    if (!have_header) {
      double probe = 0.0;
      bool numeric = !cells.empty();
      for (const auto& c : cells) numeric = numeric && parse_double(c, probe);
      if (numeric)
        throw Error(ErrorKind::parse, what + " line " + std::to_string(line_no) +
                                          ": header row required");
      columns = cells.size();
      have_header = true;
      continue;
    }
    if (cells.size() != columns)
      throw Error(ErrorKind::parse, what + " line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(columns) + " fields, found " +
                                        std::to_string(cells.size()));
    std::vector<double> row(columns);
    for (std::size_t c = 0; c < columns; ++c)
      if (!parse_double(cells[c], row[c]) || !std::isfinite(row[c]))
        throw Error(ErrorKind::parse, what + " line " + std::to_string(line_no) + ", field " +
                                          std::to_string(c + 1) + ": not a finite number '" +
                                          trim(cells[c]) + "'");
    rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorKind::parse, what + ": file is empty");
  if (rows.empty()) throw Error(ErrorKind::parse, what + ": no data rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(columns));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < columns; ++c) m(i, c) = rows[i][c];
  return m;
}

Dataset read_dataset(const std::filesystem::path& x_csv, const std::filesystem::path& y_csv) {
  std::ifstream xs(x_csv), ys(y_csv);
  if (!xs) throw Error(ErrorKind::io, "cannot open " + x_csv.string());
  if (!ys) throw Error(ErrorKind::io, "cannot open " + y_csv.string());
  Matrix x = read_numeric_csv(xs, x_csv.string());
  const Matrix y = read_numeric_csv(ys, y_csv.string());
  if (y.cols() != 1)
    throw Error(ErrorKind::parse, y_csv.string() + ": expected a single column");
  return Dataset::make(std::move(x), y.col(0));
}

void write_dataset(const Dataset& data, const std::filesystem::path& x_csv,
                   const std::filesystem::path& y_csv) {
  std::ostringstream xs, ys;
  xs << std::setprecision(17);
  ys << std::setprecision(17);
  for (Index j = 0; j < data.p(); ++j) xs << (j ? "," : "") << 'x' << (j + 1);
  xs << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.p(); ++j) xs << (j ? "," : "") << data.x(i, j);
    xs << '\n';
  }
  ys << "y\n";
  for (Index i = 0; i < data.n(); ++i) ys << data.y[i] << '\n';
  write_text_file(x_csv, xs.str());
  write_text_file(y_csv, ys.str());
}

nlohmann::ordered_json truth_to_json(const ModelTruth& truth, const SimConfig& cfg) {
  nlohmann::ordered_json j;
  std::vector<double> beta(truth.beta.data(), truth.beta.data() + truth.beta.size());
  std::vector<Index> support;
  for (Index s : truth.support) support.push_back(s + 1);
  j["beta"] = beta;
  j["support"] = support;
  j["sigma"] = truth.sigma;
  j["seed"] = cfg.seed;
  j["generator"] = std::string(kGeneratorName);
  j["s_max"] = truth.s_max;
  j["noiseless"] = truth.noiseless;
  j["sign_mode"] = std::string(to_string(cfg.sign_mode));
  return j;
}

ModelTruth truth_from_json(const nlohmann::json& j) {
  ModelTruth truth;
  require(j, {"beta", "support", "sigma"});
  const auto beta = field<std::vector<double>>(j, "beta");
  truth.beta = Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
  truth.sigma = field<double>(j, "sigma");
  truth.index_support();
  // The explicit support list must agree with the nonzero pattern of beta.
  auto listed = field<std::vector<Index>>(j, "support");
  for (auto& s : listed) --s;
  std::sort(listed.begin(), listed.end());
  if (listed != truth.support)
    throw Error(ErrorKind::config, "truth 'support' does not match the nonzeros of 'beta'");
  return truth;
}

SimConfig parse_sim_config(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!sim_fields().count(key))
      throw Error(ErrorKind::config, "unknown config field '" + key + "'");
  SimConfig cfg;
  fill_sim(j, cfg);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!sim_fields().count(key) && !experiment_fields().count(key))
      throw Error(ErrorKind::config, "unknown config field '" + key + "'");
  ExperimentConfig cfg;
  fill_sim(j, cfg.sim);
  if (j.contains("kappa")) cfg.kappa = field<double>(j, "kappa");
  if (j.contains("lambda_scale")) cfg.lambda_scale = field<double>(j, "lambda_scale");
  if (j.contains("sigma_mode")) {
    const auto mode = field<std::string>(j, "sigma_mode");
    if (mode == "estimate")
      cfg.estimate_sigma = true;
    else if (mode == "known")
      cfg.estimate_sigma = false;
    else
      throw Error(ErrorKind::config, "config field 'sigma_mode' must be 'known' or 'estimate'");
  }
  if (j.contains("tau_penalty_factor"))
    cfg.tau_penalty_factor = field<double>(j, "tau_penalty_factor");
  if (j.contains("baseline_sigma")) {
    const auto mode = field<std::string>(j, "baseline_sigma");
    if (mode == "shared")
      cfg.baseline_sigma.reset();
    else
      cfg.baseline_sigma = SigmaMode::parse(mode);
  }
  if (j.contains("lambda_rule")) {
    const auto rule = field<std::string>(j, "lambda_rule");
    if (rule == "theory")
      cfg.lambda_rule = LambdaRule::theory;
    else if (rule == "cv")
      cfg.lambda_rule = LambdaRule::cv;
    else
      throw Error(ErrorKind::config, "config field 'lambda_rule' must be 'theory' or 'cv'");
  }
  if (j.contains("scale_lambda_by_column"))
    cfg.scale_lambda_by_column = field<bool>(j, "scale_lambda_by_column");
  if (j.contains("t_grid")) {
    const auto& g = j.at("t_grid");
    cfg.t_grid = g.is_string() ? parse_t_grid(g.get<std::string>())
                               : field<std::vector<double>>(j, "t_grid");
  }
  if (j.contains("histogram_t")) cfg.histogram_t = field<std::vector<double>>(j, "histogram_t");
  if (j.contains("rankings")) cfg.rankings = field<bool>(j, "rankings");
  if (j.contains("path_grid_size")) cfg.path_grid_size = field<int>(j, "path_grid_size");
  if (j.contains("keep_records")) cfg.keep_records = field<bool>(j, "keep_records");
  if (j.contains("solver_tol")) cfg.solver.tol = field<double>(j, "solver_tol");
  if (j.contains("max_sweeps")) cfg.solver.max_sweeps = field<int>(j, "max_sweeps");
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  const SimConfig& s = cfg.sim;
  j["p"] = s.p;
  j["n"] = s.n;
  j["s0"] = s.s0;
  j["beta1"] = s.beta1;
  j["sigma"] = s.sigma;
  j["edge_prob"] = s.edge_prob;
  j["magnitude_range"] = {s.magnitude_low, s.magnitude_high};
  j["sign_mode"] = std::string(to_string(s.sign_mode));
  j["spd_eps"] = s.spd_eps;
  j["per_row_degree"] = s.per_row_degree;
  j["unit_diagonal"] = s.unit_diagonal;
  j["seed"] = s.seed;
  j["reps"] = s.reps;
  j["alpha"] = s.alpha;
  j["kappa"] = cfg.kappa;
  j["lambda_scale"] = cfg.lambda_scale;
  j["sigma_mode"] = cfg.estimate_sigma ? "estimate" : "known";
  j["baseline_sigma"] = cfg.baseline_sigma ? cfg.baseline_sigma->to_string() : "shared";
  j["tau_penalty_factor"] = cfg.tau_penalty_factor;
  j["lambda_rule"] = cfg.lambda_rule == LambdaRule::cv ? "cv" : "theory";
  j["scale_lambda_by_column"] = cfg.scale_lambda_by_column;
  j["t_grid"] = cfg.t_grid;
  j["histogram_t"] = cfg.histogram_t;
  j["rankings"] = cfg.rankings;
  j["path_grid_size"] = cfg.path_grid_size;
  j["keep_records"] = cfg.keep_records;
  j["solver_tol"] = cfg.solver.tol;
  j["max_sweeps"] = cfg.solver.max_sweeps;
  return j;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::vector<double> parse_t_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  double lo = 0, hi = 0, step = 0;
  if (parts.size() != 3 || !parse_double(parts[0], lo) || !parse_double(parts[1], hi) ||
      !parse_double(parts[2], step) || !(step > 0.0) || !(lo > 0.0) || hi < lo)
    throw Error(ErrorKind::config, "t grid must be 'lo:hi:step' with 0 < lo <= hi and step > 0");
  std::vector<double> grid;
  for (long i = 0;; ++i) {
    const double t = lo + static_cast<double>(i) * step;
    if (t > hi + 1e-9 * step) break;
    grid.push_back(t);
  }
  return grid;
}

}  // namespace dlfdp::io
