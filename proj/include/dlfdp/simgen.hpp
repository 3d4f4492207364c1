#pragma once

// Simulated instances of y = X beta + sigma eps with Gaussian rows drawn from
// an Erdos-Renyi structured precision matrix.

#include "dlfdp/common.hpp"
#include "dlfdp/model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>

namespace dlfdp {

using Rng = std::mt19937_64;

/// Recorded in every output artifact alongside the seed.
inline constexpr std::string_view kGeneratorName = "mt19937_64[seed_seq(seed,rep)]+boost.random";

/// Independent stream for replication `rep` of experiment `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t rep);

enum class SignMode { positive, random };

std::string_view to_string(SignMode mode);
SignMode parse_sign_mode(const std::string& text);

struct SimConfig {
  Index p = 200;
  Index n = 150;
  Index s0 = 10;
  double beta1 = 1.0;
  double sigma = 1.0;
  double edge_prob = 0.05;
  double magnitude_low = 0.4;
  double magnitude_high = 0.8;
  SignMode sign_mode = SignMode::positive;
  double spd_eps = 0.05;
  /// One binomial degree per row instead of a single shared draw.
  bool per_row_degree = false;
  /// Rescale the repaired precision matrix to unit diagonal.
  bool unit_diagonal = false;
  std::uint64_t seed = 1;
  int reps = 100;
  double alpha = 0.1;

  void validate() const;
};

struct PrecisionPair {
  Matrix theta;
  Matrix sigma;
  Index degree = 0;  // binomial draw (maximum over rows when per_row_degree)
};

PrecisionPair gen_precision_er(Index p, const SimConfig& cfg, Rng& rng);

/// Rows i.i.d. N(0, sigma): X = G L' with L the lower Cholesky factor.
Matrix sample_design(Index n, const Matrix& sigma, Rng& rng);

std::pair<Dataset, ModelTruth> gen_dataset(const SimConfig& cfg, Rng& rng);

/// gen_dataset on make_stream(cfg.seed, rep).
std::pair<Dataset, ModelTruth> gen_replication(const SimConfig& cfg, std::uint64_t rep);

/// Largest number of off-diagonal nonzeros in any row.
Index max_row_sparsity(const Matrix& m);

}  // namespace dlfdp
