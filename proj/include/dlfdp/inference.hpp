#pragma once

#include "dlfdp/common.hpp"
#include "dlfdp/model.hpp"

#include <string_view>
#include <vector>

namespace dlfdp {

enum class Method { dlasso_fdp, dlasso_bh, dlasso_fwer, bonferroni };

std::string_view to_string(Method method);

struct SelectionResult {
  Method method = Method::dlasso_fdp;
  /// t_alpha for dlasso_fdp; the implied |z| cutoff for the p-value methods.
  double threshold = 0.0;
  std::vector<Index> selected;  // ascending, 0-based
  double fdp_hat_at_threshold = 0.0;
  double alpha = 0.0;
};

struct EvalMetrics {
  Index false_discoveries = 0;  // V
  Index discoveries = 0;        // R
  double fdp = 0.0;
  double tpp = 0.0;
};

struct CurvePoint {
  double tpp_level = 0.0;
  double fdp = 0.0;
};

/// Standard normal CDF, via erfc.
double normal_cdf(double x);
/// Inverse of normal_cdf; throws for u outside (0, 1).
double normal_quantile(double u);

/// Two-sided p-value 2 Phi(-|z|).
double two_sided_p(double z);

/// 2 p Phi(-t) / max(#{|z_j| > t}, 1). Not capped at 1.
double fdp_hat(const Vector& z, double t);

/// Smallest t >= 0 with fdp_hat(z, t) <= alpha, solved exactly on the
/// piecewise structure between consecutive order statistics of |z|.
double find_threshold(const Vector& z, double alpha);

SelectionResult select_fdp(const Vector& z, double alpha);
/// Benjamini-Hochberg step-up on two-sided normal p-values.
SelectionResult select_bh(const Vector& z, double alpha);
/// Holm step-down on two-sided normal p-values.
SelectionResult select_fwer(const Vector& z, double alpha);
SelectionResult select_bonferroni(const Vector& z, double alpha);

/// Order by |z| descending, ties by ascending index.
std::vector<Index> rank_by_z(const Vector& z);

EvalMetrics evaluate(const std::vector<Index>& selected, const ModelTruth& truth);

/// For each k = 1..s0, the FDP of the shortest ranking prefix holding k
/// true positives.
std::vector<CurvePoint> fdp_tpp_curve(const std::vector<Index>& ranking,
                                      const ModelTruth& truth);

/// True FDP of the rule |z_j| > t.
double true_fdp(const Vector& z, double t, const ModelTruth& truth);

}  // namespace dlfdp
