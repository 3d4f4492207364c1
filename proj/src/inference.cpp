#include "dlfdp/inference.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dlfdp {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorKind::config, "alpha must lie in (0, 1)");
}

void require_finite(const Vector& z) {
  if (!z.allFinite()) throw Error(ErrorKind::invalid_data, "statistics contain non-finite values");
}

// |z| cutoff equivalent to a two-sided p-value bound: p_j <= level  <=>  |z_j| >= cutoff.
double cutoff_for_level(double level) {
  if (level >= 1.0) return 0.0;
  return -normal_quantile(level / 2.0);
}

std::vector<Index> sorted_by_p(const Vector& pvals) {
  std::vector<Index> order(static_cast<std::size_t>(pvals.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return pvals[a] < pvals[b]; });
  return order;
}

Vector p_values(const Vector& z) {
  Vector out(z.size());
  for (Index j = 0; j < z.size(); ++j) out[j] = two_sided_p(z[j]);
  return out;
}

std::vector<bool> null_mask(const ModelTruth& truth) {
  std::vector<bool> mask(static_cast<std::size_t>(truth.p()), false);
  for (Index j : truth.nulls) mask[j] = true;
  return mask;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::dlasso_fdp: return "dlasso_fdp";
    case Method::dlasso_bh: return "dlasso_bh";
    case Method::dlasso_fwer: return "dlasso_fwer";
    case Method::bonferroni: return "bonferroni";
  }
  return "unknown";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw Error(ErrorKind::config, "normal_quantile needs u in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), u);
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double fdp_hat(const Vector& z, double t) {
  Index r = 0;
  for (Index j = 0; j < z.size(); ++j)
    if (std::abs(z[j]) > t) ++r;
  return 2.0 * static_cast<double>(z.size()) * normal_cdf(-t) /
         static_cast<double>(std::max<Index>(r, 1));
}

double find_threshold(const Vector& z, double alpha) {
  require_alpha(alpha);
  require_finite(z);
  const Index p = z.size();
  if (p == 0) throw Error(ErrorKind::invalid_dimension, "empty statistic vector");

  // a[0] >= ... >= a[p-1] are the sorted |z|, a[p] = 0.
  std::vector<double> a(static_cast<std::size_t>(p + 1), 0.0);
  for (Index j = 0; j < p; ++j) a[j] = std::abs(z[j]);
  std::sort(a.begin(), a.begin() + p, std::greater<>());

  const double two_p = 2.0 * static_cast<double>(p);
  // Interval k is [a[k], a[k-1]) on which exactly k statistics exceed t.
  // Scanning k downward visits the intervals left to right.
  for (Index k = p; k >= 0; --k) {
    const double lower = a[k];
    const double upper = k > 0 ? a[k - 1] : std::numeric_limits<double>::infinity();
    if (!(lower < upper)) continue;
    const double level = alpha * static_cast<double>(std::max<Index>(k, 1)) / two_p;
    double t = std::max(lower, std::max(0.0, -normal_quantile(level)));
    // Rounding in the quantile can leave fdp_hat a hair above alpha; step
    // right by a doubling increment until it is not.
    double step = std::numeric_limits<double>::denorm_min();
    for (int nudge = 0; nudge < 2200 && t < upper; ++nudge) {
      if (fdp_hat(z, t) <= alpha) return t;
      t = std::max(std::nextafter(t, std::numeric_limits<double>::infinity()), t + step);
      step *= 2.0;
    }
  }
  // Unreachable: on the last interval fdp_hat(t) = 2 p Phi(-t) -> 0.
  throw Error(ErrorKind::invalid_data, "threshold search failed");
}

SelectionResult select_fdp(const Vector& z, double alpha) {
  SelectionResult out;
  out.method = Method::dlasso_fdp;
  out.alpha = alpha;
  out.threshold = find_threshold(z, alpha);
  for (Index j = 0; j < z.size(); ++j)
    if (std::abs(z[j]) > out.threshold) out.selected.push_back(j);
  out.fdp_hat_at_threshold = fdp_hat(z, out.threshold);
  return out;
}

SelectionResult select_bh(const Vector& z, double alpha) {
  require_alpha(alpha);
  require_finite(z);
  const Index p = z.size();
  const Vector pv = p_values(z);
  const auto order = sorted_by_p(pv);
  Index k_star = 0;
  for (Index k = 1; k <= p; ++k)
    if (pv[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(p)) k_star = k;

  SelectionResult out;
  out.method = Method::dlasso_bh;
  out.alpha = alpha;
  const double level = static_cast<double>(std::max<Index>(k_star, 1)) * alpha / static_cast<double>(p);
  out.threshold = cutoff_for_level(level);
  for (Index k = 0; k < k_star; ++k) out.selected.push_back(order[k]);
  std::sort(out.selected.begin(), out.selected.end());
  out.fdp_hat_at_threshold = fdp_hat(z, out.threshold);
  return out;
}

SelectionResult select_fwer(const Vector& z, double alpha) {
  require_alpha(alpha);
  require_finite(z);
  const Index p = z.size();
  const Vector pv = p_values(z);
  const auto order = sorted_by_p(pv);
  Index rejected = 0;
  while (rejected < p && pv[order[rejected]] <= alpha / static_cast<double>(p - rejected))
    ++rejected;

  SelectionResult out;
  out.method = Method::dlasso_fwer;
  out.alpha = alpha;
  out.threshold = cutoff_for_level(alpha / static_cast<double>(std::max<Index>(p - rejected, 1)));
  out.selected.assign(order.begin(), order.begin() + rejected);
  std::sort(out.selected.begin(), out.selected.end());
  out.fdp_hat_at_threshold = fdp_hat(z, out.threshold);
  return out;
}

SelectionResult select_bonferroni(const Vector& z, double alpha) {
  require_alpha(alpha);
  require_finite(z);
  const Index p = z.size();
  SelectionResult out;
  out.method = Method::bonferroni;
  out.alpha = alpha;
  out.threshold = cutoff_for_level(alpha / static_cast<double>(p));
  for (Index j = 0; j < p; ++j)
    if (two_sided_p(z[j]) <= alpha / static_cast<double>(p)) out.selected.push_back(j);
  out.fdp_hat_at_threshold = fdp_hat(z, out.threshold);
  return out;
}

std::vector<Index> rank_by_z(const Vector& z) {
  require_finite(z);
  std::vector<Index> order(static_cast<std::size_t>(z.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(z[a]) > std::abs(z[b]); });
  return order;
}

EvalMetrics evaluate(const std::vector<Index>& selected, const ModelTruth& truth) {
  if (truth.s0() == 0)
    throw Error(ErrorKind::undefined_tpp, "TPP is undefined when the support is empty");
  const auto is_null = null_mask(truth);
  EvalMetrics m;
  m.discoveries = static_cast<Index>(selected.size());
  for (Index j : selected) {
    if (j < 0 || j >= truth.p())
      throw Error(ErrorKind::dimension_mismatch, "selected index out of range", j);
    if (is_null[j]) ++m.false_discoveries;
  }
  m.fdp = static_cast<double>(m.false_discoveries) /
          static_cast<double>(std::max<Index>(m.discoveries, 1));
  m.tpp = static_cast<double>(m.discoveries - m.false_discoveries) /
          static_cast<double>(truth.s0());
  return m;
}

std::vector<CurvePoint> fdp_tpp_curve(const std::vector<Index>& ranking,
                                      const ModelTruth& truth) {
  const Index p = truth.p();
  if (static_cast<Index>(ranking.size()) != p)
    throw Error(ErrorKind::invalid_data, "ranking length differs from p");
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  for (Index j : ranking) {
    if (j < 0 || j >= p || seen[j])
      throw Error(ErrorKind::invalid_data, "ranking is not a permutation");
    seen[j] = true;
  }
  const Index s0 = truth.s0();
  if (s0 == 0) throw Error(ErrorKind::undefined_tpp, "FDP-TPP curve needs s0 >= 1");

  const auto is_null = null_mask(truth);
  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(s0));
  Index hits = 0;
  for (Index i = 0; i < p && hits < s0; ++i) {
    if (is_null[ranking[i]]) continue;
    ++hits;
    const double prefix = static_cast<double>(i + 1);
    curve.push_back({static_cast<double>(hits) / static_cast<double>(s0),
                     (prefix - static_cast<double>(hits)) / prefix});
  }
  return curve;
}

double true_fdp(const Vector& z, double t, const ModelTruth& truth) {
  const auto is_null = null_mask(truth);
  Index r = 0, v = 0;
  for (Index j = 0; j < z.size(); ++j) {
    if (std::abs(z[j]) > t) {
      ++r;
      if (is_null[j]) ++v;
    }
  }
  return static_cast<double>(v) / static_cast<double>(std::max<Index>(r, 1));
}

}  // namespace dlfdp
