#pragma once

#include "dlfdp/common.hpp"

#include <vector>

namespace dlfdp {

/// Ground truth of a simulated instance.
struct ModelTruth {
  Vector beta;
  std::vector<Index> support;  // S0, ascending, 0-based
  std::vector<Index> nulls;    // I0, ascending, 0-based
  double sigma = 1.0;
  Matrix sigma_cov;  // Sigma
  Matrix theta;      // Sigma^{-1}
  Index s_max = 0;   // off-diagonal nonzeros per row of the pre-repair pattern
  bool noiseless = false;

  Index p() const noexcept { return beta.size(); }
  Index s0() const noexcept { return static_cast<Index>(support.size()); }
  Index p0() const noexcept { return static_cast<Index>(nulls.size()); }

  /// Fills support/nulls from beta.
  void index_support();
};

}  // namespace dlfdp
