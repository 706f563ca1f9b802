#pragma once

#include <span>

#include "eventlens/rng.hpp"

namespace eventlens {

struct BootstrapResult {
  double estimate = 0.0;  // plug-in mean of the sample
  double se = 0.0;        // SD of replicate means
  double ci_low = 0.0;    // 2.5th percentile of replicate means
  double ci_high = 0.0;   // 97.5th percentile
  int n_reps = 0;
};

/// Nonparametric bootstrap of the sample mean. Replicate r draws from
/// rng.substream(r), so the result depends only on (values, n_reps, rng).
BootstrapResult bootstrap_se(std::span<const double> values, int n_reps, const RngStream& rng);

}  // namespace eventlens
