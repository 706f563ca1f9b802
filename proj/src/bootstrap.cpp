#include "eventlens/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "eventlens/descriptive.hpp"
#include "eventlens/error.hpp"

namespace eventlens {

BootstrapResult bootstrap_se(std::span<const double> values, int n_reps, const RngStream& rng) {
  if (values.empty()) throw DomainError("bootstrap_se: empty sample");
  if (values.size() < 2) throw DomainError("bootstrap_se: need at least 2 observations");
  if (n_reps < 2) throw DomainError("bootstrap_se: need at least 2 replicates");
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError("bootstrap_se: non-finite value in sample");
  }

  const std::size_t n = values.size();
  std::vector<double> means(static_cast<std::size_t>(n_reps));
  for (int r = 0; r < n_reps; ++r) {
    RngStream stream = rng.substream(static_cast<std::uint64_t>(r));
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[stream.uniform_index(n)];
    means[static_cast<std::size_t>(r)] = s / static_cast<double>(n);
  }

  BootstrapResult out;
  out.n_reps = n_reps;
  out.estimate = mean(values);
  out.se = sample_sd(means);
  std::sort(means.begin(), means.end());
  out.ci_low = quantile_sorted(means, 0.025);
  out.ci_high = quantile_sorted(means, 0.975);
  return out;
}

}  // namespace eventlens
