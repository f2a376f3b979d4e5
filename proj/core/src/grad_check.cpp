#include "seqembed/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "seqembed/rng.hpp"

namespace seqembed {

GradCheckReport grad_check(const std::vector<Parameter*>& params,
                           const std::function<double()>& loss_fn, double tolerance,
                           std::size_t max_elements_per_param, std::uint64_t seed,
                           double h) {
  GradCheckReport report;
  RngStream rng = RngStream::derive(seed, RngComponent::kGradCheck);

  for (Parameter* p : params) {
    const std::size_t n = p->value.size();
    std::vector<std::size_t> picks;
    if (n <= max_elements_per_param) {
      picks.resize(n);
      for (std::size_t i = 0; i < n; ++i) picks[i] = i;
    } else {
      picks.reserve(max_elements_per_param);
      for (std::size_t i = 0; i < max_elements_per_param; ++i)
        picks.push_back(rng.uniform_index(n));
      std::sort(picks.begin(), picks.end());
      picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
    }

    for (std::size_t idx : picks) {
      const double saved = p->value.data[idx];
      p->value.data[idx] = saved + h;
      const double loss_plus = loss_fn();
      p->value.data[idx] = saved - h;
      const double loss_minus = loss_fn();
      p->value.data[idx] = saved;

      const double numeric = (loss_plus - loss_minus) / (2.0 * h);
      const double analytic = p->grad.data[idx];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;

      ++report.checked;
      constexpr double kNoiseFloor = 1e-6;
      if (std::abs(analytic) < kNoiseFloor && std::abs(numeric) < kNoiseFloor) {
        ++report.below_noise_floor;
        continue;
      }
      report.max_rel_error = std::max(report.max_rel_error, rel);
      if (rel > tolerance) {
        report.failures.push_back({p->name, idx, analytic, numeric, rel});
      }
    }
  }
  return report;
}

}  // namespace seqembed
