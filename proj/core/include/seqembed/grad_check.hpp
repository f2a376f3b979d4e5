#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqembed/tensor.hpp"

namespace seqembed {

struct GradCheckItem {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t below_noise_floor = 0;  // both sides too small to measure
  std::vector<GradCheckItem> failures;  // entries whose rel_error > tolerance

  bool passed() const { return failures.empty(); }
};

/// Central-difference verification of analytic gradients.
///
/// The caller populates param->grad (one backward pass) before calling.
/// loss_fn recomputes the scalar loss from the current parameter values and
/// must not read the stored gradients. Each element is perturbed by +-h and
/// compared as |a - n| / max(|a|, |n|, 1e-8). Parameters larger than
/// max_elements_per_param are subsampled deterministically from `seed`.
///
/// Elements where both the analytic and the numeric value lie below 1e-6 are
/// counted but never flagged: at h = 1e-5 the symmetric difference of a
/// double-precision loss carries ~5e-12 of roundoff, so such elements cannot
/// be told apart from measurement noise. A gradient that is wrongly zero (or
/// wrongly large) still trips the check, because then one side is above the
/// floor.
GradCheckReport grad_check(const std::vector<Parameter*>& params,
                           const std::function<double()>& loss_fn, double tolerance,
                           std::size_t max_elements_per_param = 256,
                           std::uint64_t seed = 0, double h = 1e-5);

}  // namespace seqembed
