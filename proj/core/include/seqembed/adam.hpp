#pragma once

#include <cstdint>
#include <vector>

#include "seqembed/tensor.hpp"

namespace seqembed {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update, applied in place. t counts from 1 and must
/// advance by one per call. Gradients are cleared afterwards.
void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg,
               std::uint64_t t);

}  // namespace seqembed
