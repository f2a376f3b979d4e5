#include "seqembed/adam.hpp"

#include <cmath>

namespace seqembed {

void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg,
               std::uint64_t t) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (Parameter* p : params) {
    double* v = p->value.data.data();
    double* g = p->grad.data.data();
    double* m1 = p->adam_m.data.data();
    double* m2 = p->adam_v.data.data();
    const std::size_t n = p->value.size();
    for (std::size_t i = 0; i < n; ++i) {
      m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * g[i];
      m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m1[i] / bc1;
      const double v_hat = m2[i] / bc2;
      v[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
      g[i] = 0.0;
    }
  }
}

}  // namespace seqembed
