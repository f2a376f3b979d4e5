#include "seqembed/loss.hpp"

#include <cmath>
#include <string>

#include "seqembed/error.hpp"

namespace seqembed {

SoftmaxCeResult softmax_cross_entropy(const Tensor& logits, std::size_t true_class) {
  const std::size_t n = logits.size();
  if (true_class >= n) {
    throw DataError("softmax_cross_entropy: class " + std::to_string(true_class) +
                    " out of range for " + std::to_string(n) + " logits");
  }
  double max_logit = logits.data[0];
  for (std::size_t i = 1; i < n; ++i) max_logit = std::max(max_logit, logits.data[i]);

  SoftmaxCeResult res;
  res.probabilities = Tensor({n});
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(logits.data[i] - max_logit);
    res.probabilities.data[i] = e;
    sum += e;
  }
  const double inv = 1.0 / sum;
  for (std::size_t i = 0; i < n; ++i) res.probabilities.data[i] *= inv;
  // -log p[y] computed in shifted space to stay finite for extreme logits.
  res.loss = std::log(sum) - (logits.data[true_class] - max_logit);
  return res;
}

Tensor softmax(const Tensor& logits) {
  const std::size_t n = logits.size();
  double max_logit = logits.data[0];
  for (std::size_t i = 1; i < n; ++i) max_logit = std::max(max_logit, logits.data[i]);
  Tensor p({n});
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p.data[i] = std::exp(logits.data[i] - max_logit);
    sum += p.data[i];
  }
  const double inv = 1.0 / sum;
  for (std::size_t i = 0; i < n; ++i) p.data[i] *= inv;
  return p;
}

Tensor softmax_ce_grad(const Tensor& probabilities, std::size_t true_class) {
  Tensor g({probabilities.size()});
  for (std::size_t i = 0; i < probabilities.size(); ++i) g.data[i] = probabilities.data[i];
  g.data[true_class] -= 1.0;
  return g;
}

}  // namespace seqembed
