#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace seqembed {

/// Dense row-major tensor of doubles. 64-bit is the reference precision:
/// every gradient and reproducibility contract in the test suite assumes it.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape[i]; }

  // 2-D accessors; shape must be rank 2.
  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }
  double* row(std::size_t r) { return data.data() + r * shape[1]; }
  const double* row(std::size_t r) const { return data.data() + r * shape[1]; }

  void fill(double v);
  bool all_finite() const;
};

std::size_t shape_size(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

/// Trainable tensor plus its gradient and Adam moment buffers. The three
/// companion buffers always share the value's shape; moments start at zero.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;

  Parameter() = default;
  Parameter(std::string n, std::vector<std::size_t> shape);

  void zero_grad() { grad.fill(0.0); }
};

/// T x C step matrix where only the first valid_len rows carry content.
/// Rows at index >= valid_len are all-zero, and no operation consuming a
/// MaskedSequence may let them influence its output.
struct MaskedSequence {
  Tensor steps;
  std::size_t valid_len = 0;

  MaskedSequence() = default;
  MaskedSequence(std::size_t t, std::size_t c, std::size_t valid)
      : steps({t, c}), valid_len(valid) {}

  std::size_t step_count() const { return steps.shape[0]; }
  std::size_t channels() const { return steps.shape[1]; }
};

}  // namespace seqembed
