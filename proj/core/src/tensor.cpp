#include "seqembed/tensor.hpp"

#include <cmath>
#include <sstream>

#include "seqembed/error.hpp"

namespace seqembed {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  for (std::size_t d : shape) {
    if (d == 0) throw ConfigError("tensor dimension must be positive, got shape " + shape_str(shape));
  }
  data.assign(shape_size(shape), 0.0);
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

bool Tensor::all_finite() const {
  for (double x : data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Parameter::Parameter(std::string n, std::vector<std::size_t> shape)
    : name(std::move(n)), value(shape), grad(shape), adam_m(shape), adam_v(std::move(shape)) {}

}  // namespace seqembed
