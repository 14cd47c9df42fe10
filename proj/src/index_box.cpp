#include "cfid/index_box.hpp"

#include <cstdlib>

namespace cfid {

IndexBox::IndexBox(int dim, int radius) : dim_(dim), radius_(radius) {
  if (dim < 1 || dim > kMaxDim) {
    throw ConfigError("dimension must be in [1, " + std::to_string(kMaxDim) +
                      "], got " + std::to_string(dim));
  }
  if (radius < 0) throw ConfigError("index box radius must be non-negative");
  const auto n = static_cast<std::size_t>(extent());
  size_ = 1;
  for (int axis = dim - 1; axis >= 0; --axis) {
    strides_[axis] = size_;
    size_ *= n;
  }
}

bool IndexBox::contains(const MultiIndex& j) const {
  for (int axis = 0; axis < dim_; ++axis) {
    if (std::abs(j[axis]) > radius_) return false;
  }
  return true;
}

std::size_t IndexBox::flatten(const MultiIndex& j) const {
  std::size_t flat = 0;
  for (int axis = 0; axis < dim_; ++axis) {
    flat += static_cast<std::size_t>(j[axis] + radius_) * strides_[axis];
  }
  return flat;
}

MultiIndex IndexBox::unflatten(std::size_t flat) const {
  MultiIndex j{};
  for (int axis = 0; axis < dim_; ++axis) {
    j[axis] = static_cast<int>(flat / strides_[axis]) - radius_;
    flat %= strides_[axis];
  }
  return j;
}

bool IndexBox::is_nonnegative_half(const MultiIndex& j, int dim) {
  for (int axis = 0; axis < dim; ++axis) {
    if (j[axis] != 0) return j[axis] > 0;
  }
  return true;
}

}  // namespace cfid
