#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "cfid/common.hpp"

namespace cfid {

inline constexpr int kMaxDim = 3;

using MultiIndex = std::array<int, kMaxDim>;

/// The set { j in Z^d : |j_l| <= radius for every axis l }, stored row-major with
/// axis 0 slowest and every axis offset by +radius. The same layout is used for
/// the frequency grid, the drift modes and the convolution modes.
class IndexBox {
 public:
  IndexBox() = default;
  IndexBox(int dim, int radius);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  int extent() const { return 2 * radius_ + 1; }
  std::size_t size() const { return size_; }
  std::size_t center() const { return (size_ - 1) / 2; }

  /// Stride of axis `axis` in the flat layout.
  std::size_t stride(int axis) const { return strides_[axis]; }

  bool contains(const MultiIndex& j) const;
  std::size_t flatten(const MultiIndex& j) const;
  MultiIndex unflatten(std::size_t flat) const;

  /// Flat index of -j.
  std::size_t mirror(std::size_t flat) const { return size_ - 1 - flat; }

  /// True when j is the zero index or its first nonzero component is positive.
  static bool is_nonnegative_half(const MultiIndex& j, int dim);

  friend bool operator==(const IndexBox& a, const IndexBox& b) {
    return a.dim_ == b.dim_ && a.radius_ == b.radius_;
  }

 private:
  int dim_ = 0;
  int radius_ = 0;
  std::size_t size_ = 0;
  std::array<std::size_t, kMaxDim> strides_{};
};

}  // namespace cfid
