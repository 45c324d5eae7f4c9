#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ocp/environment.hpp"
#include "ocp/errors.hpp"
#include "ocp/random.hpp"

namespace ocp::detail {

/// Bijection between the box [-L, L]^d and [0, (2L+1)^d).
class BoxIndex {
 public:
  BoxIndex(int d, int radius) : d_(d), radius_(radius), side_(2 * static_cast<std::uint64_t>(radius) + 1) {
    require(d >= 1 && d <= kMaxMaskDim, "simulation dimension must lie in [1, 32]");
    require(radius >= 1, "box radius must be >= 1");
    stride_.resize(static_cast<std::size_t>(d));
    uint128 s = 1;
    for (int i = 0; i < d; ++i) {
      stride_[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(s);
      s *= side_;
      require(s <= (static_cast<uint128>(1) << 62),
              "box (2L+1)^d too large to index: L=" + std::to_string(radius) + ", d=" + std::to_string(d));
    }
  }

  int dim() const noexcept { return d_; }
  int radius() const noexcept { return radius_; }
  std::uint64_t stride(int axis) const noexcept { return stride_[static_cast<std::size_t>(axis)]; }

  bool contains(std::span<const std::int64_t> x) const noexcept {
    for (std::int64_t c : x)
      if (c < -radius_ || c > radius_) return false;
    return true;
  }

  std::uint64_t pack(std::span<const std::int64_t> x) const noexcept {
    std::uint64_t key = 0;
    for (int i = 0; i < d_; ++i)
      key += static_cast<std::uint64_t>(x[static_cast<std::size_t>(i)] + radius_) * stride_[static_cast<std::size_t>(i)];
    return key;
  }

  std::int64_t coord(std::uint64_t key, int axis) const noexcept {
    return static_cast<std::int64_t>((key / stride_[static_cast<std::size_t>(axis)]) % side_) - radius_;
  }

  void unpack(std::uint64_t key, std::int64_t* out) const noexcept {
    for (int i = 0; i < d_; ++i) {
      out[i] = static_cast<std::int64_t>(key % side_) - radius_;
      key /= side_;
    }
  }

  Vertex vertex(std::uint64_t key) const {
    std::vector<std::int64_t> c(static_cast<std::size_t>(d_));
    unpack(key, c.data());
    return Vertex(std::move(c));
  }

 private:
  int d_;
  int radius_;
  std::uint64_t side_;
  std::vector<std::uint64_t> stride_;
};

}  // namespace ocp::detail
