#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cxstat/feature_set.hpp"

namespace cxstat {

/// Normalized, radially symmetric size x size Gaussian weights. The 2D
/// weights are the outer product of the 1D `profile`, and blurring runs as
/// two 1D passes.
struct BlurKernel {
  std::size_t size = 21;
  double sigma = 3.0;
  std::vector<double> profile;
  std::vector<double> weights;

  /// Throws DomainError unless size is odd and sigma > 0.
  static BlurKernel gaussian(std::size_t size, double sigma);

  std::size_t radius() const noexcept { return size / 2; }
  double at(std::size_t r, std::size_t c) const noexcept { return weights[r * size + c]; }
};

/// Index into [0, n) under mirror reflection that excludes the edge sample
/// (..., 2, 1, 0, 1, 2, ...); repeats for offsets beyond one period.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept;

/// Per-channel 2D convolution of an interleaved H x W x C buffer with
/// reflect padding.
std::vector<double> blur_values(std::span<const double> values, std::size_t height,
                                std::size_t width, std::size_t channels, const BlurKernel& k);

/// The exact adjoint of blur_values: <blur(a), b> == <a, blur_adjoint(b)>.
std::vector<double> blur_adjoint(std::span<const double> values, std::size_t height,
                                 std::size_t width, std::size_t channels, const BlurKernel& k);

ImageGrid gaussian_blur(const ImageGrid& image, const BlurKernel& k);

}  // namespace cxstat
