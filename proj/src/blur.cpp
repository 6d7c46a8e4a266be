#include "cxstat/blur.hpp"

#include <cmath>

#include "cxstat/error.hpp"

namespace cxstat {
namespace {

std::vector<std::size_t> reflected_offsets(std::size_t n, std::size_t radius) {
  // table[p * size + a] = reflect(p + a - radius)
  const std::size_t size = 2 * radius + 1;
  std::vector<std::size_t> table(n * size);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t a = 0; a < size; ++a) {
      table[p * size + a] = reflect_index(static_cast<std::ptrdiff_t>(p + a) -
                                              static_cast<std::ptrdiff_t>(radius),
                                          n);
    }
  }
  return table;
}

void check_buffer(std::span<const double> values, std::size_t h, std::size_t w, std::size_t c) {
  if (values.size() != h * w * c) throw ShapeError("blur buffer does not match its shape");
}

}  // namespace

BlurKernel BlurKernel::gaussian(std::size_t size, double sigma) {
  if (size == 0 || size % 2 == 0) throw DomainError("blur kernel size must be odd");
  if (!(sigma > 0.0)) throw DomainError("blur sigma must be positive");
  BlurKernel k;
  k.size = size;
  k.sigma = sigma;
  k.profile.resize(size);
  const auto r = static_cast<double>(size / 2);
  double sum = 0.0;
  for (std::size_t a = 0; a < size; ++a) {
    const double da = static_cast<double>(a) - r;
    k.profile[a] = std::exp(-(da * da) / (2.0 * sigma * sigma));
    sum += k.profile[a];
  }
  for (double& w : k.profile) w /= sum;
  k.weights.resize(size * size);
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = 0; b < size; ++b) k.weights[a * size + b] = k.profile[a] * k.profile[b];
  }
  return k;
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

namespace {

// One 1D pass along rows (axis 0) or columns (axis 1). `adjoint` scatters
// instead of gathering.
std::vector<double> pass(std::span<const double> in, std::size_t height, std::size_t width,
                         std::size_t channels, const BlurKernel& k, int axis, bool adjoint) {
  const std::size_t n = axis == 0 ? height : width;
  const auto table = reflected_offsets(n, k.radius());
  std::vector<double> out(in.size(), 0.0);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t p = axis == 0 ? r : c;
      const std::size_t here = (r * width + c) * channels;
      for (std::size_t a = 0; a < k.size; ++a) {
        const std::size_t q = table[p * k.size + a];
        const std::size_t there = (axis == 0 ? (q * width + c) : (r * width + q)) * channels;
        const double w = k.profile[a];
        if (adjoint) {
          for (std::size_t ch = 0; ch < channels; ++ch) out[there + ch] += w * in[here + ch];
        } else {
          for (std::size_t ch = 0; ch < channels; ++ch) out[here + ch] += w * in[there + ch];
        }
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> blur_values(std::span<const double> values, std::size_t height,
                                std::size_t width, std::size_t channels, const BlurKernel& k) {
  check_buffer(values, height, width, channels);
  const auto horizontal = pass(values, height, width, channels, k, 1, false);
  return pass(horizontal, height, width, channels, k, 0, false);
}

std::vector<double> blur_adjoint(std::span<const double> values, std::size_t height,
                                 std::size_t width, std::size_t channels, const BlurKernel& k) {
  check_buffer(values, height, width, channels);
  const auto vertical = pass(values, height, width, channels, k, 0, true);
  return pass(vertical, height, width, channels, k, 1, true);
}

ImageGrid gaussian_blur(const ImageGrid& image, const BlurKernel& k) {
  return ImageGrid(image.height(), image.width(), image.channels(),
                   blur_values(image.values(), image.height(), image.width(),
                               image.channels(), k));
}

}  // namespace cxstat
