#include "cxstat/feature_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cxstat/error.hpp"

namespace cxstat {

FeatureSet::FeatureSet(std::vector<double> values, std::size_t dim)
    : values_(std::move(values)), dim_(dim) {
  if (dim_ == 0) throw ShapeError("feature dimension must be positive");
  if (values_.empty()) throw ShapeError("feature set is empty");
  if (values_.size() % dim_ != 0) {
    throw ShapeError("feature buffer of length " + std::to_string(values_.size()) +
                     " is not a multiple of dim " + std::to_string(dim_));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw DomainError("non-finite coordinate at point " + std::to_string(k / dim_));
    }
  }
}

ImageGrid::ImageGrid(std::size_t height, std::size_t width, std::size_t channels,
                     std::vector<double> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
  if (height_ == 0 || width_ == 0) throw ShapeError("image extent must be positive");
  if (channels_ != 1 && channels_ != 3) throw ShapeError("image must have 1 or 3 channels");
  if (values_.size() != height_ * width_ * channels_) {
    throw ShapeError("image buffer holds " + std::to_string(values_.size()) +
                     " values, expected " + std::to_string(height_ * width_ * channels_));
  }
  for (double& v : values_) {
    if (std::isnan(v)) throw DomainError("NaN pixel value");
    v = std::clamp(v, 0.0, 1.0);
  }
}

ImageGrid ImageGrid::filled(std::size_t height, std::size_t width, std::size_t channels,
                            double value) {
  return ImageGrid(height, width, channels,
                   std::vector<double>(height * width * channels, value));
}

std::size_t patch_count_along(std::size_t dim, const PatchSpec& spec) {
  if (spec.patch_size == 0 || spec.stride == 0) {
    throw DomainError("patch size and stride must be positive");
  }
  if (spec.patch_size > dim) throw ShapeError("patch exceeds image");
  return (dim - spec.patch_size) / spec.stride + 1;
}

FeatureSet extract_patches(const ImageGrid& image, const PatchSpec& spec) {
  const std::size_t rows = patch_count_along(image.height(), spec);
  const std::size_t cols = patch_count_along(image.width(), spec);
  const std::size_t k = spec.patch_size;
  const std::size_t c = image.channels();
  const std::size_t row_len = k * c;
  const auto src = image.values();

  std::vector<double> out;
  out.reserve(rows * cols * k * row_len);
  for (std::size_t pr = 0; pr < rows; ++pr) {
    for (std::size_t pc = 0; pc < cols; ++pc) {
      const std::size_t top = pr * spec.stride;
      const std::size_t left = pc * spec.stride;
      for (std::size_t r = 0; r < k; ++r) {
        const auto first = src.begin() + static_cast<std::ptrdiff_t>(
                                              ((top + r) * image.width() + left) * c);
        out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(row_len));
      }
    }
  }
  return FeatureSet(std::move(out), k * row_len);
}

std::vector<double> scatter_patches(std::span<const double> patch_values,
                                    std::size_t height, std::size_t width,
                                    std::size_t channels, const PatchSpec& spec) {
  const std::size_t rows = patch_count_along(height, spec);
  const std::size_t cols = patch_count_along(width, spec);
  const std::size_t k = spec.patch_size;
  const std::size_t row_len = k * channels;
  if (patch_values.size() != rows * cols * k * row_len) {
    throw ShapeError("patch gradient does not match the patch grid");
  }

  std::vector<double> out(height * width * channels, 0.0);
  std::size_t src = 0;
  for (std::size_t pr = 0; pr < rows; ++pr) {
    for (std::size_t pc = 0; pc < cols; ++pc) {
      const std::size_t top = pr * spec.stride;
      const std::size_t left = pc * spec.stride;
      for (std::size_t r = 0; r < k; ++r) {
        double* dst = out.data() + ((top + r) * width + left) * channels;
        for (std::size_t e = 0; e < row_len; ++e) dst[e] += patch_values[src++];
      }
    }
  }
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        std::uint64_t seed) {
  if (n > population) throw DomainError("sample larger than population");
  std::vector<std::size_t> all(population);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (n == population) return all;

  std::vector<std::size_t> picked;
  picked.reserve(n);
  std::mt19937_64 rng(seed);
  // Selection sampling over a forward range keeps the picks sorted.
  std::sample(all.begin(), all.end(), std::back_inserter(picked), n, rng);
  return picked;
}

FeatureSet subsample(const FeatureSet& set, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample size must be positive");
  const auto picked = sample_indices(set.size(), n, seed);
  std::vector<double> out;
  out.reserve(n * set.dim());
  for (std::size_t i : picked) {
    const auto p = set.point(i);
    out.insert(out.end(), p.begin(), p.end());
  }
  return FeatureSet(std::move(out), set.dim());
}

std::pair<FeatureSet, FeatureSet> equalize(const FeatureSet& x, const FeatureSet& y,
                                           std::uint64_t seed) {
  if (x.dim() != y.dim()) {
    throw ShapeError("dimension mismatch: " + std::to_string(x.dim()) + " vs " +
                     std::to_string(y.dim()));
  }
  if (x.size() > y.size()) return {subsample(x, y.size(), seed), y};
  if (y.size() > x.size()) return {x, subsample(y, x.size(), seed)};
  return {x, y};
}

}  // namespace cxstat
