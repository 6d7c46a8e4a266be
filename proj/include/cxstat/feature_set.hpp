#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace cxstat {

/// An ordered collection of N points in R^d, stored row-major.
///
/// Immutable after construction. Construction rejects empty sets, a zero
/// dimension, a buffer whose length is not a multiple of `dim`, and any
/// non-finite coordinate.
class FeatureSet {
 public:
  FeatureSet(std::vector<double> values, std::size_t dim);

  std::size_t size() const noexcept { return values_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> point(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  std::vector<double> values_;
  std::size_t dim_;
};

/// H x W image with 1 or 3 interleaved channels, values in [0, 1].
///
/// Values outside [0, 1] are clamped on construction; NaN is rejected.
class ImageGrid {
 public:
  ImageGrid(std::size_t height, std::size_t width, std::size_t channels,
            std::vector<double> values);

  static ImageGrid filled(std::size_t height, std::size_t width,
                          std::size_t channels, double value);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return values_.size(); }

  double at(std::size_t row, std::size_t col, std::size_t ch = 0) const noexcept {
    return values_[(row * width_ + col) * channels_ + ch];
  }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const ImageGrid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::size_t channels_;
  std::vector<double> values_;
};

struct PatchSpec {
  std::size_t patch_size = 5;
  std::size_t stride = 2;
};

/// Number of patch offsets per axis for an extent `dim`.
std::size_t patch_count_along(std::size_t dim, const PatchSpec& spec);

/// Dense k x k patches at every offset stepping by `stride`; full patches only.
///
/// Patches are ordered row-major over their top-left offsets; within a patch
/// pixels are row-major with channels interleaved, so d = k * k * channels.
/// Throws ShapeError("patch exceeds image") if k > min(height, width).
FeatureSet extract_patches(const ImageGrid& image, const PatchSpec& spec);

/// Adjoint of extract_patches: scatter-adds per-patch vectors (N x d,
/// row-major) back onto an image-shaped buffer of height * width * channels.
std::vector<double> scatter_patches(std::span<const double> patch_values,
                                    std::size_t height, std::size_t width,
                                    std::size_t channels, const PatchSpec& spec);

/// Indices of a uniform sample of `n` out of `population`, without
/// replacement, in increasing order. Deterministic per seed.
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        std::uint64_t seed);

/// Uniform subsample without replacement; survivors keep their order.
/// Throws DomainError("sample larger than population") if n > set.size().
FeatureSet subsample(const FeatureSet& set, std::size_t n, std::uint64_t seed);

/// Subsamples the larger set down to the size of the smaller one.
std::pair<FeatureSet, FeatureSet> equalize(const FeatureSet& x, const FeatureSet& y,
                                           std::uint64_t seed);

}  // namespace cxstat
