#pragma once

#include <cstddef>
#include <vector>

#include "cxstat/affinity.hpp"
#include "cxstat/blur.hpp"
#include "cxstat/feature_set.hpp"

namespace cxstat {

/// Derivative of a scalar loss, shaped like the differentiated variable:
/// {N, d} for feature sets, {H, W, C} for images.
struct GradientField {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  double norm() const noexcept;
  double max_abs() const noexcept;
};

struct LossGradient {
  double loss = 0.0;
  GradientField gradient;
};

// Gradients flow only into X (the generated side); Y is a constant target.
// argmin/argmax selections are held fixed (subgradient convention).

LossGradient contextual_loss_gradient(const FeatureSet& x, const FeatureSet& y,
                                      const ContextualParams& params);
GradientField grad_contextual(const FeatureSet& x, const FeatureSet& y,
                              const ContextualParams& params);

LossGradient chamfer_loss_gradient(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                                   bool center_by_target_mean = false);
/// A point coinciding with its nearest target under l2 gets a zero subgradient.
GradientField grad_chamfer(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                           bool center_by_target_mean = false);

/// sum over pixels of (blur(x) - blur(y))^2 and its gradient 2 * adjoint(blur(x) - blur(y)).
LossGradient grad_lowfreq_l2(const ImageGrid& x, const ImageGrid& y, const BlurKernel& k);
double lowfreq_l2(const ImageGrid& x, const ImageGrid& y, const BlurKernel& k);

/// sum |x - y| with gradient sign(x - y), sign(0) = 0.
LossGradient grad_l1(const ImageGrid& x, const ImageGrid& y);
double l1_distance(const ImageGrid& x, const ImageGrid& y);

/// Contextual loss between the patch sets of two same-size images, with the
/// patch gradients scatter-added back onto pixels.
LossGradient grad_contextual_image(const ImageGrid& x, const ImageGrid& y,
                                   const PatchSpec& spec, const ContextualParams& params);

}  // namespace cxstat
