#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cxstat/blur.hpp"
#include "cxstat/error.hpp"
#include "cxstat/gradients.hpp"
#include "support/synthetic.hpp"

using namespace cxstat;

namespace {

double inner(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

TEST(BlurKernel, NormalizedAndRadiallySymmetric) {
  const auto k = BlurKernel::gaussian(21, 3.0);
  ASSERT_EQ(k.weights.size(), 441u);
  EXPECT_NEAR(std::accumulate(k.weights.begin(), k.weights.end(), 0.0), 1.0, 1e-9);
  for (std::size_t r = 0; r < 21; ++r) {
    for (std::size_t c = 0; c < 21; ++c) {
      EXPECT_GE(k.at(r, c), 0.0);
      EXPECT_DOUBLE_EQ(k.at(r, c), k.at(c, r));
      EXPECT_DOUBLE_EQ(k.at(r, c), k.at(20 - r, c));
    }
  }
  EXPECT_THROW(BlurKernel::gaussian(4, 1.0), DomainError);
  EXPECT_THROW(BlurKernel::gaussian(5, 0.0), DomainError);
}

TEST(ReflectIndex, MirrorsWithoutEdgeRepeat) {
  EXPECT_EQ(reflect_index(-1, 5), 1u);
  EXPECT_EQ(reflect_index(-2, 5), 2u);
  EXPECT_EQ(reflect_index(5, 5), 3u);
  EXPECT_EQ(reflect_index(12, 5), 4u);
  EXPECT_EQ(reflect_index(-7, 1), 0u);
}

TEST(Blur, ConstantImageUnchanged) {
  const auto img = ImageGrid::filled(16, 12, 3, 0.37);
  const auto out = gaussian_blur(img, BlurKernel::gaussian(21, 3.0));
  for (double v : out.values()) EXPECT_NEAR(v, 0.37, 1e-12);
}

TEST(Blur, CenteredImpulseGivesKernel) {
  std::vector<double> v(41 * 41, 0.0);
  v[20 * 41 + 20] = 1.0;
  const auto k = BlurKernel::gaussian(21, 3.0);
  const auto out = blur_values(v, 41, 41, 1, k);
  for (std::size_t r = 0; r < 21; ++r) {
    for (std::size_t c = 0; c < 21; ++c) {
      EXPECT_NEAR(out[(10 + r) * 41 + 10 + c], k.at(r, c), 1e-15);
    }
  }
  EXPECT_NEAR(out[0], 0.0, 1e-15);
}

TEST(Blur, AdjointIdentity) {
  const auto k = BlurKernel::gaussian(21, 3.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t ch = seed % 2 ? 3 : 1;
    const auto a = synth::uniform_image(16, 16, ch, seed);
    const auto b = synth::uniform_image(16, 16, ch, seed + 100);
    const double lhs = inner(blur_values(a.values(), 16, 16, ch, k), b.values());
    const double rhs = inner(a.values(), blur_adjoint(b.values(), 16, 16, ch, k));
    EXPECT_NEAR(lhs, rhs, 1e-9);
  }
}

TEST(ContextualGradient, VanishesAtIdentity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = synth::uniform_points(16, 2, seed);
    const auto g = grad_contextual(x, x, {DistanceKind::l2});
    for (std::size_t i = 0; i < 16; ++i) {
      EXPECT_LE(std::hypot(g.values[2 * i], g.values[2 * i + 1]), 1e-6);
    }
  }
}

TEST(ContextualGradient, DuplicatedPointsShareGradient) {
  const FeatureSet x({0.1, 0.2, 0.1, 0.2, 0.9, 0.4}, 2);
  const FeatureSet y({0.0, 0.0, 1.0, 0.5, 0.3, 0.9}, 2);
  for (auto kind : {DistanceKind::l2, DistanceKind::cosine, DistanceKind::squared_l2}) {
    const auto g = grad_contextual(x, y, {kind, 0.5});
    if (kind == DistanceKind::l2) {
      EXPECT_GT(std::fabs(g.values[0]) + std::fabs(g.values[1]), 1e-3);
    }
    EXPECT_DOUBLE_EQ(g.values[0], g.values[2]);
    EXPECT_DOUBLE_EQ(g.values[1], g.values[3]);
  }
}

TEST(ContextualGradient, PermutationEquivariant) {
  const auto x = synth::gaussian_cloud(6, 3, 1), y = synth::gaussian_cloud(6, 3, 2);
  const std::vector<std::size_t> order{3, 0, 5, 1, 4, 2};
  std::vector<double> pv;
  for (auto i : order) pv.insert(pv.end(), x.point(i).begin(), x.point(i).end());
  const auto g = grad_contextual(x, y, {DistanceKind::l2});
  const auto pg = grad_contextual(FeatureSet(pv, 3), y, {DistanceKind::l2});
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(pg.values[r * 3 + c], g.values[order[r] * 3 + c], 1e-12);
    }
  }
}

TEST(ContextualGradient, LossMatchesForwardPass) {
  const auto x = synth::gaussian_cloud(9, 4, 3), y = synth::gaussian_cloud(9, 4, 4);
  const ContextualParams p{DistanceKind::cosine};
  EXPECT_DOUBLE_EQ(contextual_loss_gradient(x, y, p).loss, contextual_loss(x, y, p));
}

TEST(ChamferGradient, Examples) {
  auto g = grad_chamfer(FeatureSet({1, 0}, 2), FeatureSet({0, 0}, 2), DistanceKind::l2);
  EXPECT_DOUBLE_EQ(g.values[0], 1.0);
  EXPECT_DOUBLE_EQ(g.values[1], 0.0);
  g = grad_chamfer(FeatureSet({0, 0, 3, 4}, 2), FeatureSet({0, 0}, 2), DistanceKind::l2);
  EXPECT_EQ(g.values[0], 0.0);
  EXPECT_EQ(g.values[1], 0.0);
  EXPECT_DOUBLE_EQ(g.values[2], 0.3);
  EXPECT_DOUBLE_EQ(g.values[3], 0.4);
}

TEST(LowFreqL2, ZeroAtIdentity) {
  const auto x = synth::uniform_image(16, 16, 3, 1);
  const auto r = grad_lowfreq_l2(x, x, BlurKernel::gaussian(21, 3.0));
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_EQ(r.gradient.max_abs(), 0.0);
}

TEST(LowFreqL2, CheckerboardIsAttenuated) {
  const auto y = synth::uniform_image(32, 32, 1, 2, 0.3, 0.7);
  std::vector<double> v(y.values().begin(), y.values().end());
  double raw = 0.0;
  for (std::size_t r = 0; r < 32; ++r) {
    for (std::size_t c = 0; c < 32; ++c) {
      const double e = ((r + c) % 2 ? 0.05 : -0.05);
      v[r * 32 + c] += e;
      raw += e * e;
    }
  }
  const double lf = lowfreq_l2(ImageGrid(32, 32, 1, v), y, BlurKernel::gaussian(21, 3.0));
  EXPECT_LT(lf, 1e-4 * raw);
}

TEST(L1, Examples) {
  const auto y = synth::uniform_image(4, 4, 1, 3, 0.0, 0.5);
  EXPECT_EQ(grad_l1(y, y).loss, 0.0);
  EXPECT_EQ(grad_l1(y, y).gradient.max_abs(), 0.0);
  std::vector<double> v(y.values().begin(), y.values().end());
  v[5] += 0.5;
  const auto r = grad_l1(ImageGrid(4, 4, 1, v), y);
  EXPECT_NEAR(r.loss, 0.5, 1e-15);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(r.gradient.values[k], k == 5 ? 1.0 : 0.0);
  EXPECT_THROW(grad_l1(y, ImageGrid::filled(4, 5, 1, 0.0)), ShapeError);
}

TEST(ContextualImage, IdentityMinimum) {
  const auto y = synth::stripe_texture(24, 3);
  const auto r = grad_contextual_image(y, y, {5, 2}, {DistanceKind::cosine});
  EXPECT_LE(r.loss, 1e-3);
  EXPECT_LE(r.gradient.norm(), 1e-5);
}

TEST(ContextualImage, DisjointPatchesPlaceGradientOnce) {
  const auto x = synth::uniform_image(12, 12, 1, 4), y = synth::uniform_image(12, 12, 1, 5);
  const PatchSpec spec{3, 3};
  const ContextualParams p{DistanceKind::cosine};
  const auto fx = extract_patches(x, spec), fy = extract_patches(y, spec);
  const auto point_grad = grad_contextual(fx, fy, p);
  const auto r = grad_contextual_image(x, y, spec, p);
  for (std::size_t py = 0; py < 4; ++py) {
    for (std::size_t px = 0; px < 4; ++px) {
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
          EXPECT_EQ(r.gradient.values[(py * 3 + a) * 12 + px * 3 + b],
                    point_grad.values[(py * 4 + px) * 9 + a * 3 + b]);
        }
      }
    }
  }
}
