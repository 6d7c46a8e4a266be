#include "cxstat/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "cxstat/error.hpp"

namespace cxstat {
namespace {

// out += coeff * d dist(a, b) / d a
void add_distance_gradient(std::span<const double> a, std::span<const double> b,
                           DistanceKind kind, double coeff, double* out) {
  const std::size_t d = a.size();
  switch (kind) {
    case DistanceKind::squared_l2:
      for (std::size_t k = 0; k < d; ++k) out[k] += coeff * 2.0 * (a[k] - b[k]);
      return;
    case DistanceKind::l2: {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
      if (sq == 0.0) return;
      const double inv = coeff / std::sqrt(sq);
      for (std::size_t k = 0; k < d; ++k) out[k] += inv * (a[k] - b[k]);
      return;
    }
    case DistanceKind::cosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
      }
      if (na == 0.0 || nb == 0.0) return;
      const double inv_ab = 1.0 / (std::sqrt(na) * std::sqrt(nb));
      const double cos = dot * inv_ab;
      // d(1 - cos)/da = -(b / (|a||b|) - cos * a / |a|^2)
      for (std::size_t k = 0; k < d; ++k) {
        out[k] -= coeff * (b[k] * inv_ab - cos * a[k] / na);
      }
      return;
    }
  }
}

// out += sum_l coeff[l] * d dist(x_i, y_l) / d x_i, reusing the row of distances.
void add_row_gradient(std::span<const double> xi, const FeatureSet& y, DistanceKind kind,
                      const double* coeff, const double* dist, const std::vector<double>& y_norm,
                      double* out) {
  const std::size_t d = xi.size();
  if (kind != DistanceKind::cosine) {
    for (std::size_t l = 0; l < y.size(); ++l) {
      if (coeff[l] == 0.0) continue;
      if (kind == DistanceKind::l2 && dist[l] == 0.0) continue;
      const double s = kind == DistanceKind::l2 ? coeff[l] / dist[l] : 2.0 * coeff[l];
      const double* yl = y.point(l).data();
      for (std::size_t k = 0; k < d; ++k) out[k] += s * (xi[k] - yl[k]);
    }
    return;
  }
  double sq = 0.0;
  for (double v : xi) sq += v * v;
  if (sq == 0.0) return;
  const double x_norm = std::sqrt(sq);
  std::vector<double> toward(d, 0.0);
  double along = 0.0;
  for (std::size_t l = 0; l < y.size(); ++l) {
    if (coeff[l] == 0.0 || y_norm[l] == 0.0) continue;
    const double s = coeff[l] / (x_norm * y_norm[l]);
    const double* yl = y.point(l).data();
    for (std::size_t k = 0; k < d; ++k) toward[k] += s * yl[k];
    along += coeff[l] * (1.0 - dist[l]);
  }
  for (std::size_t k = 0; k < d; ++k) out[k] += along * xi[k] / sq - toward[k];
}

void require_same_image(const ImageGrid& x, const ImageGrid& y) {
  if (!x.same_shape(y)) throw ShapeError("image size mismatch");
}

GradientField image_field(const ImageGrid& img, std::vector<double> values) {
  return {{img.height(), img.width(), img.channels()}, std::move(values)};
}

}  // namespace

double GradientField::norm() const noexcept {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double GradientField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return m;
}

LossGradient contextual_loss_gradient(const FeatureSet& x, const FeatureSet& y,
                                      const ContextualParams& params) {
  const bool centered = params.center_by_target_mean && params.kind == DistanceKind::cosine;
  // Centering shifts by a constant, so gradients w.r.t. centered and raw x agree.
  const auto [xs, ys] = centered ? center_on_target_mean(x, y) : std::pair{x, y};
  const ContextualTerms t = contextual_terms(xs, ys, {params.kind, params.h, params.epsilon});

  const std::size_t n = x.size();
  const std::size_t dim = x.dim();
  GradientField g{{n, dim}, std::vector<double>(n * dim, 0.0)};

  // Columns won by each source row i: J_i = { j : argmax_i' A_i'j == i }.
  // A column maximized by several identical rows is shared evenly among them.
  std::vector<std::vector<std::pair<std::size_t, double>>> won(n);
  std::vector<std::size_t> tied;
  for (std::size_t j = 0; j < n; ++j) {
    const double top = t.affinity.at(t.col_argmax[j], j);
    tied.clear();
    for (std::size_t i = t.col_argmax[j]; i < n; ++i) {
      if (t.affinity.at(i, j) == top) tied.push_back(i);
    }
    const double share = 1.0 / static_cast<double>(tied.size());
    for (std::size_t i : tied) won[i].emplace_back(j, share);
  }

  std::vector<double> y_norm(n, 0.0);
  if (params.kind == DistanceKind::cosine) {
    for (std::size_t l = 0; l < n; ++l) {
      double sq = 0.0;
      for (double v : ys.point(l)) sq += v * v;
      y_norm[l] = std::sqrt(sq);
    }
  }

  const double dloss_dcoverage = -1.0 / t.coverage;
  std::vector<double> dd(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (won[i].empty()) continue;
    const double* a = t.affinity.row(i);
    const double* dist = t.distances.row(i);
    double won_mass = 0.0;
    for (const auto& [j, share] : won[i]) won_mass += share * a[j];

    // dL/dz_il for the softmax logits z_il = (1 - dn_il) / h.
    std::fill(dd.begin(), dd.end(), 0.0);
    for (const auto& [j, share] : won[i]) dd[j] = share * a[j];
    for (std::size_t l = 0; l < n; ++l) dd[l] = dloss_dcoverage * (dd[l] - a[l] * won_mass);

    // Through the normalization dn_il = d_il / (d_ik* + eps), including the
    // path through the row minimum d_ik*.
    const std::size_t kmin = t.row_argmin[i];
    const double scale = dist[kmin] + params.epsilon;
    double via_min = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const double d_norm = -dd[l] / params.h;
      via_min -= d_norm * dist[l] / (scale * scale);
      dd[l] = d_norm / scale;
    }
    dd[kmin] += via_min;

    add_row_gradient(xs.point(i), ys, params.kind, dd.data(), dist, y_norm,
                     g.values.data() + i * dim);
  }
  return {t.loss, std::move(g)};
}

GradientField grad_contextual(const FeatureSet& x, const FeatureSet& y,
                              const ContextualParams& params) {
  return contextual_loss_gradient(x, y, params).gradient;
}

LossGradient chamfer_loss_gradient(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                                   bool center_by_target_mean) {
  const bool centered = center_by_target_mean && kind == DistanceKind::cosine;
  const auto [xs, ys] = centered ? center_on_target_mean(x, y) : std::pair{x, y};
  const DistanceMatrix d = distance_matrix(xs, ys, kind);
  const std::size_t dim = x.dim();
  GradientField g{{x.size(), dim}, std::vector<double>(x.size() * dim, 0.0)};
  const double coeff = 1.0 / static_cast<double>(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < d.rows; ++i) {
    const double* row = d.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < d.cols; ++j) {
      if (row[j] < row[best]) best = j;
    }
    sum += row[best];
    add_distance_gradient(xs.point(i), ys.point(best), kind, coeff, g.values.data() + i * dim);
  }
  return {sum * coeff, std::move(g)};
}

GradientField grad_chamfer(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                           bool center_by_target_mean) {
  return chamfer_loss_gradient(x, y, kind, center_by_target_mean).gradient;
}

LossGradient grad_lowfreq_l2(const ImageGrid& x, const ImageGrid& y, const BlurKernel& k) {
  require_same_image(x, y);
  const auto h = x.height(), w = x.width(), c = x.channels();
  auto residual = blur_values(x.values(), h, w, c, k);
  const auto by = blur_values(y.values(), h, w, c, k);
  double loss = 0.0;
  for (std::size_t e = 0; e < residual.size(); ++e) {
    residual[e] -= by[e];
    loss += residual[e] * residual[e];
  }
  auto grad = blur_adjoint(residual, h, w, c, k);
  for (double& v : grad) v *= 2.0;
  return {loss, image_field(x, std::move(grad))};
}

double lowfreq_l2(const ImageGrid& x, const ImageGrid& y, const BlurKernel& k) {
  require_same_image(x, y);
  const auto bx = blur_values(x.values(), x.height(), x.width(), x.channels(), k);
  const auto by = blur_values(y.values(), y.height(), y.width(), y.channels(), k);
  double loss = 0.0;
  for (std::size_t e = 0; e < bx.size(); ++e) loss += (bx[e] - by[e]) * (bx[e] - by[e]);
  return loss;
}

LossGradient grad_l1(const ImageGrid& x, const ImageGrid& y) {
  require_same_image(x, y);
  const auto xv = x.values();
  const auto yv = y.values();
  std::vector<double> grad(xv.size(), 0.0);
  double loss = 0.0;
  for (std::size_t e = 0; e < xv.size(); ++e) {
    const double diff = xv[e] - yv[e];
    loss += std::fabs(diff);
    grad[e] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  }
  return {loss, image_field(x, std::move(grad))};
}

double l1_distance(const ImageGrid& x, const ImageGrid& y) {
  require_same_image(x, y);
  double loss = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) loss += std::fabs(x.values()[e] - y.values()[e]);
  return loss;
}

LossGradient grad_contextual_image(const ImageGrid& x, const ImageGrid& y,
                                   const PatchSpec& spec, const ContextualParams& params) {
  require_same_image(x, y);
  const auto r = contextual_loss_gradient(extract_patches(x, spec), extract_patches(y, spec),
                                          params);
  return {r.loss, image_field(x, scatter_patches(r.gradient.values, x.height(), x.width(),
                                                 x.channels(), spec))};
}

}  // namespace cxstat
