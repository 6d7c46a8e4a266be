#include "cxstat/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cxstat/error.hpp"
#include "cxstat/format.hpp"

namespace cxstat {
namespace {

constexpr double kSigmaFloor = 1e-6;
constexpr double kMinExtent = 1e-9;

void require_2d(const FeatureSet& s) {
  if (s.dim() != 2) throw ShapeError("KDE needs 2D points, got dim " + std::to_string(s.dim()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Gram-Schmidt on standard-normal draws until `count` orthonormal vectors exist.
std::vector<std::vector<double>> orthonormal_frame(std::size_t d, std::size_t count,
                                                   std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> basis;
  while (basis.size() < count) {
    std::vector<double> v(d);
    for (double& e : v) e = normal(rng);
    for (const auto& b : basis) {
      const double c = dot(v, b);
      for (std::size_t k = 0; k < d; ++k) v[k] -= c * b[k];
    }
    const double norm = std::sqrt(dot(v, v));
    if (norm < 1e-8) continue;  // numerically dependent draw
    for (double& e : v) e /= norm;
    basis.push_back(std::move(v));
  }
  return basis;
}

// Per-axis cell masses of a 1D Gaussian N(mu, b^2) over G uniform cells.
void axis_masses(double mu, double b, double origin, double width, std::size_t g,
                 std::vector<double>& out) {
  const double inv = 1.0 / (b * std::sqrt(2.0));
  double lower = std::erf((origin - mu) * inv);
  for (std::size_t k = 0; k < g; ++k) {
    const double upper = std::erf((origin + width * static_cast<double>(k + 1) - mu) * inv);
    out[k] = 0.5 * (upper - lower);
    lower = upper;
  }
}

void require_same_grid(const Density2D& p, const Density2D& q) {
  if (p.grid_size != q.grid_size || !(p.frame == q.frame) || p.mass.size() != q.mass.size()) {
    throw ShapeError("densities live on different grids");
  }
}

bool all_identical(const FeatureSet& s) {
  const auto first = s.point(0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const auto p = s.point(i);
    if (!std::equal(p.begin(), p.end(), first.begin())) return false;
  }
  return true;
}

// 1 / E|u_1| for u uniform on the unit sphere in R^d.
double sliced_scale(std::size_t d) {
  const double half = static_cast<double>(d) / 2.0;
  return std::exp(0.5 * std::log(M_PI) + std::lgamma(half + 0.5) - std::lgamma(half));
}

}  // namespace

Projection2D random_projection(std::size_t d, std::uint64_t seed) {
  if (d < 2) throw DomainError("random projection needs d >= 2");
  std::mt19937_64 rng(seed);
  auto basis = orthonormal_frame(d, 2, rng);
  return {std::move(basis[0]), std::move(basis[1]), seed};
}

FeatureSet project(const FeatureSet& set, const Projection2D& projection) {
  if (set.dim() != projection.first.size()) {
    throw ShapeError("projection dimension does not match the feature set");
  }
  std::vector<double> out(set.size() * 2);
  for (std::size_t i = 0; i < set.size(); ++i) {
    out[2 * i] = dot(set.point(i), projection.first);
    out[2 * i + 1] = dot(set.point(i), projection.second);
  }
  return FeatureSet(std::move(out), 2);
}

std::array<double, 2> Density2D::cell_center(std::size_t row, std::size_t col) const noexcept {
  return {frame.origin[0] + (static_cast<double>(col) + 0.5) * cell_width(0),
          frame.origin[1] + (static_cast<double>(row) + 0.5) * cell_width(1)};
}

std::array<double, 2> silverman_bandwidth(const FeatureSet& points) {
  require_2d(points);
  const auto n = static_cast<double>(points.size());
  std::array<double, 2> out{};
  for (int a = 0; a < 2; ++a) {
    double sigma = 0.0;
    if (points.size() > 1) {
      double mean = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) mean += points.point(i)[a];
      mean /= n;
      double ss = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double diff = points.point(i)[a] - mean;
        ss += diff * diff;
      }
      sigma = std::sqrt(ss / (n - 1.0));
    }
    out[a] = 1.06 * std::max(sigma, kSigmaFloor) * std::pow(n, -0.2);
  }
  return out;
}

GridFrame padded_frame(const std::vector<const FeatureSet*>& sets,
                       const std::array<double, 2>& bandwidth) {
  std::array<double, 2> lo{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  std::array<double, 2> hi{-lo[0], -lo[1]};
  for (const FeatureSet* s : sets) {
    require_2d(*s);
    for (std::size_t i = 0; i < s->size(); ++i) {
      for (int a = 0; a < 2; ++a) {
        lo[a] = std::min(lo[a], s->point(i)[a]);
        hi[a] = std::max(hi[a], s->point(i)[a]);
      }
    }
  }
  GridFrame f;
  for (int a = 0; a < 2; ++a) {
    const double pad = 3.0 * bandwidth[a];
    f.origin[a] = lo[a] - pad;
    f.extent[a] = std::max(hi[a] - lo[a] + 2.0 * pad, kMinExtent);
  }
  return f;
}

Density2D kde_on_frame(const FeatureSet& points, std::size_t grid_size, const GridFrame& frame) {
  require_2d(points);
  if (grid_size == 0) throw DomainError("grid size must be positive");
  Density2D density;
  density.grid_size = grid_size;
  density.frame = frame;
  density.bandwidth = silverman_bandwidth(points);
  density.mass.assign(grid_size * grid_size, 0.0);

  const std::size_t g = grid_size;
  std::vector<double> mx(g), my(g);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto p = points.point(i);
    axis_masses(p[0], density.bandwidth[0], frame.origin[0], density.cell_width(0), g, mx);
    axis_masses(p[1], density.bandwidth[1], frame.origin[1], density.cell_width(1), g, my);
    for (std::size_t r = 0; r < g; ++r) {
      if (my[r] == 0.0) continue;
      double* row = density.mass.data() + r * g;
      for (std::size_t c = 0; c < g; ++c) row[c] += my[r] * mx[c];
    }
  }

  double total = 0.0;
  for (double m : density.mass) total += m;
  if (!(total > 0.0)) throw DomainError("KDE mass fell outside the grid");
  for (double& m : density.mass) m /= total;
  return density;
}

Density2D kde_fit(const FeatureSet& points, std::size_t grid_size) {
  require_2d(points);
  if (points.size() < 2 || all_identical(points)) throw DomainError("degenerate sample");
  const auto bw = silverman_bandwidth(points);
  return kde_on_frame(points, grid_size, padded_frame({&points}, bw));
}

std::pair<Density2D, Density2D> kde_fit_aligned(const FeatureSet& x, const FeatureSet& y,
                                                std::size_t grid_size) {
  const auto bx = silverman_bandwidth(x);
  const auto by = silverman_bandwidth(y);
  const GridFrame frame =
      padded_frame({&x, &y}, {std::max(bx[0], by[0]), std::max(bx[1], by[1])});
  return {kde_on_frame(x, grid_size, frame), kde_on_frame(y, grid_size, frame)};
}

double kl_divergence(const Density2D& p, const Density2D& q) {
  require_same_grid(p, q);
  double sum = 0.0;
  for (std::size_t k = 0; k < p.mass.size(); ++k) {
    if (p.mass[k] < kDensityFloor) continue;
    sum += p.mass[k] * std::log(p.mass[k] / std::max(q.mass[k], kDensityFloor));
  }
  return sum;
}

double chi2_divergence(const Density2D& p, const Density2D& q) {
  require_same_grid(p, q);
  double sum = 0.0;
  for (std::size_t k = 0; k < p.mass.size(); ++k) {
    const double diff = p.mass[k] - q.mass[k];
    sum += diff * diff / std::max(q.mass[k], kDensityFloor);
  }
  return sum;
}

double sliced_emd(const FeatureSet& x, const FeatureSet& y, std::size_t directions,
                  std::uint64_t seed) {
  if (x.dim() != y.dim()) throw ShapeError("dimension mismatch");
  if (x.size() != y.size()) throw ShapeError("sliced EMD needs equal set sizes; equalize first");
  if (directions == 0) throw DomainError("need at least one direction");
  const std::size_t d = x.dim();
  const std::size_t n = x.size();

  std::mt19937_64 rng(seed);
  std::vector<double> px(n), py(n);
  double total = 0.0;
  std::size_t used = 0;
  while (used < directions) {
    const auto frame = orthonormal_frame(d, std::min(d, directions - used), rng);
    for (const auto& u : frame) {
      for (std::size_t i = 0; i < n; ++i) {
        px[i] = dot(x.point(i), u);
        py[i] = dot(y.point(i), u);
      }
      std::sort(px.begin(), px.end());
      std::sort(py.begin(), py.end());
      double w1 = 0.0;
      for (std::size_t i = 0; i < n; ++i) w1 += std::fabs(px[i] - py[i]);
      total += w1 / static_cast<double>(n);
      ++used;
    }
  }
  return sliced_scale(d) * total / static_cast<double>(directions);
}

KdeDivergences kde_divergences(const FeatureSet& x, const FeatureSet& y, std::size_t grid_size) {
  const auto [p, q] = kde_fit_aligned(x, y, grid_size);
  return {kl_divergence(p, q), chi2_divergence(p, q)};
}

KdeDivergences projected_divergences(const FeatureSet& x, const FeatureSet& y,
                                     std::size_t projections, std::uint64_t seed,
                                     std::size_t grid_size) {
  if (x.dim() != y.dim()) throw ShapeError("dimension mismatch");
  if (x.dim() == 2) return kde_divergences(x, y, grid_size);
  if (projections == 0) throw DomainError("need at least one projection");

  std::mt19937_64 seeds(seed);
  KdeDivergences sum;
  for (std::size_t p = 0; p < projections; ++p) {
    const auto proj = random_projection(x.dim(), seeds());
    const auto r = kde_divergences(project(x, proj), project(y, proj), grid_size);
    sum.kl += r.kl;
    sum.chi2 += r.chi2;
  }
  sum.kl /= static_cast<double>(projections);
  sum.chi2 /= static_cast<double>(projections);
  return sum;
}

DivergenceReport divergence_report(const ImageGrid& x_img, const ImageGrid& y_img,
                                   const PatchSpec& spec, const ReportOptions& options) {
  if (!x_img.same_shape(y_img)) throw ShapeError("image size mismatch");
  const FeatureSet xp = extract_patches(x_img, spec);
  const FeatureSet yp = extract_patches(y_img, spec);

  DivergenceReport r;
  const auto kde = projected_divergences(xp, yp, options.projections, options.seed,
                                         options.grid_size);
  r.kl = kde.kl;
  r.chi2 = kde.chi2;
  r.cx = contextual_loss(xp, yp, options.contextual);
  r.cd = chamfer_distance(xp, yp, options.contextual.kind,
                          options.contextual.center_by_target_mean);
  r.emd = sliced_emd(xp, yp, options.projections, options.seed);

  double sq = 0.0;
  const auto xv = x_img.values();
  const auto yv = y_img.values();
  for (std::size_t k = 0; k < xv.size(); ++k) sq += (xv[k] - yv[k]) * (xv[k] - yv[k]);
  r.l2_mean = sq / static_cast<double>(xv.size());

  double cos_sum = 0.0;
  for (std::size_t i = 0; i < xp.size(); ++i) {
    cos_sum += pair_distance(xp.point(i), yp.point(i), DistanceKind::cosine);
  }
  r.cosine_mean = cos_sum / static_cast<double>(xp.size());
  return r;
}

std::string report_csv(const DivergenceReport& r) {
  std::string out = kReportHeader;
  out += '\n';
  for (double v : {r.cx, r.cd, r.kl, r.chi2, r.emd, r.l2_mean, r.cosine_mean}) {
    out += format_number(v);
    out += ',';
  }
  out.back() = '\n';
  return out;
}

}  // namespace cxstat
