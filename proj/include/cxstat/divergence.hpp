#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cxstat/affinity.hpp"
#include "cxstat/feature_set.hpp"

namespace cxstat {

// Densities below this are treated as empty; denominators are floored to it.
inline constexpr double kDensityFloor = 1e-12;
inline constexpr std::size_t kDefaultGridSize = 64;
inline constexpr std::size_t kDefaultProjections = 100;

/// Two orthonormal directions in R^d.
struct Projection2D {
  std::vector<double> first;
  std::vector<double> second;
  std::uint64_t seed = 0;
};

/// Gram-Schmidt on two standard-normal draws. Throws DomainError if d < 2.
Projection2D random_projection(std::size_t d, std::uint64_t seed);

FeatureSet project(const FeatureSet& set, const Projection2D& projection);

/// Axis-aligned square-celled placement of a G x G grid.
struct GridFrame {
  std::array<double, 2> origin{};
  std::array<double, 2> extent{};

  friend bool operator==(const GridFrame&, const GridFrame&) = default;
};

/// KDE mass per cell. `mass[row * grid_size + col]`, col indexes axis 0.
struct Density2D {
  std::size_t grid_size = 0;
  GridFrame frame;
  std::array<double, 2> bandwidth{};
  std::vector<double> mass;

  double cell_width(int axis) const noexcept {
    return frame.extent[axis] / static_cast<double>(grid_size);
  }
  std::array<double, 2> cell_center(std::size_t row, std::size_t col) const noexcept;
};

/// Silverman's rule, per axis: 1.06 * sigma * N^(-1/5), sigma floored at 1e-6.
std::array<double, 2> silverman_bandwidth(const FeatureSet& points);

/// Bounding box of the given 2D sets padded by three of the largest bandwidths.
GridFrame padded_frame(const std::vector<const FeatureSet*>& sets,
                       const std::array<double, 2>& bandwidth);

/// Gaussian KDE (diagonal bandwidth) integrated over each cell of `frame`,
/// normalized to unit mass. Accepts degenerate samples: the bandwidth then
/// sits at its floor and the mass collapses into a single cell.
Density2D kde_on_frame(const FeatureSet& points, std::size_t grid_size, const GridFrame& frame);

/// Standalone fit on the sample's own padded bounding box.
/// Throws DomainError("degenerate sample") for N < 2 or all-identical points.
Density2D kde_fit(const FeatureSet& points, std::size_t grid_size = kDefaultGridSize);

/// Fits both samples over their union bounding box so the grids agree.
std::pair<Density2D, Density2D> kde_fit_aligned(const FeatureSet& x, const FeatureSet& y,
                                                std::size_t grid_size = kDefaultGridSize);

/// sum p log(p / q) over cells with p >= 1e-12, q floored at 1e-12.
double kl_divergence(const Density2D& p, const Density2D& q);

/// sum (p - q)^2 / q, q floored at 1e-12.
double chi2_divergence(const Density2D& p, const Density2D& q);

/// Sliced Wasserstein-1 over `directions` random unit directions, scaled by
/// 1 / E|<u, e>| so that a pure translation by t reports |t|. Directions are
/// drawn as blocks of random orthonormal frames. Requires |X| == |Y|.
double sliced_emd(const FeatureSet& x, const FeatureSet& y, std::size_t directions,
                  std::uint64_t seed);

struct KdeDivergences {
  double kl = 0.0;
  double chi2 = 0.0;
};

/// KL(P_X || P_Y) and chi2 for 2D samples, fitted on an aligned grid.
KdeDivergences kde_divergences(const FeatureSet& x, const FeatureSet& y,
                               std::size_t grid_size = kDefaultGridSize);

/// Averages kde_divergences over `projections` shared random 2D projections
/// of d-dimensional samples. For d == 2 the samples are fitted directly.
KdeDivergences projected_divergences(const FeatureSet& x, const FeatureSet& y,
                                     std::size_t projections, std::uint64_t seed,
                                     std::size_t grid_size = kDefaultGridSize);

struct DivergenceReport {
  double cx = 0.0;
  double cd = 0.0;
  double kl = 0.0;
  double chi2 = 0.0;
  double emd = 0.0;
  double l2_mean = 0.0;
  double cosine_mean = 0.0;
};

struct ReportOptions {
  std::size_t projections = kDefaultProjections;
  std::uint64_t seed = 0;
  std::size_t grid_size = kDefaultGridSize;
  ContextualParams contextual{DistanceKind::cosine};
};

/// The seven patch-distribution dissimilarities between a generated image
/// and a target of the same shape.
DivergenceReport divergence_report(const ImageGrid& x_img, const ImageGrid& y_img,
                                   const PatchSpec& spec, const ReportOptions& options = {});

inline constexpr const char* kReportHeader = "cx,cd,kl,chi2,emd,l2_mean,cosine_mean";

/// Header line plus one value line, 9 significant digits.
std::string report_csv(const DivergenceReport& report);

}  // namespace cxstat
