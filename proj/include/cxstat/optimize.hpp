#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cxstat/affinity.hpp"
#include "cxstat/blur.hpp"
#include "cxstat/feature_set.hpp"
#include "cxstat/optimizer.hpp"

namespace cxstat {

enum class PointLoss { cx, cd };

std::string_view to_string(PointLoss loss) noexcept;
PointLoss parse_point_loss(std::string_view name);

/// Weighted objective lambda_cx * CX + lambda_l2_lf * LF-L2 + lambda_l1 * L1
/// over a generated image. lambda_gan is carried so adversarial configs can
/// be expressed, but validate() rejects any nonzero value.
struct ObjectiveConfig {
  double lambda_cx = 0.1;
  double lambda_l2_lf = 10.0;
  double lambda_l1 = 0.0;
  double lambda_gan = 0.0;
  ContextualParams contextual{DistanceKind::cosine};
  std::size_t blur_size = 21;
  double blur_sigma = 3.0;
  PatchSpec patch{5, 2};

  /// Super-resolution weights: lambda_cx = 0.1, lambda_l2 = 10.
  static ObjectiveConfig super_resolution();
  /// Normal-map weights: lambda_cx = 1, lambda_l2 = 0.1, lambda_l1 as given.
  static ObjectiveConfig normals(double lambda_l1 = 1.0);

  /// Throws UnsupportedError("adversarial term unsupported") when lambda_gan != 0,
  /// DomainError on negative weights or when every weight is zero.
  void validate() const;
};

struct TraceRow {
  std::size_t iteration = 0;
  double objective = 0.0;
  double cx = 0.0;
  double cd = 0.0;
  double kl = 0.0;
  double chi2 = 0.0;
  double emd = 0.0;
  double l2_lf = 0.0;  // NaN for point-set runs
  double l1 = 0.0;     // NaN for point-set runs
};

struct Trace {
  std::vector<TraceRow> rows;
};

/// Settings for the divergence measurements recorded in a trace.
struct TraceOptions {
  std::size_t projections = 20;
  std::uint64_t seed = 0;
  std::size_t grid_size = 64;
};

enum class RunStatus { completed, diverged };

struct PointRun {
  FeatureSet points;
  Trace trace;
  RunStatus status = RunStatus::completed;
  std::size_t iterations_run = 0;
};

struct ImageRun {
  ImageGrid image;
  Trace trace;
  RunStatus status = RunStatus::completed;
  std::size_t iterations_run = 0;
};

/// Moves the points of `x0` to minimize the chosen loss against `y`.
/// `contextual` supplies the distance kind (used by both losses) and h, epsilon.
/// Requires |X0| == |Y|. Rows are recorded at iteration 0, every trace_every
/// iterations, and at the last iteration.
PointRun optimize_points(const FeatureSet& x0, const FeatureSet& y, PointLoss loss,
                         const ContextualParams& contextual, const OptimizerConfig& opt,
                         const TraceOptions& trace = {});

struct ObjectiveTerms {
  double total = 0.0;
  double cx = 0.0;
  double l2_lf = 0.0;
  double l1 = 0.0;
  std::vector<double> gradient;
};

/// Value and pixel gradient of the weighted image objective.
ObjectiveTerms evaluate_objective(const ImageGrid& x, const ImageGrid& y,
                                  const ObjectiveConfig& cfg);

/// Gradient steps on the weighted objective; pixels are clamped to [0, 1]
/// after every step. Trace rows come from divergence_report plus the
/// objective terms.
ImageRun optimize_image(const ImageGrid& x0, const ImageGrid& y, const ObjectiveConfig& cfg,
                        const OptimizerConfig& opt, const TraceOptions& trace = {});

inline constexpr const char* kTraceHeader = "iter,objective,cx,cd,kl,chi2,emd,l2_lf,l1";

std::string trace_csv(const Trace& trace);
/// Throws FormatError on a wrong header, bad field, or non-increasing iterations.
Trace parse_trace_csv(std::string_view text);

/// Pearson correlation of one trace column with the cx column; nullopt when
/// either series is constant or contains NaN.
struct MeasureCorrelation {
  std::string measure;
  std::optional<double> value;
};

/// Correlations against cx for objective, cd, kl, chi2, emd, l2_lf, l1.
/// Throws DomainError for fewer than 3 rows.
std::vector<MeasureCorrelation> trace_correlations(const Trace& trace);

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace cxstat
