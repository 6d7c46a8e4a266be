#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxstat/affinity.hpp"
#include "cxstat/blur.hpp"
#include "cxstat/feature_set.hpp"

namespace cxstat {

/// A scalar loss over a flat parameter vector together with its analytic
/// gradient. `selection` returns the discrete state the loss branches on
/// (argmin/argmax picks, sign patterns); a change of selection inside a
/// finite-difference stencil marks the coordinate as a tie.
struct DifferentiableProblem {
  std::string name;
  std::vector<double> point;
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::function<std::vector<std::size_t>(std::span<const double>)> selection;
};

enum class LossId { contextual, contextual_image, chamfer, lowfreq_l2, l1 };

std::string_view to_string(LossId id) noexcept;
/// "cx", "cx-image", "chamfer", "lf-l2", "l1".
LossId parse_loss_id(std::string_view name);

DifferentiableProblem contextual_problem(const FeatureSet& x, const FeatureSet& y,
                                         const ContextualParams& params);
DifferentiableProblem chamfer_problem(const FeatureSet& x, const FeatureSet& y,
                                      DistanceKind kind);
DifferentiableProblem contextual_image_problem(const ImageGrid& x, const ImageGrid& y,
                                               const PatchSpec& spec,
                                               const ContextualParams& params);
DifferentiableProblem lowfreq_l2_problem(const ImageGrid& x, const ImageGrid& y,
                                         const BlurKernel& k);
DifferentiableProblem l1_problem(const ImageGrid& x, const ImageGrid& y);

/// Seeded random non-degenerate instance of the given loss.
DifferentiableProblem random_problem(LossId id, std::uint64_t seed);

struct CoordinateCheck {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Magnitudes below this are compared absolutely: |a - n| / max(|a|, |n|, floor).
  double abs_floor = 1e-6;
};

struct GradcheckReport {
  double max_rel_err = 0.0;  // over non-tie coordinates
  double max_abs_err = 0.0;
  std::size_t checked = 0;
  std::vector<CoordinateCheck> failures;
  std::vector<std::size_t> ties;

  bool passed() const noexcept { return failures.empty(); }
};

/// Central differences over every coordinate of `problem.point`.
GradcheckReport gradcheck(const DifferentiableProblem& problem,
                          const GradcheckOptions& options = {});

/// One line per failing coordinate, one per tie, then `max_rel_err=<v>`.
std::string format_gradcheck(const GradcheckReport& report);

}  // namespace cxstat
