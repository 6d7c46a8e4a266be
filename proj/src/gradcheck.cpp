#include "cxstat/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cxstat/error.hpp"
#include "cxstat/format.hpp"
#include "cxstat/gradients.hpp"

namespace cxstat {
namespace {

FeatureSet as_set(std::span<const double> v, std::size_t dim) {
  return FeatureSet(std::vector<double>(v.begin(), v.end()), dim);
}

ImageGrid as_image(std::span<const double> v, const ImageGrid& like) {
  return ImageGrid(like.height(), like.width(), like.channels(),
                   std::vector<double>(v.begin(), v.end()));
}

std::vector<std::size_t> contextual_selection(const ContextualTerms& t) {
  std::vector<std::size_t> s = t.row_argmin;
  s.insert(s.end(), t.col_argmax.begin(), t.col_argmax.end());
  return s;
}

std::vector<std::size_t> row_argmins(const DistanceMatrix& d) {
  std::vector<std::size_t> s(d.rows, 0);
  for (std::size_t i = 0; i < d.rows; ++i) {
    for (std::size_t j = 1; j < d.cols; ++j) {
      if (d.at(i, j) < d.at(i, s[i])) s[i] = j;
    }
  }
  return s;
}

// Uniform points in [0,1]^2, resampling any x closer than `gap` to a y.
std::pair<FeatureSet, FeatureSet> separated_points(std::size_t nx, std::size_t ny, double gap,
                                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(ny * 2);
  for (double& v : y) v = u(rng);
  std::vector<double> x(nx * 2);
  for (std::size_t i = 0; i < nx; ++i) {
    bool ok = false;
    while (!ok) {
      x[2 * i] = u(rng);
      x[2 * i + 1] = u(rng);
      ok = true;
      for (std::size_t j = 0; j < ny && ok; ++j) {
        ok = std::hypot(x[2 * i] - y[2 * j], x[2 * i + 1] - y[2 * j + 1]) >= gap;
      }
    }
  }
  return {FeatureSet(std::move(x), 2), FeatureSet(std::move(y), 2)};
}

ImageGrid random_image(std::size_t h, std::size_t w, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<double> v(h * w * c);
  for (double& e : v) e = u(rng);
  return ImageGrid(h, w, c, std::move(v));
}

}  // namespace

std::string_view to_string(LossId id) noexcept {
  switch (id) {
    case LossId::contextual:
      return "cx";
    case LossId::contextual_image:
      return "cx-image";
    case LossId::chamfer:
      return "chamfer";
    case LossId::lowfreq_l2:
      return "lf-l2";
    case LossId::l1:
      return "l1";
  }
  return "cx";
}

LossId parse_loss_id(std::string_view name) {
  for (LossId id : {LossId::contextual, LossId::contextual_image, LossId::chamfer,
                    LossId::lowfreq_l2, LossId::l1}) {
    if (name == to_string(id)) return id;
  }
  throw DomainError("unknown loss '" + std::string(name) + "'");
}

DifferentiableProblem contextual_problem(const FeatureSet& x, const FeatureSet& y,
                                         const ContextualParams& params) {
  const std::size_t dim = x.dim();
  return {
      "cx",
      std::vector<double>(x.values().begin(), x.values().end()),
      [=](std::span<const double> v) { return contextual_loss(as_set(v, dim), y, params); },
      [=](std::span<const double> v) {
        return grad_contextual(as_set(v, dim), y, params).values;
      },
      [=](std::span<const double> v) {
        const bool centered =
            params.center_by_target_mean && params.kind == DistanceKind::cosine;
        const FeatureSet xs = as_set(v, dim);
        const auto [xc, yc] = centered ? center_on_target_mean(xs, y) : std::pair{xs, y};
        return contextual_selection(contextual_terms(xc, yc, {params.kind, params.h,
                                                              params.epsilon}));
      },
  };
}

DifferentiableProblem chamfer_problem(const FeatureSet& x, const FeatureSet& y,
                                      DistanceKind kind) {
  const std::size_t dim = x.dim();
  return {
      "chamfer",
      std::vector<double>(x.values().begin(), x.values().end()),
      [=](std::span<const double> v) { return chamfer_distance(as_set(v, dim), y, kind); },
      [=](std::span<const double> v) { return grad_chamfer(as_set(v, dim), y, kind).values; },
      [=](std::span<const double> v) {
        return row_argmins(distance_matrix(as_set(v, dim), y, kind));
      },
  };
}

DifferentiableProblem contextual_image_problem(const ImageGrid& x, const ImageGrid& y,
                                               const PatchSpec& spec,
                                               const ContextualParams& params) {
  const FeatureSet yp = extract_patches(y, spec);
  return {
      "cx-image",
      std::vector<double>(x.values().begin(), x.values().end()),
      [=](std::span<const double> v) {
        return contextual_loss(extract_patches(as_image(v, x), spec), yp, params);
      },
      [=](std::span<const double> v) {
        return grad_contextual_image(as_image(v, x), y, spec, params).gradient.values;
      },
      [=](std::span<const double> v) {
        const FeatureSet xp = extract_patches(as_image(v, x), spec);
        const bool centered =
            params.center_by_target_mean && params.kind == DistanceKind::cosine;
        const auto [xc, yc] = centered ? center_on_target_mean(xp, yp) : std::pair{xp, yp};
        return contextual_selection(contextual_terms(xc, yc, {params.kind, params.h,
                                                              params.epsilon}));
      },
  };
}

DifferentiableProblem lowfreq_l2_problem(const ImageGrid& x, const ImageGrid& y,
                                         const BlurKernel& k) {
  return {
      "lf-l2",
      std::vector<double>(x.values().begin(), x.values().end()),
      [=](std::span<const double> v) { return lowfreq_l2(as_image(v, x), y, k); },
      [=](std::span<const double> v) {
        return grad_lowfreq_l2(as_image(v, x), y, k).gradient.values;
      },
      nullptr,
  };
}

DifferentiableProblem l1_problem(const ImageGrid& x, const ImageGrid& y) {
  return {
      "l1",
      std::vector<double>(x.values().begin(), x.values().end()),
      [=](std::span<const double> v) { return l1_distance(as_image(v, x), y); },
      [=](std::span<const double> v) { return grad_l1(as_image(v, x), y).gradient.values; },
      [=](std::span<const double> v) {
        std::vector<std::size_t> signs(v.size());
        for (std::size_t e = 0; e < v.size(); ++e) {
          const double diff = v[e] - y.values()[e];
          signs[e] = diff > 0.0 ? 2 : (diff < 0.0 ? 0 : 1);
        }
        return signs;
      },
  };
}

DifferentiableProblem random_problem(LossId id, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  switch (id) {
    case LossId::contextual: {
      const auto [x, y] = separated_points(6, 6, 0.05, rng);
      return contextual_problem(x, y, {DistanceKind::l2});
    }
    case LossId::chamfer: {
      const auto [x, y] = separated_points(8, 5, 0.05, rng);
      return chamfer_problem(x, y, DistanceKind::l2);
    }
    case LossId::contextual_image: {
      const ImageGrid x = random_image(12, 12, 1, rng);
      const ImageGrid y = random_image(12, 12, 1, rng);
      return contextual_image_problem(x, y, {3, 2}, {DistanceKind::cosine});
    }
    case LossId::lowfreq_l2: {
      const ImageGrid x = random_image(16, 16, 1, rng);
      const ImageGrid y = random_image(16, 16, 1, rng);
      return lowfreq_l2_problem(x, y, BlurKernel::gaussian(21, 3.0));
    }
    case LossId::l1: {
      const ImageGrid x = random_image(8, 8, 3, rng);
      const ImageGrid y = random_image(8, 8, 3, rng);
      return l1_problem(x, y);
    }
  }
  throw DomainError("unknown loss");
}

GradcheckReport gradcheck(const DifferentiableProblem& problem, const GradcheckOptions& options) {
  if (!(options.step > 0.0)) throw DomainError("finite-difference step must be positive");
  const std::vector<double> analytic = problem.gradient(problem.point);
  if (analytic.size() != problem.point.size()) {
    throw ShapeError("gradient size does not match the parameter vector");
  }
  const auto base_selection = problem.selection
                                  ? problem.selection(problem.point)
                                  : std::vector<std::size_t>{};

  GradcheckReport report;
  std::vector<double> probe = problem.point;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double origin = probe[k];
    probe[k] = origin + options.step;
    const double up = problem.value(probe);
    const bool tie_up = problem.selection && problem.selection(probe) != base_selection;
    probe[k] = origin - options.step;
    const double down = problem.value(probe);
    const bool tie_down = problem.selection && problem.selection(probe) != base_selection;
    probe[k] = origin;

    if (tie_up || tie_down) {
      report.ties.push_back(k);
      continue;
    }
    const double numeric = (up - down) / (2.0 * options.step);
    const double abs_err = std::fabs(analytic[k] - numeric);
    const double denom =
        std::max({std::fabs(analytic[k]), std::fabs(numeric), options.abs_floor});
    const double rel = abs_err / denom;
    ++report.checked;
    report.max_abs_err = std::max(report.max_abs_err, abs_err);
    report.max_rel_err = std::max(report.max_rel_err, rel);
    if (!(rel <= options.tolerance)) report.failures.push_back({k, analytic[k], numeric, rel});
  }
  return report;
}

std::string format_gradcheck(const GradcheckReport& report) {
  std::string out;
  for (const auto& f : report.failures) {
    out += "fail index=" + std::to_string(f.index) + " analytic=" + format_number(f.analytic) +
           " numeric=" + format_number(f.numeric) + " rel_err=" + format_number(f.rel_err) +
           "\n";
  }
  for (std::size_t k : report.ties) out += "tie index=" + std::to_string(k) + "\n";
  out += "max_rel_err=" + format_number(report.max_rel_err) + "\n";
  return out;
}

}  // namespace cxstat
