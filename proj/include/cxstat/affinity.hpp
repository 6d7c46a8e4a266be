#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "cxstat/feature_set.hpp"

namespace cxstat {

inline constexpr double kDefaultBandwidth = 0.1;
inline constexpr double kDefaultEpsilon = 1e-5;

enum class DistanceKind { cosine, l2, squared_l2 };

std::string_view to_string(DistanceKind kind) noexcept;
/// Accepts "cosine", "l2", "squared_l2"; throws DomainError otherwise.
DistanceKind parse_distance_kind(std::string_view name);

/// Dense row-major |X| x |Y| matrix of nonnegative distances.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const noexcept { return values[i * cols + j]; }
  const double* row(std::size_t i) const noexcept { return values.data() + i * cols; }
};

/// Row-softmax affinities; every row sums to one.
struct AffinityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  double bandwidth = kDefaultBandwidth;

  double at(std::size_t i, std::size_t j) const noexcept { return values[i * cols + j]; }
  const double* row(std::size_t i) const noexcept { return values.data() + i * cols; }
};

struct ContextualParams {
  DistanceKind kind;
  double h = kDefaultBandwidth;
  double epsilon = kDefaultEpsilon;
  bool center_by_target_mean = false;
};

/// Subtracts the mean of `y` from every point of both sets.
std::pair<FeatureSet, FeatureSet> center_on_target_mean(const FeatureSet& x,
                                                        const FeatureSet& y);

/// Distance of a single pair. Cosine distance treats a zero vector as being
/// at distance 1 from everything.
double pair_distance(std::span<const double> a, std::span<const double> b,
                     DistanceKind kind) noexcept;

DistanceMatrix distance_matrix(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                               bool center_by_target_mean = false);

/// d_ij / (min_k d_ik + epsilon), row by row.
DistanceMatrix normalize_distances(const DistanceMatrix& d, double epsilon);

/// Row softmax of (1 - d_ij) / h with max subtraction. Throws DomainError if h <= 0.
AffinityMatrix affinities(const DistanceMatrix& normalized, double h);

/// Every intermediate of the contextual loss, kept for differentiation.
struct ContextualTerms {
  DistanceMatrix distances;
  DistanceMatrix normalized;
  AffinityMatrix affinity;
  std::vector<std::size_t> row_argmin;  // per source i: argmin_k d_ik
  std::vector<std::size_t> col_argmax;  // per target j: argmax_i A_ij
  double coverage = 0.0;                // sum_j max_i A_ij
  double loss = 0.0;
};

/// Requires |X| == |Y| (call equalize first) and matching dimensions.
ContextualTerms contextual_terms(const FeatureSet& x, const FeatureSet& y,
                                 const ContextualParams& params);

/// -log( (1/N) sum_j max_i A_ij ), N = |Y|.
double contextual_loss(const FeatureSet& x, const FeatureSet& y, const ContextualParams& params);

/// Asymmetric Chamfer distance: mean over x_i of min_j dist(x_i, y_j).
double chamfer_distance(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                        bool center_by_target_mean = false);

struct MatchResult {
  std::vector<std::size_t> source_for_target;  // index j -> matched source row i
  std::size_t distinct_sources = 0;
};

/// For each target column j the row with the largest affinity (lowest index on ties).
MatchResult best_matches(const AffinityMatrix& a);

/// For each target column j the nearest source row, the matching implied by
/// the fixed kernel exp(-dist) that yields the Chamfer distance.
MatchResult nearest_matches(const DistanceMatrix& d);

/// The h -> 0 limit of the contextual loss: -log(covered / N), where a
/// target is covered if it is the nearest target of at least one source.
double delta_limit_coverage(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                            bool center_by_target_mean = false);

}  // namespace cxstat
