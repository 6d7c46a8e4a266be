#include "cxstat/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cxstat/error.hpp"

namespace cxstat {
namespace {

void require_same_dim(const FeatureSet& x, const FeatureSet& y) {
  if (x.dim() != y.dim()) {
    throw ShapeError("dimension mismatch: " + std::to_string(x.dim()) + " vs " +
                     std::to_string(y.dim()));
  }
}

void require_equal_size(const FeatureSet& x, const FeatureSet& y) {
  require_same_dim(x, y);
  if (x.size() != y.size()) {
    throw ShapeError("contextual loss needs equal set sizes (" + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()) + "); equalize first");
  }
}

std::size_t argmin_row(const double* row, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (row[k] < row[best]) best = k;
  }
  return best;
}

MatchResult summarize(std::vector<std::size_t> picks, std::size_t rows) {
  std::vector<char> seen(rows, 0);
  std::size_t distinct = 0;
  for (std::size_t i : picks) {
    if (!seen[i]) {
      seen[i] = 1;
      ++distinct;
    }
  }
  return {std::move(picks), distinct};
}

}  // namespace

std::string_view to_string(DistanceKind kind) noexcept {
  switch (kind) {
    case DistanceKind::cosine:
      return "cosine";
    case DistanceKind::l2:
      return "l2";
    case DistanceKind::squared_l2:
      return "squared_l2";
  }
  return "l2";
}

DistanceKind parse_distance_kind(std::string_view name) {
  if (name == "cosine") return DistanceKind::cosine;
  if (name == "l2") return DistanceKind::l2;
  if (name == "squared_l2") return DistanceKind::squared_l2;
  throw DomainError("unknown distance '" + std::string(name) + "'");
}

std::pair<FeatureSet, FeatureSet> center_on_target_mean(const FeatureSet& x,
                                                        const FeatureSet& y) {
  require_same_dim(x, y);
  const std::size_t d = y.dim();
  std::vector<double> mean(d, 0.0);
  for (std::size_t j = 0; j < y.size(); ++j) {
    const auto p = y.point(j);
    for (std::size_t k = 0; k < d; ++k) mean[k] += p[k];
  }
  for (double& m : mean) m /= static_cast<double>(y.size());

  auto shifted = [&](const FeatureSet& s) {
    std::vector<double> v(s.values().begin(), s.values().end());
    for (std::size_t e = 0; e < v.size(); ++e) v[e] -= mean[e % d];
    return FeatureSet(std::move(v), d);
  };
  return {shifted(x), shifted(y)};
}

double pair_distance(std::span<const double> a, std::span<const double> b,
                     DistanceKind kind) noexcept {
  if (kind == DistanceKind::cosine) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      dot += a[k] * b[k];
      na += a[k] * a[k];
      nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0) return 1.0;
    return std::max(0.0, 1.0 - dot / (std::sqrt(na) * std::sqrt(nb)));
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sq += diff * diff;
  }
  return kind == DistanceKind::l2 ? std::sqrt(sq) : sq;
}

DistanceMatrix distance_matrix(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                               bool center_by_target_mean) {
  require_same_dim(x, y);
  if (center_by_target_mean && kind == DistanceKind::cosine) {
    const auto [xc, yc] = center_on_target_mean(x, y);
    return distance_matrix(xc, yc, kind, false);
  }
  DistanceMatrix d{x.size(), y.size(), std::vector<double>(x.size() * y.size())};
  if (kind != DistanceKind::cosine) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto xi = x.point(i);
      for (std::size_t j = 0; j < y.size(); ++j) {
        d.values[i * d.cols + j] = pair_distance(xi, y.point(j), kind);
      }
    }
    return d;
  }
  const std::size_t dim = x.dim();
  std::vector<double> y_norm(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    double sq = 0.0;
    for (double v : y.point(j)) sq += v * v;
    y_norm[j] = std::sqrt(sq);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto xi = x.point(i);
    double sq = 0.0;
    for (double v : xi) sq += v * v;
    const double x_norm = std::sqrt(sq);
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (x_norm == 0.0 || y_norm[j] == 0.0) {
        d.values[i * d.cols + j] = 1.0;
        continue;
      }
      const double* yj = y.point(j).data();
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += xi[k] * yj[k];
      d.values[i * d.cols + j] = std::max(0.0, 1.0 - dot / (x_norm * y_norm[j]));
    }
  }
  return d;
}

DistanceMatrix normalize_distances(const DistanceMatrix& d, double epsilon) {
  DistanceMatrix out = d;
  for (std::size_t i = 0; i < d.rows; ++i) {
    const double* row = d.row(i);
    const double scale = row[argmin_row(row, d.cols)] + epsilon;
    for (std::size_t j = 0; j < d.cols; ++j) out.values[i * d.cols + j] = row[j] / scale;
  }
  return out;
}

AffinityMatrix affinities(const DistanceMatrix& normalized, double h) {
  if (!(h > 0.0)) throw DomainError("bandwidth h must be positive");
  AffinityMatrix a{normalized.rows, normalized.cols, std::vector<double>(normalized.values.size()),
                   h};
  for (std::size_t i = 0; i < normalized.rows; ++i) {
    // exp((1 - d)/h) up to the row-constant factor; the smallest d gives the max logit.
    const double* row = normalized.row(i);
    const double top = (1.0 - row[argmin_row(row, normalized.cols)]) / h;
    double* out = a.values.data() + i * a.cols;
    double sum = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) {
      out[j] = std::exp((1.0 - row[j]) / h - top);
      sum += out[j];
    }
    for (std::size_t j = 0; j < a.cols; ++j) out[j] /= sum;
  }
  return a;
}

ContextualTerms contextual_terms(const FeatureSet& x, const FeatureSet& y,
                                 const ContextualParams& params) {
  require_equal_size(x, y);
  ContextualTerms t;
  t.distances = distance_matrix(x, y, params.kind, params.center_by_target_mean);
  t.normalized = normalize_distances(t.distances, params.epsilon);
  t.affinity = affinities(t.normalized, params.h);

  const std::size_t n = x.size();
  t.row_argmin.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.row_argmin[i] = argmin_row(t.distances.row(i), n);

  t.col_argmax.assign(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    const double* row = t.affinity.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] > t.affinity.at(t.col_argmax[j], j)) t.col_argmax[j] = i;
    }
  }
  t.coverage = 0.0;
  for (std::size_t j = 0; j < n; ++j) t.coverage += t.affinity.at(t.col_argmax[j], j);
  t.loss = -std::log(t.coverage / static_cast<double>(n));
  return t;
}

double contextual_loss(const FeatureSet& x, const FeatureSet& y, const ContextualParams& params) {
  return contextual_terms(x, y, params).loss;
}

double chamfer_distance(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                        bool center_by_target_mean) {
  const auto d = distance_matrix(x, y, kind, center_by_target_mean);
  double sum = 0.0;
  for (std::size_t i = 0; i < d.rows; ++i) sum += d.row(i)[argmin_row(d.row(i), d.cols)];
  return sum / static_cast<double>(d.rows);
}

MatchResult best_matches(const AffinityMatrix& a) {
  std::vector<std::size_t> picks(a.cols, 0);
  for (std::size_t j = 0; j < a.cols; ++j) {
    for (std::size_t i = 1; i < a.rows; ++i) {
      if (a.at(i, j) > a.at(picks[j], j)) picks[j] = i;
    }
  }
  return summarize(std::move(picks), a.rows);
}

MatchResult nearest_matches(const DistanceMatrix& d) {
  std::vector<std::size_t> picks(d.cols, 0);
  for (std::size_t j = 0; j < d.cols; ++j) {
    for (std::size_t i = 1; i < d.rows; ++i) {
      if (d.at(i, j) < d.at(picks[j], j)) picks[j] = i;
    }
  }
  return summarize(std::move(picks), d.rows);
}

double delta_limit_coverage(const FeatureSet& x, const FeatureSet& y, DistanceKind kind,
                            bool center_by_target_mean) {
  require_equal_size(x, y);
  const auto d = distance_matrix(x, y, kind, center_by_target_mean);
  std::vector<char> covered(d.cols, 0);
  for (std::size_t i = 0; i < d.rows; ++i) covered[argmin_row(d.row(i), d.cols)] = 1;
  const auto count = static_cast<double>(std::count(covered.begin(), covered.end(), 1));
  return -std::log(count / static_cast<double>(d.cols));
}

}  // namespace cxstat
