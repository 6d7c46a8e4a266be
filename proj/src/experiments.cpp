#include "cxstat/experiments.hpp"

#include <random>

#include "cxstat/error.hpp"

namespace cxstat {

std::pair<FeatureSet, FeatureSet> clustered_vs_spread(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("match demo needs n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> cluster(0.0, 0.2);
  std::uniform_real_distribution<double> spread(-1.0, 1.0);
  std::vector<double> x(2 * n), y(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[2 * i] = 0.5 + cluster(rng);
    x[2 * i + 1] = 0.5 + cluster(rng);
  }
  for (double& v : y) v = spread(rng);
  return {FeatureSet(std::move(x), 2), FeatureSet(std::move(y), 2)};
}

MatchDemo run_match_demo(std::size_t n, std::uint64_t seed, const ContextualParams& params) {
  auto [x, y] = clustered_vs_spread(n, seed);
  const auto terms = contextual_terms(x, y, params);
  return {std::move(x), std::move(y), best_matches(terms.affinity),
          nearest_matches(terms.distances)};
}

}  // namespace cxstat
