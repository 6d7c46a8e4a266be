#pragma once

#include <cstddef>
#include <cstdint>

#include "cxstat/affinity.hpp"
#include "cxstat/feature_set.hpp"

namespace cxstat {

/// A tight Gaussian cluster X (sigma 0.2 around (0.5, 0.5)) against targets Y
/// spread uniformly over [-1, 1]^2, both of size n.
std::pair<FeatureSet, FeatureSet> clustered_vs_spread(std::size_t n, std::uint64_t seed);

struct MatchDemo {
  FeatureSet x;
  FeatureSet y;
  MatchResult cx;       // largest contextual affinity per target (l2, h = 0.1)
  MatchResult nearest;  // nearest source per target
};

MatchDemo run_match_demo(std::size_t n, std::uint64_t seed,
                         const ContextualParams& params = {DistanceKind::l2});

}  // namespace cxstat
