#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cxstat {

enum class Algorithm { gd, adam };

std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view name);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::adam;
  double step = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t iterations = 500;
  std::size_t trace_every = 10;

  /// Throws DomainError on a non-positive step, zero iterations or trace_every,
  /// or Adam moments outside [0, 1).
  void validate() const;
};

/// Plain gradient descent or bias-corrected Adam over a flat parameter vector.
class FirstOrderOptimizer {
 public:
  FirstOrderOptimizer(const OptimizerConfig& config, std::size_t parameters);

  void step(std::span<double> params, std::span<const double> grad);

  std::size_t steps_taken() const noexcept { return t_; }

 private:
  OptimizerConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace cxstat
