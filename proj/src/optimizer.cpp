#include "cxstat/optimizer.hpp"

#include <cmath>
#include <string>

#include "cxstat/error.hpp"

namespace cxstat {

std::string_view to_string(Algorithm a) noexcept {
  return a == Algorithm::gd ? "gd" : "adam";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "gd") return Algorithm::gd;
  if (name == "adam") return Algorithm::adam;
  throw DomainError("unknown algorithm '" + std::string(name) + "'");
}

void OptimizerConfig::validate() const {
  if (!(step > 0.0)) throw DomainError("step size must be positive");
  if (iterations == 0) throw DomainError("iterations must be at least 1");
  if (trace_every == 0) throw DomainError("trace_every must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw DomainError("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw DomainError("Adam epsilon must be positive");
}

FirstOrderOptimizer::FirstOrderOptimizer(const OptimizerConfig& config, std::size_t parameters)
    : config_(config) {
  config_.validate();
  if (config_.algorithm == Algorithm::adam) {
    m_.assign(parameters, 0.0);
    v_.assign(parameters, 0.0);
  }
}

void FirstOrderOptimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw ShapeError("gradient does not match parameters");
  ++t_;
  if (config_.algorithm == Algorithm::gd) {
    for (std::size_t k = 0; k < params.size(); ++k) params[k] -= config_.step * grad[k];
    return;
  }
  if (m_.size() != params.size()) throw ShapeError("parameter count changed between steps");
  const double t = static_cast<double>(t_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = config_.beta1 * m_[k] + (1.0 - config_.beta1) * grad[k];
    v_[k] = config_.beta2 * v_[k] + (1.0 - config_.beta2) * grad[k] * grad[k];
    const double m_hat = m_[k] / c1;
    const double v_hat = v_[k] / c2;
    params[k] -= config_.step * m_hat / (std::sqrt(v_hat) + config_.eps);
  }
}

}  // namespace cxstat
