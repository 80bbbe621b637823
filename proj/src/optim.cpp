#include "dkgccl/optim.hpp"

#include <cmath>

#include "dkgccl/errors.hpp"

namespace dkgccl {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ArgumentError("adam: lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ArgumentError("adam: betas must be in [0, 1)");
  }
  if (!(eps > 0.0)) throw ArgumentError("adam: eps must be positive");
  if (!(weight_decay >= 0.0)) throw ArgumentError("adam: weight_decay must be non-negative");
}

AdamState::AdamState(AdamConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void AdamState::step(const std::vector<ParamSlot>& params) {
  if (step_ == 0) {
    m_.clear();
    v_.clear();
    for (const auto& p : params) {
      m_.emplace_back(static_cast<std::size_t>(p.size), 0.0);
      v_.emplace_back(static_cast<std::size_t>(p.size), 0.0);
    }
  } else if (params.size() != m_.size()) {
    throw ArgumentError("adam: parameter list changed between steps");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (static_cast<std::size_t>(params[k].size) != m_[k].size()) {
      throw ArgumentError("adam: shape of '" + params[k].name + "' changed between steps");
    }
    for (Index i = 0; i < params[k].size; ++i) {
      if (!std::isfinite(params[k].grad[i])) {
        throw NumericalError("adam: non-finite gradient in '" + params[k].name + "' at flat index " +
                             std::to_string(i) + " (step " + std::to_string(step_ + 1) + ")");
      }
    }
  }

  ++step_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const ParamSlot& p = params[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (Index i = 0; i < p.size; ++i) {
      const double g = p.grad[i] + cfg_.weight_decay * p.values[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p.values[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

}  // namespace dkgccl
