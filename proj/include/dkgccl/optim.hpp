#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dkgccl/matrix.hpp"

namespace dkgccl {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 term added to the gradient

  void validate() const;
};

// One trainable tensor: a flat view of the parameter, its gradient, and a
// name used in diagnostics.
struct ParamSlot {
  std::string name;
  double* values;
  const double* grad;
  Index size;
};

template <typename P, typename G>
ParamSlot slot(std::string name, P& param, const G& grad) {
  return ParamSlot{std::move(name), param.data(), grad.data(), static_cast<Index>(param.size())};
}

// Bias-corrected Adam. Moments are allocated on the first step; later steps
// must pass the same tensors in the same order.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {});

  void step(const std::vector<ParamSlot>& params);

  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps() const { return step_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  AdamConfig cfg_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace dkgccl
