#pragma once

#include <vector>

#include "autosign/tensor.hpp"

namespace autosign {

/// Per-parameter AdamW moment buffers plus the shared step counter.
struct AdamWState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long t = 0;

  void init(const std::vector<Tensor>& params);
  bool initialized() const { return !m.empty(); }
};

/// One AdamW update with decoupled weight decay:
///   w <- w - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * w
/// Gradients are read from each parameter's grad buffer (absent buffer means
/// zero gradient). Moments update on every call; with lr == 0 the parameter
/// values are left bit-identical.
void adamw_step(std::vector<Tensor>& params, AdamWState& state, double lr,
                double beta1, double beta2, double eps, double weight_decay);

/// Cosine annealing with warm restarts. Cycle i has length T0 * Tmult^i; at a
/// restart boundary the rate is exactly lr_max.
double cosine_warm_restart_lr(long epoch, double lr_max, double lr_min, long t0,
                              long t_mult);

}  // namespace autosign
