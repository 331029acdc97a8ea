#include "autosign/optim.hpp"

#include <cmath>

namespace autosign {

void AdamWState::init(const std::vector<Tensor>& params) {
  m.clear();
  v.clear();
  for (const Tensor& p : params) {
    m.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
    v.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
  }
  t = 0;
}

void adamw_step(std::vector<Tensor>& params, AdamWState& state, double lr,
                double beta1, double beta2, double eps, double weight_decay) {
  if (!state.initialized()) state.init(params);
  if (state.m.size() != params.size())
    throw ShapeError("AdamWState does not match parameter list");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    const Index n = p.numel();
    if (static_cast<Index>(state.m[i].size()) != n)
      throw ShapeError("AdamW moment shape does not match parameter");
    const double* g = p.grad_data();
    double* w = p.data();
    double* mi = state.m[i].data();
    double* vi = state.v[i].data();
    for (Index j = 0; j < n; ++j) {
      const double gj = g ? g[j] : 0.0;
      mi[j] = beta1 * mi[j] + (1.0 - beta1) * gj;
      vi[j] = beta2 * vi[j] + (1.0 - beta2) * gj * gj;
      if (lr == 0.0) continue;  // keep parameters bit-identical
      const double m_hat = mi[j] / bc1;
      const double v_hat = vi[j] / bc2;
      w[j] -= lr * m_hat / (std::sqrt(v_hat) + eps) + lr * weight_decay * w[j];
    }
  }
}

double cosine_warm_restart_lr(long epoch, double lr_max, double lr_min, long t0,
                              long t_mult) {
  if (t0 < 1 || t_mult < 1) throw ConfigError("scheduler needs T0 >= 1 and Tmult >= 1");
  if (epoch < 0) throw ConfigError("scheduler epoch must be >= 0");
  long cycle_len = t0;
  long offset = epoch;
  while (offset >= cycle_len) {
    offset -= cycle_len;
    cycle_len *= t_mult;
  }
  if (offset == 0) return lr_max;  // restart boundary, exactly lr_max
  const double phase = static_cast<double>(offset) / static_cast<double>(cycle_len);
  return lr_min + (lr_max - lr_min) * (1.0 + std::cos(M_PI * phase)) / 2.0;
}

}  // namespace autosign
