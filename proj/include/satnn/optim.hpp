#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "satnn/tape.hpp"

namespace satnn {

template <typename S>
struct ParamEntry {
  MatX<S> value;
  MatX<S> grad;
  MatX<S> m;    // Adam first moment
  MatX<S> v;    // Adam second moment
  MatX<S> ema;  // shadow copy used for validation
  bool grad_touched = false;
};

// Named parameter tensors with per-parameter optimizer state and an EMA
// shadow copy. Iteration follows insertion order, which keeps both the
// random init stream and the optimizer walk deterministic.
template <typename S>
class ParamStore {
 public:
  MatX<S>& add(const std::string& name, MatX<S> init) {
    if (map_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
    ParamEntry<S> e;
    e.value = std::move(init);
    e.grad = MatX<S>::Zero(e.value.rows(), e.value.cols());
    e.m = e.grad;
    e.v = e.grad;
    e.ema = e.value;
    order_.push_back(name);
    return map_.emplace(name, std::move(e)).first->second.value;
  }

  ParamEntry<S>& at(const std::string& name) {
    auto it = map_.find(name);
    if (it == map_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
  }
  const ParamEntry<S>& at(const std::string& name) const {
    auto it = map_.find(name);
    if (it == map_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
  }
  bool has(const std::string& name) const { return map_.count(name) != 0; }

  const std::vector<std::string>& names() const { return order_; }
  size_t size() const { return order_.size(); }

  void zero_grads() {
    for (const std::string& n : order_) {
      ParamEntry<S>& e = map_.at(n);
      e.grad.setZero();
      e.grad_touched = false;
    }
  }

  long step_count = 0;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, ParamEntry<S>> map_;
};

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // When set, a parameter whose gradient was never accumulated is an error.
  bool require_all_grads = false;
};

// One Adam update with bias correction; gradients are cleared afterwards.
template <typename S>
void adam_step(ParamStore<S>& store, const AdamConfig& cfg) {
  store.step_count += 1;
  double t = static_cast<double>(store.step_count);
  S corr1 = S(1.0 - std::pow(cfg.beta1, t));
  S corr2 = S(1.0 - std::pow(cfg.beta2, t));
  for (const std::string& name : store.names()) {
    ParamEntry<S>& e = store.at(name);
    if (cfg.require_all_grads && !e.grad_touched)
      throw std::runtime_error("missing gradient for parameter: " + name);
    e.m = S(cfg.beta1) * e.m + S(1.0 - cfg.beta1) * e.grad;
    e.v = S(cfg.beta2) * e.v + (S(1.0 - cfg.beta2) * e.grad.array().square()).matrix();
    MatX<S> m_hat = e.m / corr1;
    MatX<S> v_hat = e.v / corr2;
    e.value.array() -= S(cfg.lr) * m_hat.array() / (v_hat.array().sqrt() + S(cfg.eps));
    e.grad.setZero();
    e.grad_touched = false;
  }
}

template <typename S>
void ema_update(ParamStore<S>& store, double beta) {
  for (const std::string& name : store.names()) {
    ParamEntry<S>& e = store.at(name);
    e.ema = S(beta) * e.ema + S(1.0 - beta) * e.value;
  }
}

// Cosine annealing from eta0 to eta_min over the first half of training,
// constant eta_min afterwards.
inline double lr_schedule(int epoch, int total_epochs, double eta0, double eta_min = 1e-5) {
  double t_half = total_epochs / 2.0;
  if (t_half <= 0 || epoch >= t_half) return eta_min;
  return eta_min + (eta0 - eta_min) * (1.0 + std::cos(M_PI * epoch / t_half)) / 2.0;
}

}  // namespace satnn
