#include "issuemask/optimizer.hpp"

#include <cmath>

namespace issuemask {

template <typename S>
AdamW<S>::AdamW(std::vector<Param<S>*> params, AdamWConfig config) : params_(std::move(params)), config_(config) {
  for (const auto* p : params_) {
    m_.push_back(Matrix<S>::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix<S>::Zero(p->value.rows(), p->value.cols()));
  }
}

template <typename S>
double AdamW<S>::clip_grad_norm(double max_norm) {
  double sq = 0.0;
  for (const auto* p : params_) sq += p->grad.template cast<double>().squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const auto factor = static_cast<S>(max_norm / norm);
    for (auto* p : params_) p->grad *= factor;
  }
  return norm;
}

template <typename S>
void AdamW<S>::step(double learning_rate) {
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  const auto b1 = static_cast<S>(config_.beta1);
  const auto b2 = static_cast<S>(config_.beta2);
  const auto step_size = static_cast<S>(learning_rate / c1);
  const auto inv_c2 = static_cast<S>(1.0 / c2);
  const auto eps = static_cast<S>(config_.eps);
  const auto decay = static_cast<S>(learning_rate * config_.weight_decay);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    m_[i] = b1 * m_[i] + (S(1) - b1) * p.grad;
    v_[i] = b2 * v_[i] + (S(1) - b2) * p.grad.cwiseProduct(p.grad);
    if (p.decay && config_.weight_decay > 0) p.value -= decay * p.value;
    p.value.array() -= step_size * m_[i].array() / ((v_[i].array() * inv_c2).sqrt() + eps);
  }
}

template <typename S>
void AdamW<S>::zero_grad() {
  for (auto* p : params_) p->grad.setZero();
}

template class AdamW<float>;
template class AdamW<double>;

double linear_decay(double base, std::size_t step, std::size_t total) {
  if (total == 0 || step >= total) return 0.0;
  return base * (1.0 - static_cast<double>(step) / static_cast<double>(total));
}

}  // namespace issuemask
