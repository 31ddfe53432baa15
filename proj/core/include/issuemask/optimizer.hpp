#pragma once

#include <cstddef>
#include <vector>

#include "issuemask/encoder.hpp"

namespace issuemask {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;
  double weight_decay = 0.01;
};

/// Adam with decoupled weight decay, applied only to parameters marked `decay`.
template <typename S>
class AdamW {
 public:
  AdamW(std::vector<Param<S>*> params, AdamWConfig config = {});

  /// Scales all gradients so their joint L2 norm is at most max_norm; returns the norm before scaling.
  double clip_grad_norm(double max_norm);
  void step(double learning_rate);
  void zero_grad();
  std::size_t steps() const { return steps_; }

 private:
  std::vector<Param<S>*> params_;
  std::vector<Matrix<S>> m_;
  std::vector<Matrix<S>> v_;
  AdamWConfig config_;
  std::size_t steps_ = 0;
};

/// Linear decay from `base` at step 0 to 0 at `total` steps, no warmup.
double linear_decay(double base, std::size_t step, std::size_t total);

}  // namespace issuemask
