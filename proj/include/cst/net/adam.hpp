#pragma once

#include <Eigen/Core>
#include <vector>

#include "cst/net/model.hpp"

namespace cst::net {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 2e-6;  // L2 penalty added to the gradient, weights only
};

/// Adam with bias correction. First and second moments are kept per
/// parameter tensor in the shared enumeration order.
class Adam {
 public:
  explicit Adam(Model& model);

  /// Applies one update. Returns false (and leaves the model untouched) if
  /// any gradient is non-finite.
  bool step(Model& model, const Gradients& grads, const AdamHyper& hyper);

  long long steps_taken() const { return t_; }

 private:
  std::vector<Eigen::VectorXd> m_, v_;
  long long t_ = 0;
};

}  // namespace cst::net
