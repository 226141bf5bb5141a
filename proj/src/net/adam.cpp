#include "cst/net/adam.hpp"

#include <cmath>
#include <iostream>

namespace cst::net {

Adam::Adam(Model& model) {
  for (const ParamRef& ref : param_refs(model)) {
    m_.push_back(Eigen::VectorXd::Zero(ref.size));
    v_.push_back(Eigen::VectorXd::Zero(ref.size));
  }
}

bool Adam::step(Model& model, const Gradients& grads, const AdamHyper& hyper) {
  if (!grads.all_finite()) {
    std::cerr << "warning: non-finite gradient, step " << (t_ + 1) << " rejected\n";
    return false;
  }
  auto refs = param_refs(model);
  auto grad_refs = param_refs(const_cast<Gradients&>(grads));
  ++t_;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < refs.size(); ++k) {
    Eigen::Map<Eigen::ArrayXd> theta(refs[k].data, refs[k].size);
    Eigen::Map<const Eigen::ArrayXd> grad(grad_refs[k].data, grad_refs[k].size);
    Eigen::ArrayXd g = grad;
    if (refs[k].weight_decay && hyper.weight_decay != 0.0)
      g += hyper.weight_decay * theta;
    m_[k].array() = hyper.beta1 * m_[k].array() + (1.0 - hyper.beta1) * g;
    v_[k].array() = hyper.beta2 * v_[k].array() + (1.0 - hyper.beta2) * g.square();
    theta -= hyper.lr * (m_[k].array() / bc1) / ((v_[k].array() / bc2).sqrt() + hyper.eps);
  }
  model.step_count = t_;
  return true;
}

}  // namespace cst::net
