#include "kinlab/oracles/optim.hpp"

#include <cmath>

#include "kinlab/common/errors.hpp"

namespace kinlab {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd" || name == "sgd_momentum") return OptimizerKind::SgdMomentum;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigurationError("unknown optimizer '" + name + "'");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "sgd_momentum"; }

Optimizer::Optimizer(OptimizerConfig cfg, Eigen::Index size) : cfg_(cfg) {
  m_ = Eigen::VectorXd::Zero(size);
  v_ = Eigen::VectorXd::Zero(size);
}

void Optimizer::reset() {
  m_.setZero();
  v_.setZero();
  t_ = 0;
}

void Optimizer::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad, const Eigen::VectorXd* mask) {
  ++t_;
  if (cfg_.kind == OptimizerKind::SgdMomentum) {
    m_ = cfg_.momentum * m_ + grad;
    if (mask) params -= cfg_.lr * m_.cwiseProduct(*mask);
    else params -= cfg_.lr * m_;
    return;
  }
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  Eigen::VectorXd update = (m_ / c1).array() / ((v_ / c2).array().sqrt() + cfg_.eps);
  if (mask) update = update.cwiseProduct(*mask);
  params -= cfg_.lr * update;
}

}  // namespace kinlab
