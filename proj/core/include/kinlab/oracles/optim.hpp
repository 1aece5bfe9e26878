#pragma once

#include <Eigen/Dense>
#include <string>

namespace kinlab {

enum class OptimizerKind { SgdMomentum, Adam };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::SgdMomentum;
  double lr = 1e-3;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First-order update of a flat parameter vector.  Entries whose mask is 0
// are frozen.
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, Eigen::Index size);
  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad, const Eigen::VectorXd* mask = nullptr);
  void reset();

 private:
  OptimizerConfig cfg_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

}  // namespace kinlab
