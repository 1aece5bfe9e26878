#pragma once

#include <Eigen/Dense>
#include <memory>

#include "kinlab/common/random.hpp"
#include "kinlab/oracles/reg.hpp"

namespace kinlab {

// Two-layer contrastive classifier with Gumbel-softmax bottlenecks.
//
//   z_F = x                        or softmax((P_F x + c_F + g_F) / tau)
//   z_B = x'                       or softmax((P_B x' + c_B + g_B) / tau)
//   h   = leaky_relu(W1 [z_F; onehot(a); z_B] + b1)
//   f   = sigmoid(w2 . h + b2)
//
// All parameters live in one flat vector; the blocks below are views.  At
// evaluation the bottleneck is the one-hot argmax of the logits, so the
// prediction depends on a quantized side only through its code.
class GumbelBottleneckNet final : public BottleneckRegressor {
 public:
  struct Shape {
    int dx = 0;       // feature size of x
    int dnext = 0;    // feature size of x'
    int actions = 0;
    int M = 0;        // forward codes (0 = x not quantized)
    int N = 0;        // backward codes (0 = x' not quantized)
    int hidden = 56;
  };

  struct Batch {
    Eigen::MatrixXd x;       // dx x B
    Eigen::MatrixXd next;    // dnext x B
    std::vector<Action> a;
    Eigen::VectorXd y;
    Eigen::VectorXd weight;
  };

  // Linear feeds the raw logits P x + c through, with no softmax.
  enum class Pass { Gumbel, Linear, Hard };

  struct Noise {
    Eigen::MatrixXd forward;   // M x B
    Eigen::MatrixXd backward;  // N x B
  };

  GumbelBottleneckNet(Shape shape, ObservationFeatures fx, ObservationFeatures fnext, double temperature,
                      double leaky_slope, RegLoss loss);

  const Shape& shape() const { return shape_; }
  Eigen::VectorXd& params() { return theta_; }
  const Eigen::VectorXd& params() const { return theta_; }
  Eigen::Index num_params() const { return theta_.size(); }
  void init_random(Rng& rng);

  // Freezes every block except the hidden/output layers (mask 0 = frozen).
  Eigen::VectorXd head_only_mask() const;

  Noise sample_noise(int batch, Rng& rng) const;

  // Weighted mean loss; fills grad when non-null.
  double loss_and_grad(const Batch& b, Pass pass, const Noise* noise, Eigen::VectorXd* grad) const;

  Batch make_batch(const std::vector<const ContrastiveExample*>& examples) const;

  // BottleneckRegressor
  RegBackend backend() const override { return RegBackend::SgdGumbel; }
  int forward_capacity() const override { return shape_.M; }
  int backward_capacity() const override { return shape_.N; }
  int phi_forward(const Observation& x) const override;
  int phi_backward(const Observation& next) const override;
  double predict(const Observation& x, Action a, const Observation& next) const override;
  nlohmann::json to_json() const override;

  // Head output given codes; only defined for fully quantized (joint) models.
  double predict_codes(int i, Action a, int j) const;

  double temperature() const { return temperature_; }
  RegLoss loss() const { return loss_; }

 private:
  struct Layout {
    Eigen::Index PF = 0, cF = 0, PB = 0, cB = 0, W1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
    int in_dim = 0;
  };
  void build_layout();

  Shape shape_;
  ObservationFeatures fx_, fnext_;
  double temperature_;
  double slope_;
  RegLoss loss_;
  Layout L_;
  Eigen::VectorXd theta_;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central differences of the Gumbel-relaxed loss with the noise held fixed.
// Entries where the mask is 0 are skipped.  Relative error is
// |g - g_fd| / max(|g|, |g_fd|, floor).
GradCheckResult grad_check(const GumbelBottleneckNet& net, const ContrastiveExample& sample,
                           const GumbelBottleneckNet::Noise& noise, double eps, const Eigen::VectorXd* mask = nullptr,
                           double floor = 1e-6);

// Builds the network that reg_fit would train, with random parameters.
std::shared_ptr<GumbelBottleneckNet> make_gumbel_net(const std::vector<ContrastiveExample>& data, int N, int M,
                                                     const GumbelNetConfig& cfg, Rng& rng);

}  // namespace kinlab
