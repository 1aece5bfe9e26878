#include "kinlab/oracles/gumbel_net.hpp"

#include <cmath>
#include <limits>

#include "kinlab/common/errors.hpp"

namespace kinlab {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

void softmax_columns(Eigen::MatrixXd& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    const double m = u.col(c).maxCoeff();
    u.col(c) = (u.col(c).array() - m).exp();
    u.col(c) /= u.col(c).sum();
  }
}

void hard_columns(Eigen::MatrixXd& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    u.col(c).maxCoeff(&arg);  // first maximum
    u.col(c).setZero();
    u(arg, c) = 1.0;
  }
}

int argmax_code(const Eigen::MatrixXd& P, const Eigen::VectorXd& c, const Eigen::VectorXd& feat) {
  Eigen::VectorXd logits = P * feat + c;
  Eigen::Index arg = 0;
  logits.maxCoeff(&arg);
  return static_cast<int>(arg);
}

}  // namespace

GumbelBottleneckNet::GumbelBottleneckNet(Shape shape, ObservationFeatures fx, ObservationFeatures fnext,
                                         double temperature, double leaky_slope, RegLoss loss)
    : shape_(shape), fx_(fx), fnext_(fnext), temperature_(temperature), slope_(leaky_slope), loss_(loss) {
  if (temperature_ <= 0.0) throw ConfigurationError("Gumbel temperature must be positive");
  build_layout();
  theta_ = Eigen::VectorXd::Zero(L_.total);
}

void GumbelBottleneckNet::build_layout() {
  const auto& s = shape_;
  Eigen::Index off = 0;
  L_.PF = off;
  off += static_cast<Eigen::Index>(s.M) * s.dx;
  L_.cF = off;
  off += s.M;
  L_.PB = off;
  off += static_cast<Eigen::Index>(s.N) * s.dnext;
  L_.cB = off;
  off += s.N;
  L_.in_dim = (s.M > 0 ? s.M : s.dx) + s.actions + (s.N > 0 ? s.N : s.dnext);
  L_.W1 = off;
  off += static_cast<Eigen::Index>(s.hidden) * L_.in_dim;
  L_.b1 = off;
  off += s.hidden;
  L_.w2 = off;
  off += s.hidden;
  L_.b2 = off;
  off += 1;
  L_.total = off;
}

void GumbelBottleneckNet::init_random(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto fill = [&](Eigen::Index start, Eigen::Index count, double scale) {
    for (Eigen::Index i = 0; i < count; ++i) theta_[start + i] = scale * g(rng);
  };
  const auto& s = shape_;
  fill(L_.PF, static_cast<Eigen::Index>(s.M) * s.dx, 1.0 / std::sqrt(std::max(1, s.dx)));
  fill(L_.PB, static_cast<Eigen::Index>(s.N) * s.dnext, 1.0 / std::sqrt(std::max(1, s.dnext)));
  fill(L_.W1, static_cast<Eigen::Index>(s.hidden) * L_.in_dim, 1.0 / std::sqrt(L_.in_dim));
  fill(L_.w2, s.hidden, 1.0 / std::sqrt(s.hidden));
  theta_.segment(L_.cF, s.M).setZero();
  theta_.segment(L_.cB, s.N).setZero();
  theta_.segment(L_.b1, s.hidden).setZero();
  theta_[L_.b2] = 0.0;
}

Eigen::VectorXd GumbelBottleneckNet::head_only_mask() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(L_.total);
  m.segment(L_.W1, L_.total - L_.W1).setOnes();
  return m;
}

GumbelBottleneckNet::Noise GumbelBottleneckNet::sample_noise(int batch, Rng& rng) const {
  auto gumbel = [&](int rows) {
    Eigen::MatrixXd g(rows, batch);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      double u = uniform01(rng);
      u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
      g.data()[i] = -std::log(-std::log(u));
    }
    return g;
  };
  return Noise{gumbel(shape_.M), gumbel(shape_.N)};
}

GumbelBottleneckNet::Batch GumbelBottleneckNet::make_batch(const std::vector<const ContrastiveExample*>& ex) const {
  Batch b;
  const Eigen::Index B = static_cast<Eigen::Index>(ex.size());
  b.x.resize(fx_.dim(), B);
  b.next.resize(fnext_.dim(), B);
  b.y.resize(B);
  b.weight.resize(B);
  for (Eigen::Index i = 0; i < B; ++i) {
    fx_.write(ex[i]->x, b.x.col(i));
    fnext_.write(ex[i]->next, b.next.col(i));
    b.a.push_back(ex[i]->a);
    b.y[i] = ex[i]->y;
    b.weight[i] = ex[i]->weight;
  }
  return b;
}

double GumbelBottleneckNet::loss_and_grad(const Batch& b, Pass pass, const Noise* noise, Eigen::VectorXd* grad) const {
  const auto& s = shape_;
  const Eigen::Index B = b.x.cols();
  const double* th = theta_.data();
  Eigen::Map<const Eigen::MatrixXd> PF(th + L_.PF, s.M, s.dx);
  Eigen::Map<const Eigen::VectorXd> cF(th + L_.cF, s.M);
  Eigen::Map<const Eigen::MatrixXd> PB(th + L_.PB, s.N, s.dnext);
  Eigen::Map<const Eigen::VectorXd> cB(th + L_.cB, s.N);
  Eigen::Map<const Eigen::MatrixXd> W1(th + L_.W1, s.hidden, L_.in_dim);
  Eigen::Map<const Eigen::VectorXd> b1(th + L_.b1, s.hidden);
  Eigen::Map<const Eigen::VectorXd> w2(th + L_.w2, s.hidden);
  const double b2 = th[L_.b2];
  if (pass == Pass::Gumbel && !noise) throw ConfigurationError("Gumbel pass needs a noise sample");

  auto encode = [&](const Eigen::MatrixXd& P, const auto& c, const Eigen::MatrixXd& X, const Eigen::MatrixXd* G) {
    Eigen::MatrixXd u = P * X;
    u.colwise() += Eigen::VectorXd(c);
    if (pass == Pass::Hard) {
      hard_columns(u);
      return u;
    }
    if (pass == Pass::Linear) return u;
    u += *G;
    u /= temperature_;
    softmax_columns(u);
    return u;
  };

  const int dF = s.M > 0 ? s.M : s.dx;
  const int dB = s.N > 0 ? s.N : s.dnext;
  Eigen::MatrixXd in = Eigen::MatrixXd::Zero(L_.in_dim, B);
  Eigen::MatrixXd zF, zB;
  if (s.M > 0) {
    zF = encode(Eigen::MatrixXd(PF), cF, b.x, noise ? &noise->forward : nullptr);
    in.topRows(dF) = zF;
  } else {
    in.topRows(dF) = b.x;
  }
  for (Eigen::Index i = 0; i < B; ++i) in(dF + b.a[i], i) = 1.0;
  if (s.N > 0) {
    zB = encode(Eigen::MatrixXd(PB), cB, b.next, noise ? &noise->backward : nullptr);
    in.bottomRows(dB) = zB;
  } else {
    in.bottomRows(dB) = b.next;
  }

  Eigen::MatrixXd pre = W1 * in;
  pre.colwise() += b1;
  Eigen::MatrixXd act = pre.unaryExpr([this](double v) { return v > 0 ? v : slope_ * v; });
  Eigen::RowVectorXd out = w2.transpose() * act;
  out.array() += b2;

  const double wsum = b.weight.sum();
  if (wsum <= 0.0) throw ConfigurationError("batch has zero total weight");
  double loss = 0.0;
  Eigen::RowVectorXd dout(B);
  for (Eigen::Index i = 0; i < B; ++i) {
    const double z = out[i];
    const double y = b.y[i];
    const double w = b.weight[i] / wsum;
    if (loss_ == RegLoss::CrossEntropy) {
      loss += w * (softplus(z) - y * z);
      dout[i] = w * (sigmoid(z) - y);
    } else {
      const double p = sigmoid(z);
      loss += w * (p - y) * (p - y);
      dout[i] = w * 2.0 * (p - y) * p * (1.0 - p);
    }
  }
  if (!grad) return loss;

  grad->setZero(L_.total);
  double* g = grad->data();
  Eigen::Map<Eigen::VectorXd> gw2(g + L_.w2, s.hidden);
  gw2 = act * dout.transpose();
  g[L_.b2] = dout.sum();
  Eigen::MatrixXd dact = w2 * dout;
  Eigen::MatrixXd dpre = dact.cwiseProduct(pre.unaryExpr([this](double v) { return v > 0 ? 1.0 : slope_; }));
  Eigen::Map<Eigen::MatrixXd> gW1(g + L_.W1, s.hidden, L_.in_dim);
  gW1 = dpre * in.transpose();
  Eigen::Map<Eigen::VectorXd> gb1(g + L_.b1, s.hidden);
  gb1 = dpre.rowwise().sum();
  if (pass == Pass::Hard) return loss;

  Eigen::MatrixXd din = W1.transpose() * dpre;
  auto back_encoder = [&](const Eigen::MatrixXd& z, const Eigen::MatrixXd& dz, const Eigen::MatrixXd& X,
                          Eigen::Index offP, Eigen::Index offc, int rows, int cols) {
    if (pass == Pass::Linear) {
      Eigen::Map<Eigen::MatrixXd>(g + offP, rows, cols) = dz * X.transpose();
      Eigen::Map<Eigen::VectorXd>(g + offc, rows) = dz.rowwise().sum();
      return;
    }
    Eigen::MatrixXd du(z.rows(), z.cols());
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      const double dot = z.col(c).dot(dz.col(c));
      du.col(c) = z.col(c).cwiseProduct(dz.col(c).array().matrix() - Eigen::VectorXd::Constant(z.rows(), dot));
    }
    du /= temperature_;
    Eigen::Map<Eigen::MatrixXd>(g + offP, rows, cols) = du * X.transpose();
    Eigen::Map<Eigen::VectorXd>(g + offc, rows) = du.rowwise().sum();
  };
  if (s.M > 0) back_encoder(zF, din.topRows(dF), b.x, L_.PF, L_.cF, s.M, s.dx);
  if (s.N > 0) back_encoder(zB, din.bottomRows(dB), b.next, L_.PB, L_.cB, s.N, s.dnext);
  return loss;
}

int GumbelBottleneckNet::phi_forward(const Observation& x) const {
  if (shape_.M == 0) return -1;
  Eigen::Map<const Eigen::MatrixXd> PF(theta_.data() + L_.PF, shape_.M, shape_.dx);
  Eigen::Map<const Eigen::VectorXd> cF(theta_.data() + L_.cF, shape_.M);
  return argmax_code(PF, cF, fx_(x));
}

int GumbelBottleneckNet::phi_backward(const Observation& next) const {
  if (shape_.N == 0) return -1;
  Eigen::Map<const Eigen::MatrixXd> PB(theta_.data() + L_.PB, shape_.N, shape_.dnext);
  Eigen::Map<const Eigen::VectorXd> cB(theta_.data() + L_.cB, shape_.N);
  return argmax_code(PB, cB, fnext_(next));
}

double GumbelBottleneckNet::predict(const Observation& x, Action a, const Observation& next) const {
  ContrastiveExample e{x, a, next, 0.0, 1.0};
  const Batch b = make_batch({&e});
  const auto& s = shape_;
  // Recompute the output through the hard bottleneck.
  Eigen::Map<const Eigen::MatrixXd> W1(theta_.data() + L_.W1, s.hidden, L_.in_dim);
  Eigen::Map<const Eigen::VectorXd> b1(theta_.data() + L_.b1, s.hidden);
  Eigen::Map<const Eigen::VectorXd> w2(theta_.data() + L_.w2, s.hidden);
  Eigen::VectorXd in = Eigen::VectorXd::Zero(L_.in_dim);
  const int dF = s.M > 0 ? s.M : s.dx;
  const int dB = s.N > 0 ? s.N : s.dnext;
  if (s.M > 0) in[phi_forward(x)] = 1.0;
  else in.head(dF) = b.x.col(0);
  in[dF + a] = 1.0;
  if (s.N > 0) in[dF + s.actions + phi_backward(next)] = 1.0;
  else in.tail(dB) = b.next.col(0);
  Eigen::VectorXd pre = W1 * in + b1;
  for (Eigen::Index i = 0; i < pre.size(); ++i)
    if (pre[i] < 0) pre[i] *= slope_;
  return sigmoid(w2.dot(pre) + theta_[L_.b2]);
}

double GumbelBottleneckNet::predict_codes(int i, Action a, int j) const {
  const auto& s = shape_;
  if (s.M == 0 || s.N == 0) throw UnsupportedOperation("code-level prediction needs a joint bottleneck");
  Eigen::Map<const Eigen::MatrixXd> W1(theta_.data() + L_.W1, s.hidden, L_.in_dim);
  Eigen::Map<const Eigen::VectorXd> b1(theta_.data() + L_.b1, s.hidden);
  Eigen::Map<const Eigen::VectorXd> w2(theta_.data() + L_.w2, s.hidden);
  Eigen::VectorXd pre = W1.col(i) + W1.col(s.M + a) + W1.col(s.M + s.actions + j) + b1;
  for (Eigen::Index k = 0; k < pre.size(); ++k)
    if (pre[k] < 0) pre[k] *= slope_;
  return sigmoid(w2.dot(pre) + theta_[L_.b2]);
}

nlohmann::json GumbelBottleneckNet::to_json() const {
  std::vector<double> p(theta_.data(), theta_.data() + theta_.size());
  return {{"backend", "sgd_gumbel"},
          {"shape", {{"dx", shape_.dx}, {"dnext", shape_.dnext}, {"actions", shape_.actions},
                     {"M", shape_.M}, {"N", shape_.N}, {"hidden", shape_.hidden}}},
          {"features_x", {{"discrete_dim", fx_.discrete_dim}, {"vector_dim", fx_.vector_dim}}},
          {"features_next", {{"discrete_dim", fnext_.discrete_dim}, {"vector_dim", fnext_.vector_dim}}},
          {"temperature", temperature_},
          {"leaky_slope", slope_},
          {"loss", to_string(loss_)},
          {"params", p}};
}

GradCheckResult grad_check(const GumbelBottleneckNet& net, const ContrastiveExample& sample,
                           const GumbelBottleneckNet::Noise& noise, double eps, const Eigen::VectorXd* mask,
                           double floor) {
  const auto batch = net.make_batch({&sample});
  Eigen::VectorXd grad;
  net.loss_and_grad(batch, GumbelBottleneckNet::Pass::Gumbel, &noise, &grad);
  GumbelBottleneckNet probe = net;
  GradCheckResult res;
  for (Eigen::Index i = 0; i < net.num_params(); ++i) {
    if (mask && (*mask)[i] == 0.0) continue;
    const double orig = probe.params()[i];
    probe.params()[i] = orig + eps;
    const double up = probe.loss_and_grad(batch, GumbelBottleneckNet::Pass::Gumbel, &noise, nullptr);
    probe.params()[i] = orig - eps;
    const double down = probe.loss_and_grad(batch, GumbelBottleneckNet::Pass::Gumbel, &noise, nullptr);
    probe.params()[i] = orig;
    const double numeric = (up - down) / (2.0 * eps);
    const double err = std::abs(grad[i] - numeric) / std::max({std::abs(grad[i]), std::abs(numeric), floor});
    if (err > res.max_relative_error || res.worst_index < 0) {
      res.max_relative_error = err;
      res.worst_index = i;
      res.analytic = grad[i];
      res.numeric = numeric;
    }
  }
  return res;
}

}  // namespace kinlab
