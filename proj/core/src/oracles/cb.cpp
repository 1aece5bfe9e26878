#include "kinlab/oracles/cb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "kinlab/common/errors.hpp"

namespace kinlab {

namespace {

void validate(const std::vector<CBExample>& data, int num_actions) {
  if (data.empty()) throw ConfigurationError("contextual bandit dataset is empty");
  for (const auto& e : data) {
    if (!(e.p > 0.0) || e.p > 1.0) throw ConfigurationError("logging probability must lie in (0, 1]");
    if (e.a < 0 || e.a >= num_actions) throw ConfigurationError("logged action out of range");
  }
}

CbResult tabular(const std::vector<CBExample>& data, int K) {
  std::map<ObsId, std::vector<double>> score;
  for (const auto& e : data) {
    if (!e.x.is_discrete()) throw UnsupportedOperation("tabular policy class needs discrete observations");
    auto& s = score[e.x.id()];
    if (s.empty()) s.assign(static_cast<std::size_t>(K), 0.0);
    s[e.a] += e.r / e.p;
  }
  std::map<ObsId, Action> table;
  double total = 0.0;
  for (const auto& [id, s] : score) {
    const auto best = std::max_element(s.begin(), s.end());  // first maximum: lowest action
    table[id] = static_cast<Action>(best - s.begin());
    total += *best;
  }
  CbResult r;
  r.policy = std::make_shared<ObservationTableDecider>(K, std::move(table));
  r.objective = total / static_cast<double>(data.size());
  return r;
}

CbResult enumerated(const std::vector<CBExample>& data, const EnumeratedClass& cls) {
  if (cls.members.empty()) throw ConfigurationError("enumerated policy class is empty");
  if (static_cast<double>(cls.members.size()) > cls.budget)
    throw EnumerationBudgetExceeded("explicit policy class", static_cast<double>(cls.members.size()), cls.budget);
  CbResult r;
  for (std::size_t k = 0; k < cls.members.size(); ++k) {
    const double v = iw_objective(data, *cls.members[k]);
    if (r.member_index < 0 || v > r.objective) {
      r.objective = v;
      r.member_index = static_cast<long>(k);
    }
  }
  r.policy = cls.members[static_cast<std::size_t>(r.member_index)];
  return r;
}

CbResult linear(const std::vector<CBExample>& data, int K, const LinearClass& cls) {
  ObservationFeatures f;
  if (data.front().x.is_discrete()) {
    ObsId m = 0;
    for (const auto& e : data) m = std::max(m, e.x.id());
    f.discrete_dim = static_cast<int>(m + 1);
  } else {
    f.vector_dim = static_cast<int>(data.front().x.vec().size());
  }
  const int d = f.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X(d, n);
  for (Eigen::Index i = 0; i < n; ++i) f.write(data[i].x, X.col(i));

  Rng rng = make_rng(cls.seed, {0x6362ULL});
  std::normal_distribution<double> init(0.0, cls.init_scale);
  // theta = [vec(W) (K x d, column-major); b]
  Eigen::VectorXd theta(K * d + K);
  for (Eigen::Index i = 0; i < K * d; ++i) theta[i] = init(rng);
  theta.tail(K).setZero();
  Optimizer opt(cls.optimizer, theta.size());
  Eigen::VectorXd grad(theta.size());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int B = std::max(1, cls.batch);
  for (int epoch = 0; epoch < cls.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += B) {
      const Eigen::Index end = std::min<Eigen::Index>(n, start + B);
      grad.setZero();
      Eigen::Map<const Eigen::MatrixXd> W(theta.data(), K, d);
      Eigen::Map<Eigen::MatrixXd> gW(grad.data(), K, d);
      const double scale = 2.0 / static_cast<double>(end - start);
      for (Eigen::Index k = start; k < end; ++k) {
        const Eigen::Index i = order[k];
        const Action a = data[i].a;
        const double q = W.row(a).dot(X.col(i)) + theta[K * d + a];
        const double g = scale * (q - data[i].r);
        gW.row(a) += g * X.col(i).transpose();
        grad[K * d + a] += g;
      }
      opt.step(theta, grad);
    }
  }
  Eigen::MatrixXd W = Eigen::Map<const Eigen::MatrixXd>(theta.data(), K, d);
  Eigen::VectorXd b = theta.tail(K);
  CbResult r;
  r.policy = std::make_shared<LinearArgmaxDecider>(std::move(W), std::move(b), f);
  r.objective = iw_objective(data, *r.policy);
  return r;
}

}  // namespace

double iw_objective(const std::vector<CBExample>& data, const StepDecider& pi) {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : data) {
    if (e.r == 0.0) continue;
    s += e.r * pi.distribution(e.x)[e.a] / e.p;
  }
  return s / static_cast<double>(data.size());
}

CbResult cb_optimize(const std::vector<CBExample>& data, int num_actions, const PolicyClass& cls) {
  validate(data, num_actions);
  if (std::holds_alternative<TabularClass>(cls)) return tabular(data, num_actions);
  if (const auto* e = std::get_if<EnumeratedClass>(&cls)) return enumerated(data, *e);
  return linear(data, num_actions, std::get<LinearClass>(cls));
}

double delta_csc(double n, int num_actions, double class_size, double delta) {
  return 4.0 * std::sqrt(num_actions / n * std::log(2.0 * class_size / delta));
}

}  // namespace kinlab
