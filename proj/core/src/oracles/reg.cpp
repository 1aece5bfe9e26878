#include "kinlab/oracles/reg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>

#include "kinlab/common/errors.hpp"
#include "kinlab/oracles/gumbel_net.hpp"

namespace kinlab {

namespace {

class ExactBottleneck final : public BottleneckRegressor {
 public:
  ExactBottleneck(std::vector<int> fmap, std::vector<int> bmap, int M, int K, int N, std::vector<double> w)
      : fmap_(std::move(fmap)), bmap_(std::move(bmap)), M_(M), K_(K), N_(N), w_(std::move(w)) {}

  RegBackend backend() const override { return RegBackend::ExactErm; }
  int forward_capacity() const override { return M_; }
  int backward_capacity() const override { return N_; }
  int phi_forward(const Observation& x) const override { return lookup(fmap_, x); }
  int phi_backward(const Observation& next) const override { return lookup(bmap_, next); }
  double predict(const Observation& x, Action a, const Observation& next) const override {
    return w_[cell(phi_forward(x), a, phi_backward(next))];
  }
  nlohmann::json to_json() const override {
    return {{"backend", "exact_erm"}, {"M", M_}, {"N", N_}, {"actions", K_},
            {"phi_forward", fmap_}, {"phi_backward", bmap_}, {"w", w_}};
  }

 private:
  static int lookup(const std::vector<int>& map, const Observation& x) {
    const ObsId id = x.id();
    return id >= 0 && id < static_cast<ObsId>(map.size()) ? map[static_cast<std::size_t>(id)] : 0;
  }
  std::size_t cell(int i, Action a, int j) const {
    return (static_cast<std::size_t>(i) * K_ + static_cast<std::size_t>(a)) * N_ + static_cast<std::size_t>(j);
  }
  std::vector<int> fmap_, bmap_;
  int M_, K_, N_;
  std::vector<double> w_;
};

int infer_actions(const std::vector<ContrastiveExample>& data) {
  Action m = 0;
  for (const auto& e : data) m = std::max(m, e.a);
  return m + 1;
}

double weighted_loss(RegLoss loss, double ybar, const std::vector<ContrastiveExample>& data,
                     const std::vector<std::size_t>& idx) {
  double s = 0.0, w = 0.0;
  const double p = std::clamp(ybar, 1e-12, 1.0 - 1e-12);
  for (std::size_t i : idx) {
    const auto& e = data[i];
    const double l = loss == RegLoss::CrossEntropy ? -(e.y * std::log(p) + (1.0 - e.y) * std::log(1.0 - p))
                                                   : (ybar - e.y) * (ybar - e.y);
    s += e.weight * l;
    w += e.weight;
  }
  return w > 0 ? s / w : 0.0;
}

RegFit fit_exact(const std::vector<ContrastiveExample>& data, int N, int M, const ExactRegConfig& cfg) {
  for (const auto& e : data)
    if (!e.x.is_discrete() || !e.next.is_discrete())
      throw UnsupportedOperation("exact-ERM regression needs discrete observations");
  const int K = infer_actions(data);
  const PhiClass constant{1, {std::vector<int>{}}};
  const PhiClass& F = cfg.forward.maps.empty() ? constant : cfg.forward;
  const PhiClass& Bc = cfg.backward.maps.empty() ? constant : cfg.backward;
  const int Mc = F.capacity, Nc = Bc.capacity;
  if ((!cfg.forward.maps.empty() && Mc > M) || (!cfg.backward.maps.empty() && Nc > N))
    throw ConfigurationError("abstraction class capacity exceeds the requested bottleneck size");

  // Aggregate identical triples: (x, a, x') -> (sum w, sum w y).
  std::map<std::tuple<ObsId, Action, ObsId>, std::pair<double, double>> agg;
  double W = 0.0, Y = 0.0;
  for (const auto& e : data) {
    auto& c = agg[{e.x.id(), e.a, e.next.id()}];
    c.first += e.weight;
    c.second += e.weight * e.y;
    W += e.weight;
    Y += e.weight * e.y;
  }
  struct Key {
    ObsId x;
    Action a;
    ObsId next;
    double w, y;
  };
  std::vector<Key> keys;
  for (const auto& [k, v] : agg) keys.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), v.first, v.second});
  auto lookup = [](const std::vector<int>& map, ObsId id) {
    return id >= 0 && id < static_cast<ObsId>(map.size()) ? map[static_cast<std::size_t>(id)] : 0;
  };

  const std::size_t cells = static_cast<std::size_t>(Mc) * K * Nc;
  std::vector<double> Sw(cells), Sy(cells);
  std::vector<int> fi(keys.size());
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_f = 0, best_b = 0;
  for (std::size_t f = 0; f < F.maps.size(); ++f) {
    for (std::size_t k = 0; k < keys.size(); ++k) fi[k] = lookup(F.maps[f], keys[k].x);
    for (std::size_t b = 0; b < Bc.maps.size(); ++b) {
      std::fill(Sw.begin(), Sw.end(), 0.0);
      std::fill(Sy.begin(), Sy.end(), 0.0);
      for (std::size_t k = 0; k < keys.size(); ++k) {
        const std::size_t c = (static_cast<std::size_t>(fi[k]) * K + keys[k].a) * Nc + lookup(Bc.maps[b], keys[k].next);
        Sw[c] += keys[k].w;
        Sy[c] += keys[k].y;
      }
      double loss = 0.0;
      for (std::size_t c = 0; c < cells; ++c)
        if (Sw[c] > 0.0) loss += Sy[c] - Sy[c] * Sy[c] / Sw[c];
      if (f + b == 0 || loss < best - 1e-12 * std::max(1.0, std::abs(best))) {
        best = loss;
        best_f = f;
        best_b = b;
      }
    }
  }
  std::fill(Sw.begin(), Sw.end(), 0.0);
  std::fill(Sy.begin(), Sy.end(), 0.0);
  for (const auto& k : keys) {
    const std::size_t c =
        (static_cast<std::size_t>(lookup(F.maps[best_f], k.x)) * K + k.a) * Nc + lookup(Bc.maps[best_b], k.next);
    Sw[c] += k.w;
    Sy[c] += k.y;
  }
  std::vector<double> w(cells, 0.5);
  for (std::size_t c = 0; c < cells; ++c)
    if (Sw[c] > 0.0) w[c] = Sy[c] / Sw[c];

  RegFit fit;
  fit.model = std::make_shared<ExactBottleneck>(F.maps[best_f], Bc.maps[best_b], Mc, K, Nc, std::move(w));
  auto& r = fit.report;
  r.loss_name = "square";
  r.n_train = data.size();
  r.chosen_epoch = 0;
  r.train_loss.push_back(W > 0 ? best / W : 0.0);
  r.best_validation_loss = r.train_loss.back();
  r.baseline_loss = W > 0 ? (Y - Y * Y / W) / W : 0.0;
  const double log_phi = std::max(std::log(static_cast<double>(F.maps.size())), std::log(static_cast<double>(Bc.maps.size())));
  r.delta_reg = delta_reg(static_cast<double>(data.size()), log_phi, std::max(N, M), K, 0.05);
  return fit;
}

ObservationFeatures features_of(const std::vector<ContrastiveExample>& data, bool next) {
  ObservationFeatures f;
  const Observation& first = next ? data.front().next : data.front().x;
  if (first.is_discrete()) {
    ObsId m = 0;
    for (const auto& e : data) m = std::max(m, (next ? e.next : e.x).id());
    f.discrete_dim = static_cast<int>(m + 1);
  } else {
    f.vector_dim = static_cast<int>(first.vec().size());
  }
  return f;
}

GumbelBottleneckNet::Batch gather(const GumbelBottleneckNet::Batch& all, const std::vector<std::size_t>& idx,
                                  std::size_t lo, std::size_t hi) {
  GumbelBottleneckNet::Batch b;
  const Eigen::Index B = static_cast<Eigen::Index>(hi - lo);
  b.x.resize(all.x.rows(), B);
  b.next.resize(all.next.rows(), B);
  b.y.resize(B);
  b.weight.resize(B);
  b.a.resize(static_cast<std::size_t>(B));
  for (Eigen::Index k = 0; k < B; ++k) {
    const auto i = static_cast<Eigen::Index>(idx[lo + static_cast<std::size_t>(k)]);
    b.x.col(k) = all.x.col(i);
    b.next.col(k) = all.next.col(i);
    b.y[k] = all.y[i];
    b.weight[k] = all.weight[i];
    b.a[static_cast<std::size_t>(k)] = all.a[static_cast<std::size_t>(i)];
  }
  return b;
}

RegFit fit_gumbel_once(const std::vector<ContrastiveExample>& data, int N, int M, const GumbelNetConfig& cfg,
                       std::uint64_t restart) {
  Rng rng = make_rng(cfg.seed, {0x726567ULL, restart});
  auto net = make_gumbel_net(data, N, M, cfg, rng);
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(n)));
  if (n_val >= n) n_val = n - 1;
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<long>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<long>(n_val), order.end());
  if (val.empty()) val = train;

  std::vector<const ContrastiveExample*> ptrs;
  for (const auto& e : data) ptrs.push_back(&e);
  const auto all = net->make_batch(ptrs);
  const auto val_batch = gather(all, val, 0, val.size());

  TrainReport rep;
  rep.loss_name = to_string(cfg.loss);
  rep.n_train = train.size();
  rep.n_validation = n_val;
  double wsum = 0.0, ysum = 0.0;
  for (std::size_t i : train) {
    wsum += data[i].weight;
    ysum += data[i].weight * data[i].y;
  }
  rep.baseline_loss = weighted_loss(cfg.loss, wsum > 0 ? ysum / wsum : 0.5, data, val);

  Optimizer opt(cfg.optimizer, net->num_params());
  Eigen::VectorXd grad;
  const std::size_t B = static_cast<std::size_t>(std::max(1, cfg.batch));
  auto run_epoch = [&](GumbelBottleneckNet::Pass pass) {
    std::shuffle(train.begin(), train.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < train.size(); lo += B) {
      const std::size_t hi = std::min(train.size(), lo + B);
      const auto batch = gather(all, train, lo, hi);
      GumbelBottleneckNet::Noise noise;
      if (pass == GumbelBottleneckNet::Pass::Gumbel) noise = net->sample_noise(static_cast<int>(hi - lo), rng);
      total += net->loss_and_grad(batch, pass, &noise, &grad);
      opt.step(net->params(), grad);
      ++batches;
    }
    return batches ? total / static_cast<double>(batches) : 0.0;
  };

  for (int e = 0; e < cfg.pretrain_epochs; ++e) run_epoch(GumbelBottleneckNet::Pass::Linear);

  Eigen::VectorXd best_params = net->params();
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rep.train_loss.push_back(run_epoch(GumbelBottleneckNet::Pass::Gumbel));
    const double v = net->loss_and_grad(val_batch, GumbelBottleneckNet::Pass::Hard, nullptr, nullptr);
    rep.validation_loss.push_back(v);
    if (v < best - 1e-9) {
      best = v;
      best_epoch = epoch;
      best_params = net->params();
    } else if (epoch - best_epoch >= cfg.patience) {
      break;
    }
  }
  if (best_epoch >= 0) net->params() = best_params;
  rep.chosen_epoch = best_epoch;
  rep.best_validation_loss = best_epoch >= 0 ? best : 0.0;
  const double log_phi = (N + M) * std::log(static_cast<double>(std::max(2, net->shape().dx)));
  rep.delta_reg = delta_reg(static_cast<double>(n), log_phi, std::max(N, M), net->shape().actions, 0.05);
  return RegFit{net, rep};
}

RegFit fit_gumbel(const std::vector<ContrastiveExample>& data, int N, int M, const GumbelNetConfig& cfg) {
  if (cfg.restarts < 1) throw ConfigurationError("restarts must be >= 1");
  std::optional<RegFit> best;
  std::vector<double> losses;
  int chosen = 0;
  for (int r = 0; r < cfg.restarts; ++r) {
    RegFit fit = fit_gumbel_once(data, N, M, cfg, static_cast<std::uint64_t>(r));
    losses.push_back(fit.report.best_validation_loss);
    if (!best || fit.report.best_validation_loss < best->report.best_validation_loss) {
      best = std::move(fit);
      chosen = r;
    }
  }
  best->report.chosen_restart = chosen;
  best->report.restart_losses = std::move(losses);
  return std::move(*best);
}

}  // namespace

std::string to_string(RegLoss loss) { return loss == RegLoss::Square ? "square" : "cross_entropy"; }

std::string to_string(BottleneckMode mode) {
  switch (mode) {
    case BottleneckMode::Backward:
      return "backward";
    case BottleneckMode::Forward:
      return "forward";
    case BottleneckMode::Joint:
      return "joint";
  }
  return "?";
}

RegLoss parse_reg_loss(const std::string& s) {
  if (s == "square") return RegLoss::Square;
  if (s == "cross_entropy" || s == "ce") return RegLoss::CrossEntropy;
  throw ConfigurationError("unknown regression loss '" + s + "'");
}

BottleneckMode parse_bottleneck_mode(const std::string& s) {
  if (s == "backward") return BottleneckMode::Backward;
  if (s == "forward") return BottleneckMode::Forward;
  if (s == "joint") return BottleneckMode::Joint;
  throw ConfigurationError("unknown bottleneck mode '" + s + "'");
}

nlohmann::json TrainReport::to_json() const {
  return {{"loss", loss_name},
          {"train_loss", train_loss},
          {"validation_loss", validation_loss},
          {"chosen_epoch", chosen_epoch},
          {"chosen_restart", chosen_restart},
          {"restart_losses", restart_losses},
          {"n_train", n_train},
          {"n_validation", n_validation},
          {"best_validation_loss", best_validation_loss},
          {"baseline_loss", baseline_loss},
          {"delta_reg", delta_reg}};
}

PhiClass all_maps(const std::vector<ObsId>& ids, int capacity, double budget) {
  const double count = std::pow(static_cast<double>(capacity), static_cast<double>(ids.size()));
  if (count > budget) throw EnumerationBudgetExceeded("abstraction class enumeration", count, budget);
  ObsId max_id = 0;
  for (ObsId id : ids) max_id = std::max(max_id, id);
  PhiClass cls;
  cls.capacity = capacity;
  std::vector<int> digits(ids.size(), 0);
  for (;;) {
    std::vector<int> map(static_cast<std::size_t>(max_id + 1), 0);
    for (std::size_t k = 0; k < ids.size(); ++k) map[static_cast<std::size_t>(ids[k])] = digits[k];
    cls.maps.push_back(std::move(map));
    std::size_t k = 0;
    for (; k < digits.size(); ++k) {
      if (++digits[k] < capacity) break;
      digits[k] = 0;
    }
    if (k == digits.size()) break;
  }
  return cls;
}

std::shared_ptr<const BottleneckRegressor> regressor_from_json(const nlohmann::json& j) {
  const std::string backend = j.at("backend").get<std::string>();
  if (backend == "exact_erm")
    return std::make_shared<ExactBottleneck>(j.at("phi_forward").get<std::vector<int>>(),
                                             j.at("phi_backward").get<std::vector<int>>(), j.at("M").get<int>(),
                                             j.at("actions").get<int>(), j.at("N").get<int>(),
                                             j.at("w").get<std::vector<double>>());
  if (backend != "sgd_gumbel") throw ConfigurationError("unknown regressor backend '" + backend + "'");
  const auto& sj = j.at("shape");
  GumbelBottleneckNet::Shape shape;
  shape.dx = sj.at("dx").get<int>();
  shape.dnext = sj.at("dnext").get<int>();
  shape.actions = sj.at("actions").get<int>();
  shape.M = sj.at("M").get<int>();
  shape.N = sj.at("N").get<int>();
  shape.hidden = sj.at("hidden").get<int>();
  auto features = [](const nlohmann::json& f) {
    return ObservationFeatures{f.at("discrete_dim").get<int>(), f.at("vector_dim").get<int>()};
  };
  auto net = std::make_shared<GumbelBottleneckNet>(shape, features(j.at("features_x")), features(j.at("features_next")),
                                                   j.at("temperature").get<double>(), j.at("leaky_slope").get<double>(),
                                                   parse_reg_loss(j.at("loss").get<std::string>()));
  const auto p = j.at("params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(p.size()) != net->num_params())
    throw ConfigurationError("stored parameter vector does not match the network shape");
  net->params() = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  return net;
}

double delta_reg(double n, double log_phi_size, int N, int num_actions, double delta) {
  return 16.0 * (log_phi_size + static_cast<double>(N) * N * num_actions * std::log(n) + std::log(2.0 / delta)) / n;
}

std::shared_ptr<GumbelBottleneckNet> make_gumbel_net(const std::vector<ContrastiveExample>& data, int N, int M,
                                                     const GumbelNetConfig& cfg, Rng& rng) {
  if (data.empty()) throw ConfigurationError("regression dataset is empty");
  if (N < 1 || M < 1) throw ConfigurationError("bottleneck capacities must be >= 1");
  GumbelBottleneckNet::Shape shape;
  const auto fx = features_of(data, false);
  const auto fn = features_of(data, true);
  shape.dx = fx.dim();
  shape.dnext = fn.dim();
  shape.actions = infer_actions(data);
  shape.hidden = cfg.hidden;
  shape.M = cfg.mode == BottleneckMode::Backward ? 0 : M;
  shape.N = cfg.mode == BottleneckMode::Forward ? 0 : N;
  auto net = std::make_shared<GumbelBottleneckNet>(shape, fx, fn, cfg.temperature, cfg.leaky_slope, cfg.loss);
  net->init_random(rng);
  return net;
}

RegFit reg_fit(const std::vector<ContrastiveExample>& data, int N, int M, const RegConfig& config) {
  if (data.empty()) throw ConfigurationError("regression dataset is empty");
  if (N < 1 || M < 1) throw ConfigurationError("bottleneck capacities must be >= 1");
  if (const auto* e = std::get_if<ExactRegConfig>(&config)) return fit_exact(data, N, M, *e);
  return fit_gumbel(data, N, M, std::get<GumbelNetConfig>(config));
}

}  // namespace kinlab
