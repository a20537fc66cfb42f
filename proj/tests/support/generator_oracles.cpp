#include "support/generator_oracles.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "support/oracles.hpp"

namespace oracle {

using namespace lobforge;

double model1_generator(const Model1Params& p, const StateFunction<BookState>& f, const BookState& x) {
  const Quote q = quote(x);
  const int a = q.ask, b = q.bid, d = x.d();
  const double fx = f(x);
  auto theta = [&](int j) { return j >= 1 && j <= static_cast<int>(p.theta.size()) ? p.theta[j - 1] : 0.0; };
  auto with = [&](int buy_level, Depth buy_delta, int sell_level, Depth sell_delta) {
    BookState y = x;
    if (buy_level) y.buy[buy_level - 1] += buy_delta;
    if (sell_level) y.sell[sell_level - 1] += sell_delta;
    return f(y);
  };
  double s = 0.0;
  for (int i = 1; i <= a - 1; ++i) s += p.beta / std::pow(a - i, p.alpha) * (with(i, 1, 0, 0) - fx);
  s += p.mu * (with(0, 0, a, -1) - fx);
  for (int i = b + 1; i <= d; ++i) s += p.beta / std::pow(i - b, p.alpha) * (with(0, 0, i, 1) - fx);
  s += p.mu * (with(b, -1, 0, 0) - fx);
  for (int i = 1; i <= b - 1; ++i) s += theta(b - i) * static_cast<double>(x.buy[i - 1]) * (with(i, -1, 0, 0) - fx);
  for (int i = a + 1; i <= d; ++i) s += theta(i - a) * static_cast<double>(x.sell[i - 1]) * (with(0, 0, i, -1) - fx);
  return s;
}

ModelPtr random_model2(std::mt19937_64& rng, int d, Depth m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Model2Params p;
  p.max_size = m;
  for (auto& t : p.table) {
    t.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(d)));
    for (auto& row : t)
      for (double& v : row) v = u(rng) < 0.2 ? 0.0 : u(rng) * 3.0;
  }
  return build_model2(p);
}

StateFunction<BookState> random_function_around(std::mt19937_64& rng, const IntensityModel& model, const BookState& x) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StateFunction<BookState> f;
  f.default_value = u(rng);
  f.set(x, u(rng));
  model.for_each_rate(FlowContext::of(x), [&](const Event& e, double) {
    BookState y = perturb(x, e);
    f.set(greedy_clear(y), u(rng));
  });
  return f;
}

StateMeasure<CentredState> centred_adjoint_by_preimage(const IntensityModel& model, const StateMeasure<CentredState>& mu,
                                                       const std::vector<CentredState>& targets, Depth cap) {
  StateMeasure<CentredState> out;
  for (const CentredState& y : targets) {
    double inflow = 0.0;
    PreimageOptions opt;
    opt.max_size = cap;
    for_each_centred_preimage(y, opt, [&](const CentredState& z) {
      for (EventKind kind : kAllEventKinds)
        for (int i = -z.d_prime; i <= z.d_prime; ++i)
          for (Depth s = 1; s <= model.max_size(); ++s) {
            CentredState w = z;
            const bool arrival = kind == EventKind::LimitBuy || kind == EventKind::LimitSell;
            Depth& slot = kind == EventKind::LimitBuy || kind == EventKind::CancelBuy ? w.buy_at(i) : w.sell_at(i);
            slot += arrival ? -s : s;
            if (slot < 0) continue;
            const double m = mu(w);
            if (m == 0.0) continue;
            inflow += m * model.rate(FlowContext::of(w), kind, i, s);
          }
      return true;
    });
    const double outflow = mu(y) * total_rate(model, y);
    if (inflow != 0.0 || outflow != 0.0) out.add(y, inflow - outflow);
  }
  return out;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) { return a.exp(); }

double splitting_error(const FlowTruncation& flow, double T, double dt) {
  const auto nE = static_cast<Eigen::Index>(flow.size());
  const auto nL = static_cast<Eigen::Index>(flow.admissible.size());
  Eigen::MatrixXd Lo(nE, nE);
  for (Eigen::Index i = 0; i < nE; ++i)
    for (Eigen::Index j = 0; j < nE; ++j) Lo(i, j) = flow.Q_o[static_cast<std::size_t>(i * nE + j)];
  std::vector<Eigen::Index> to_L(flow.size(), -1);
  for (std::size_t k = 0; k < flow.admissible.size(); ++k) to_L[flow.admissible[k]] = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nE, nL);  // f on L -> f o clear on E
  for (Eigen::Index i = 0; i < nE; ++i) C(i, to_L[flow.clear_index[static_cast<std::size_t>(i)]]) = 1.0;
  Eigen::MatrixXd Xi = Eigen::MatrixXd::Zero(nL, nE);  // restriction to L
  for (Eigen::Index k = 0; k < nL; ++k) Xi(k, static_cast<Eigen::Index>(flow.admissible[static_cast<std::size_t>(k)])) = 1.0;
  const Eigen::MatrixXd L = Xi * Lo * C;
  const Eigen::MatrixXd exact_step = expm(-dt * L);
  const Eigen::MatrixXd split_step = Xi * expm(-dt * Lo) * C;
  const int N = static_cast<int>(std::lround(T / dt));
  Eigen::MatrixXd exact = Eigen::MatrixXd::Identity(nL, nL), split = exact;
  for (int n = 0; n < N; ++n) {
    exact = exact_step * exact;
    split = split_step * split;
  }
  return (exact - split).cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace oracle
