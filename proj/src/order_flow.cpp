#include "lobforge/order_flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "lobforge/errors.hpp"

namespace lobforge {

FlowContext FlowContext::of(const BookState& state) {
  FlowContext ctx;
  ctx.buy = &state.buy;
  ctx.sell = &state.sell;
  ctx.lowest = 1;
  ctx.highest = state.d();
  ctx.ask = inf_support(state.sell);
  ctx.bid = sup_support(state.buy);
  ctx.total_buy = std::accumulate(state.buy.begin(), state.buy.end(), Depth{0});
  ctx.total_sell = std::accumulate(state.sell.begin(), state.sell.end(), Depth{0});
  ctx.frame = Frame::Absolute;
  return ctx;
}

FlowContext FlowContext::of(const CentredState& state) {
  FlowContext ctx;
  ctx.buy = &state.buy;
  ctx.sell = &state.sell;
  ctx.lowest = -state.d_prime;
  ctx.highest = state.d_prime;
  ctx.ask = centred_ask(state);
  ctx.bid = centred_bid(state);
  ctx.total_buy = std::accumulate(state.buy.begin(), state.buy.end(), Depth{0});
  ctx.total_sell = std::accumulate(state.sell.begin(), state.sell.end(), Depth{0});
  ctx.frame = Frame::Centred;
  return ctx;
}

double total_rate(const IntensityModel& model, const FlowContext& ctx) {
  double sum = 0.0;
  model.for_each_rate(ctx, [&](const Event&, double r) { sum += r; });
  return sum;
}

double total_rate(const IntensityModel& model, const BookState& state) {
  return total_rate(model, FlowContext::of(state));
}

double total_rate(const IntensityModel& model, const CentredState& state) {
  return total_rate(model, FlowContext::of(state));
}

SampledEvent sample_next_event(const IntensityModel& model, const FlowContext& ctx, RngStream& rng) {
  const double total = total_rate(model, ctx);
  if (!(total > 0.0)) throw Error(ErrorCode::DeadState, "no event has positive rate in this state");
  SampledEvent out;
  out.wait = rng.exponential(total);
  const double target = rng.uniform() * total;
  double acc = 0.0;
  bool chosen = false;
  model.for_each_rate(ctx, [&](const Event& e, double r) {
    if (chosen) return;
    acc += r;
    out.event = e;
    if (target < acc) chosen = true;
  });
  return out;
}

SampledEvent sample_next_event(const IntensityModel& model, const BookState& state, RngStream& rng) {
  return sample_next_event(model, FlowContext::of(state), rng);
}

namespace {

template <class State>
ValidationReport validate_states(const IntensityModel& model, std::span<const State> states) {
  ValidationReport report;
  const ModelInfo& info = model.info();
  for (std::size_t s = 0; s < states.size(); ++s) {
    const FlowContext ctx = FlowContext::of(states[s]);
    ++report.states_checked;
    for (EventKind kind : kAllEventKinds)
      for (int price = ctx.lowest; price <= ctx.highest; ++price)
        for (Depth z = 1; z <= info.max_size + 2; ++z) {
          const double r = model.rate(ctx, kind, price, z);
          if (r < 0.0 || !std::isfinite(r)) {
            report.violations.push_back({2, s, {kind, price, z}, r, 0.0});
            continue;
          }
          if (r == 0.0) continue;
          if (z >= std::min(ctx.total_buy, ctx.total_sell))
            report.violations.push_back({1, s, {kind, price, z}, r, 0.0});
          const double bound = info.bound_M / std::pow(1.0 + static_cast<double>(z), info.bound_alpha);
          if (r > bound * (1.0 + 1e-12)) report.violations.push_back({2, s, {kind, price, z}, r, bound});
          const Depth depth = kind == EventKind::CancelBuy    ? ctx.buy_at(price)
                              : kind == EventKind::CancelSell ? ctx.sell_at(price)
                                                              : z;
          if (z > depth) report.violations.push_back({3, s, {kind, price, z}, r, 0.0});
        }
  }
  return report;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::BadParameter, what);
}

const char* frame_name(Frame f) { return f == Frame::Absolute ? "absolute" : "centred"; }

// ---------------------------------------------------------------- Model 1

class Model1 final : public IntensityModel {
 public:
  Model1(const Model1Params& p, ModelInfo info) : IntensityModel(std::move(info)), p_(p) {}

  double raw_rate(const FlowContext& ctx, EventKind kind, int k, Depth z) const override {
    if (z != 1) return 0.0;
    switch (kind) {
      case EventKind::LimitBuy:
        if (k < ctx.ask) return p_.beta / std::pow(static_cast<double>(ctx.ask - k), p_.alpha);
        return k == ctx.ask ? p_.mu : 0.0;
      case EventKind::LimitSell:
        if (k > ctx.bid) return p_.beta / std::pow(static_cast<double>(k - ctx.bid), p_.alpha);
        return k == ctx.bid ? p_.mu : 0.0;
      case EventKind::CancelBuy:
        return k < ctx.bid ? theta(ctx.bid - k) * static_cast<double>(ctx.buy_at(k)) : 0.0;
      case EventKind::CancelSell:
        return k > ctx.ask ? theta(k - ctx.ask) * static_cast<double>(ctx.sell_at(k)) : 0.0;
    }
    return 0.0;
  }

  nlohmann::json to_json() const override {
    return {{"kind", "model1"}, {"beta", p_.beta},   {"alpha", p_.alpha},
            {"mu", p_.mu},      {"theta", p_.theta}, {"depth_cap", p_.depth_cap}};
  }

 private:
  double theta(int distance) const {
    return distance >= 1 && static_cast<std::size_t>(distance) <= p_.theta.size() ? p_.theta[distance - 1] : 0.0;
  }
  Model1Params p_;
};

// ---------------------------------------------------------------- Model 2

class Model2 final : public IntensityModel {
 public:
  Model2(const Model2Params& p, ModelInfo info) : IntensityModel(std::move(info)), p_(p) {}

  double raw_rate(const FlowContext&, EventKind kind, int k, Depth z) const override {
    const auto& t = p_.table[static_cast<std::size_t>(kind)];
    if (z < 1 || z > p_.max_size) return 0.0;
    const auto& row = t[static_cast<std::size_t>(z - 1)];
    return k >= 1 && static_cast<std::size_t>(k) <= row.size() ? row[static_cast<std::size_t>(k - 1)] : 0.0;
  }

  nlohmann::json to_json() const override {
    return {{"kind", "model2"},
            {"max_size", p_.max_size},
            {"limit_buy", p_.table[0]},
            {"limit_sell", p_.table[1]},
            {"cancel_buy", p_.table[2]},
            {"cancel_sell", p_.table[3]}};
  }

 private:
  Model2Params p_;
};

// ---------------------------------------------------------------- Model 3

class Model3 final : public IntensityModel {
 public:
  Model3(const Model3Params& p, ModelInfo info) : IntensityModel(std::move(info)), p_(p) {}

  double raw_rate(const FlowContext& ctx, EventKind kind, int i, Depth z) const override {
    if (z != 1) return 0.0;
    const int a = ctx.ask, b = ctx.bid;
    switch (kind) {
      case EventKind::LimitBuy: {
        double r = (i >= a - p_.K && i < a) ? at(p_.limit_buy, a - i) : 0.0;
        if (i == p_.d_prime) r += p_.market_buy;
        return r;
      }
      case EventKind::LimitSell: {
        double r = (i > b && i <= b + p_.K) ? at(p_.limit_sell, i - b) : 0.0;
        if (i == -p_.d_prime) r += p_.market_sell;
        return r;
      }
      case EventKind::CancelBuy:
        return (i >= a - p_.K && i < a) ? at(p_.cancel_buy, a - i) * static_cast<double>(ctx.buy_at(i)) : 0.0;
      case EventKind::CancelSell:
        return (i > b && i <= b + p_.K) ? at(p_.cancel_sell, i - b) * static_cast<double>(ctx.sell_at(i)) : 0.0;
    }
    return 0.0;
  }

  CentredState after_clearing(CentredState x) const override { return model3_pad(x, p_.K, p_.a_inf, p_.b_inf); }

  nlohmann::json to_json() const override {
    return {{"kind", "model3"},          {"d_prime", p_.d_prime},         {"K", p_.K},
            {"limit_buy", p_.limit_buy}, {"limit_sell", p_.limit_sell},   {"cancel_buy", p_.cancel_buy},
            {"cancel_sell", p_.cancel_sell}, {"market_buy", p_.market_buy}, {"market_sell", p_.market_sell},
            {"a_inf", p_.a_inf},         {"b_inf", p_.b_inf},             {"depth_cap", p_.depth_cap}};
  }

 private:
  static double at(const std::vector<double>& v, int j) {
    return j >= 1 && static_cast<std::size_t>(j) <= v.size() ? v[static_cast<std::size_t>(j - 1)] : 0.0;
  }
  Model3Params p_;
};

// ---------------------------------------------------------------- Model A

class ModelA final : public IntensityModel {
 public:
  ModelA(const ModelAParams& p, ModelInfo info) : IntensityModel(std::move(info)), p_(p) {}

  double raw_rate(const FlowContext& ctx, EventKind kind, int k, Depth z) const override {
    if (z != 1) return 0.0;
    switch (kind) {
      case EventKind::LimitBuy:
        return ctx.buy_at(k) < p_.n ? p_.limit_buy : 0.0;
      case EventKind::LimitSell:
        return ctx.sell_at(k) < p_.n ? p_.limit_sell : 0.0;
      case EventKind::CancelBuy:
        return ctx.buy_at(k) >= p_.n ? p_.cancel_buy : 0.0;
      case EventKind::CancelSell:
        return ctx.sell_at(k) >= p_.n ? p_.cancel_sell : 0.0;
    }
    return 0.0;
  }

  nlohmann::json to_json() const override {
    return {{"kind", "modelA"},           {"n", p_.n},
            {"limit_buy", p_.limit_buy},   {"limit_sell", p_.limit_sell},
            {"cancel_buy", p_.cancel_buy}, {"cancel_sell", p_.cancel_sell}};
  }

 private:
  ModelAParams p_;
};

// ---------------------------------------------------------------- Model B

class ModelB final : public IntensityModel {
 public:
  ModelB(const ModelBParams& p, ModelInfo info) : IntensityModel(std::move(info)), p_(p) {}

  double raw_rate(const FlowContext& ctx, EventKind kind, int k, Depth z) const override {
    if (z < 1 || z > 6) return 0.0;
    switch (kind) {
      case EventKind::LimitBuy:
        return ctx.buy_at(k) < p_.n - z ? cell(p_.beta, z, ctx.ask - k) : 0.0;
      case EventKind::LimitSell:
        return ctx.sell_at(k) < p_.n - z ? cell(p_.alpha, z, k - ctx.bid) : 0.0;
      case EventKind::CancelBuy:
        return ctx.buy_at(k) > 0 ? cell(p_.gamma, z, ctx.bid - k) : 0.0;
      case EventKind::CancelSell:
        return ctx.sell_at(k) > 0 ? cell(p_.mu, z, k - ctx.ask) : 0.0;
    }
    return 0.0;
  }

  nlohmann::json to_json() const override {
    return {{"kind", "modelB"},   {"n", p_.n},          {"alpha", p_.alpha},
            {"mu", p_.mu},        {"beta", p_.beta},    {"gamma", p_.gamma},
            {"relative_origin", p_.relative_origin}};
  }

 private:
  double cell(const Matrix6& m, Depth z, int r) const {
    const int j = r - p_.relative_origin;
    if (j < 0 || j > 5) return 0.0;
    return m[static_cast<std::size_t>(z - 1)][static_cast<std::size_t>(j)];
  }
  ModelBParams p_;
};

// ---------------------------------------------------------------- custom

class FunctionModel final : public IntensityModel {
 public:
  FunctionModel(ModelInfo info, RateFunction fn) : IntensityModel(std::move(info)), fn_(std::move(fn)) {}
  double raw_rate(const FlowContext& ctx, EventKind kind, int k, Depth z) const override { return fn_(ctx, kind, k, z); }
  nlohmann::json to_json() const override {
    throw Error(ErrorCode::BadParameter, "function-defined models have no file form");
  }

 private:
  RateFunction fn_;
};

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

void require_non_negative(const std::vector<double>& v, const std::string& name) {
  for (double x : v) require(x >= 0.0 && std::isfinite(x), name + " entries must be finite and non-negative");
}

}  // namespace

ValidationReport validate(const IntensityModel& model, std::span<const BookState> states) {
  if (model.frame() != Frame::Absolute) throw Error(ErrorCode::PreconditionViolated, "model frame is centred");
  return validate_states(model, states);
}

ValidationReport validate(const IntensityModel& model, std::span<const CentredState> states) {
  if (model.frame() != Frame::Centred) throw Error(ErrorCode::PreconditionViolated, "model frame is absolute");
  return validate_states(model, states);
}

ModelPtr build_model1(const Model1Params& p) {
  require(p.beta > 0.0 && p.mu > 0.0, "model1 needs beta > 0 and mu > 0");
  require(std::isfinite(p.alpha), "model1 alpha must be finite");
  require(p.depth_cap >= 1, "model1 depth_cap must be positive");
  require_non_negative(p.theta, "model1 theta");
  // Sizes are 1, so the bound is 4 * max rate; beta / j^alpha peaks at j = 1
  // for alpha >= 0 and we bound it by the largest distance otherwise.
  const double arrival = p.alpha >= 0.0 ? p.beta : p.beta * std::pow(1000.0, -p.alpha);
  const double peak = std::max({arrival, p.mu, max_of(p.theta) * static_cast<double>(p.depth_cap)});
  return std::make_shared<Model1>(p, ModelInfo{"model1", Frame::Absolute, 1, 4.0 * peak, 2.0, true});
}

ModelPtr build_model2(const Model2Params& p) {
  require(p.max_size >= 1, "model2 max_size must be positive");
  double M = 0.0;
  for (const auto& t : p.table) {
    require(t.size() == static_cast<std::size_t>(p.max_size), "model2 tables need one row per size");
    for (std::size_t z = 0; z < t.size(); ++z) {
      require_non_negative(t[z], "model2 table");
      M = std::max(M, max_of(t[z]) * std::pow(2.0 + static_cast<double>(z), 2.0));
    }
  }
  return std::make_shared<Model2>(p, ModelInfo{"model2", Frame::Absolute, p.max_size, M, 2.0, true});
}

ModelPtr build_model3(const Model3Params& p) {
  require(p.d_prime >= 1, "model3 needs d' >= 1");
  require(p.K >= 0 && p.K <= 2 * p.d_prime, "model3 K must lie in 0..2d'");
  for (const auto* v : {&p.limit_buy, &p.limit_sell, &p.cancel_buy, &p.cancel_sell}) {
    require(v->size() == static_cast<std::size_t>(p.K), "model3 rate vectors need K entries");
    require_non_negative(*v, "model3 rates");
  }
  require(p.market_buy >= 0.0 && p.market_sell >= 0.0, "model3 market rates must be non-negative");
  require(p.a_inf >= 0 && p.b_inf >= 0 && p.depth_cap >= 1, "model3 depths must be non-negative");
  const double peak = std::max({max_of(p.limit_buy) + p.market_buy, max_of(p.limit_sell) + p.market_sell,
                                max_of(p.cancel_buy) * static_cast<double>(p.depth_cap),
                                max_of(p.cancel_sell) * static_cast<double>(p.depth_cap)});
  return std::make_shared<Model3>(p, ModelInfo{"model3", Frame::Centred, 1, 4.0 * peak, 2.0, true});
}

ModelPtr build_modelA(const ModelAParams& p) {
  require(p.n >= 1, "modelA needs n >= 1");
  for (double r : {p.limit_buy, p.limit_sell, p.cancel_buy, p.cancel_sell})
    require(r >= 0.0 && std::isfinite(r), "modelA rates must be finite and non-negative");
  const double peak = std::max({p.limit_buy, p.limit_sell, p.cancel_buy, p.cancel_sell});
  return std::make_shared<ModelA>(p, ModelInfo{"modelA", Frame::Absolute, 1, 4.0 * peak, 2.0, true});
}

ModelBParams default_modelB_params(Depth n) {
  ModelBParams p;
  p.n = n;
  p.alpha = {{{0.74, 4.23, 1.96, 0.53, 0.35, 0.28},
              {0.19, 2.68, 0.67, 0.05, 0.03, 0.05},
              {0.10, 1.79, 0.28, 0.02, 0.01, 0.01},
              {0.04, 0.49, 0.10, 0.01, 0.01, 0.02},
              {0.03, 0.31, 0.04, 0.01, 0.01, 0.05},
              {0.08, 1.55, 0.37, 0.06, 0.09, 0.15}}};
  p.mu = {{{4.08, 1.76, 0.44, 0.32, 0.27, 0.28},
           {2.78, 0.44, 0.04, 0.04, 0.04, 0.04},
           {1.76, 0.18, 0.02, 0.01, 0.01, 0.04},
           {0.48, 0.09, 0.01, 0.01, 0.02, 0.15},
           {0.29, 0.03, 0.01, 0.01, 0.05, 0.003},
           {1.60, 0.26, 0.03, 0.11, 0.15, 0.28}}};
  p.beta = {{{0.46, 3.95, 1.75, 0.35, 0.30, 0.39},
             {0.12, 2.65, 0.65, 0.07, 0.04, 0.05},
             {0.08, 1.48, 0.24, 0.02, 0.01, 0.01},
             {0.02, 0.49, 0.09, 0.01, 0.01, 0.01},
             {0.018, 0.30, 0.04, 0.01, 0.02, 0.04},
             {0.05, 1.26, 0.37, 0.09, 0.11, 0.15}}};
  p.gamma = {{{3.72, 1.49, 0.41, 0.28, 0.34, 0.42},
              {2.73, 0.44, 0.06, 0.05, 0.05, 0.05},
              {1.41, 0.17, 0.02, 0.01, 0.01, 0.02},
              {0.47, 0.08, 0.01, 0.01, 0.02, 0.16},
              {0.27, 0.03, 0.01, 0.01, 0.04, 0.002},
              {1.29, 0.28, 0.05, 0.12, 0.15, 0.28}}};
  return p;
}

ModelPtr build_modelB(const ModelBParams& p) {
  require(p.n >= 1, "modelB needs n >= 1");
  double M = 0.0;
  for (const Matrix6* m : {&p.alpha, &p.mu, &p.beta, &p.gamma})
    for (std::size_t z = 0; z < 6; ++z)
      for (double x : (*m)[z]) {
        require(x >= 0.0 && std::isfinite(x), "modelB matrix entries must be finite and non-negative");
        M = std::max(M, x * std::pow(2.0 + static_cast<double>(z), 2.0));
      }
  return std::make_shared<ModelB>(p, ModelInfo{"modelB", Frame::Absolute, 6, M, 2.0, true});
}

ModelPtr make_function_model(ModelInfo info, RateFunction fn) {
  require(info.max_size >= 1, "max_size must be positive");
  return std::make_shared<FunctionModel>(std::move(info), std::move(fn));
}

nlohmann::json model_to_json(const IntensityModel& model) {
  nlohmann::json j = model.to_json();
  j["frame"] = frame_name(model.frame());
  return j;
}

namespace {

template <class T>
T field(const nlohmann::json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

ModelPtr model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw ParseError(0, 0, "model needs a string 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "modelA") {
      ModelAParams p;
      p.n = field(j, "n", p.n);
      p.limit_buy = field(j, "limit_buy", p.limit_buy);
      p.limit_sell = field(j, "limit_sell", p.limit_sell);
      p.cancel_buy = field(j, "cancel_buy", p.cancel_buy);
      p.cancel_sell = field(j, "cancel_sell", p.cancel_sell);
      return build_modelA(p);
    }
    if (kind == "modelB") {
      ModelBParams p = default_modelB_params(field<Depth>(j, "n", 300));
      p.alpha = field(j, "alpha", p.alpha);
      p.mu = field(j, "mu", p.mu);
      p.beta = field(j, "beta", p.beta);
      p.gamma = field(j, "gamma", p.gamma);
      p.relative_origin = field(j, "relative_origin", p.relative_origin);
      return build_modelB(p);
    }
    if (kind == "model1") {
      Model1Params p;
      p.beta = j.at("beta").get<double>();
      p.alpha = j.at("alpha").get<double>();
      p.mu = j.at("mu").get<double>();
      p.theta = field(j, "theta", p.theta);
      p.depth_cap = field(j, "depth_cap", p.depth_cap);
      return build_model1(p);
    }
    if (kind == "model2") {
      Model2Params p;
      p.max_size = j.at("max_size").get<Depth>();
      const char* keys[] = {"limit_buy", "limit_sell", "cancel_buy", "cancel_sell"};
      for (std::size_t t = 0; t < 4; ++t) p.table[t] = j.at(keys[t]).get<std::vector<std::vector<double>>>();
      return build_model2(p);
    }
    if (kind == "model3") {
      Model3Params p;
      p.d_prime = j.at("d_prime").get<int>();
      p.K = j.at("K").get<int>();
      p.limit_buy = j.at("limit_buy").get<std::vector<double>>();
      p.limit_sell = j.at("limit_sell").get<std::vector<double>>();
      p.cancel_buy = j.at("cancel_buy").get<std::vector<double>>();
      p.cancel_sell = j.at("cancel_sell").get<std::vector<double>>();
      p.market_buy = field(j, "market_buy", p.market_buy);
      p.market_sell = field(j, "market_sell", p.market_sell);
      p.a_inf = field(j, "a_inf", p.a_inf);
      p.b_inf = field(j, "b_inf", p.b_inf);
      p.depth_cap = field(j, "depth_cap", p.depth_cap);
      return build_model3(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, 0, "model '" + kind + "': " + e.what());
  }
  throw ParseError(0, 0, "unknown model kind '" + kind + "'");
}

ModelPtr load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadParameter, "cannot open model file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, e.byte, e.what());
  }
  return model_from_json(j);
}

}  // namespace lobforge
