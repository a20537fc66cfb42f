#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobforge/book.hpp"
#include "lobforge/centred.hpp"
#include "lobforge/rng.hpp"

namespace lobforge {

enum class Frame { Absolute, Centred };

/// Per-state quantities every rate function needs, computed once per state.
/// Prices are in the frame's own coordinates: 1..d absolute, -d'..d' centred.
struct FlowContext {
  const Side* buy = nullptr;
  const Side* sell = nullptr;
  int lowest = 1;    // price of array element 0
  int highest = 1;   // price of the last element
  int ask = 0;       // sell-side inf supp; highest + 1 (absolute) or d' (centred) when empty
  int bid = 0;       // buy-side sup supp; 0 (absolute) or -d' (centred) when empty
  Depth total_buy = 0;
  Depth total_sell = 0;
  Frame frame = Frame::Absolute;

  static FlowContext of(const BookState& state);
  static FlowContext of(const CentredState& state);

  Depth buy_at(int price) const { return (*buy)[static_cast<std::size_t>(price - lowest)]; }
  Depth sell_at(int price) const { return (*sell)[static_cast<std::size_t>(price - lowest)]; }
};

struct ModelInfo {
  std::string kind;
  Frame frame = Frame::Absolute;
  Depth max_size = 1;       // m: sizes 1..m may have nonzero rate
  double bound_M = 0.0;     // rates stay below bound_M / (1 + z)^bound_alpha
  double bound_alpha = 2.0;
  bool enforce_assumptions = true;
};

class IntensityModel {
 public:
  explicit IntensityModel(ModelInfo info) : info_(std::move(info)) {}
  virtual ~IntensityModel() = default;

  const ModelInfo& info() const { return info_; }
  Frame frame() const { return info_.frame; }
  Depth max_size() const { return info_.max_size; }

  /// Rate given by the model's own formula, before the legality gate.
  virtual double raw_rate(const FlowContext& ctx, EventKind kind, int price, Depth z) const = 0;

  /// Rate with the legality gate: zero when z >= min(total buy, total sell)
  /// and for cancellations larger than the queue. Unenforced models skip it.
  double rate(const FlowContext& ctx, EventKind kind, int price, Depth z) const {
    if (info_.enforce_assumptions) {
      if (z >= std::min(ctx.total_buy, ctx.total_sell)) return 0.0;
      if (kind == EventKind::CancelBuy && z > ctx.buy_at(price)) return 0.0;
      if (kind == EventKind::CancelSell && z > ctx.sell_at(price)) return 0.0;
    }
    return raw_rate(ctx, kind, price, z);
  }

  /// Calls visit(event, rate) for every event with positive rate, in the fixed
  /// order kind (LimitBuy, LimitSell, CancelBuy, CancelSell), price ascending,
  /// size ascending.
  template <class Visit>
  void for_each_rate(const FlowContext& ctx, Visit&& visit) const {
    for (EventKind kind : kAllEventKinds)
      for (int price = ctx.lowest; price <= ctx.highest; ++price)
        for (Depth z = 1; z <= info_.max_size; ++z) {
          const double r = rate(ctx, kind, price, z);
          if (r > 0.0) visit(Event{kind, price, z}, r);
        }
  }

  /// Map applied after clearing in the centred frame; identity unless the
  /// model pads the window boundary.
  virtual CentredState after_clearing(CentredState x) const { return x; }

  virtual nlohmann::json to_json() const = 0;

 private:
  ModelInfo info_;
};

using ModelPtr = std::shared_ptr<const IntensityModel>;

double total_rate(const IntensityModel& model, const FlowContext& ctx);
double total_rate(const IntensityModel& model, const BookState& state);
double total_rate(const IntensityModel& model, const CentredState& state);

struct SampledEvent {
  double wait = 0.0;
  Event event{};
};

/// Draws the wait first, then the event by a cumulative scan in for_each_rate
/// order. Throws DeadState when no event has positive rate.
SampledEvent sample_next_event(const IntensityModel& model, const FlowContext& ctx, RngStream& rng);
SampledEvent sample_next_event(const IntensityModel& model, const BookState& state, RngStream& rng);

struct Violation {
  int clause = 0;  // 1: size not below total depth, 2: rate bound, 3: cancellation beyond the queue
  std::size_t state_index = 0;
  Event event{};
  double rate = 0.0;
  double bound = 0.0;
};

struct ValidationReport {
  std::size_t states_checked = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks the three legality clauses for every state and every size up to m + 2.
ValidationReport validate(const IntensityModel& model, std::span<const BookState> states);
ValidationReport validate(const IntensityModel& model, std::span<const CentredState> states);

/// Model 1: stationary arrivals beta / distance^alpha, market orders at rate mu
/// sent as limit orders at the opposite best price, cancellations at
/// theta(distance) per unit of depth. Sizes are 1.
struct Model1Params {
  double beta = 1.0;
  double alpha = 1.0;
  double mu = 1.0;
  std::vector<double> theta;  // theta[j - 1] for distance j from the own best quote; zero beyond
  Depth depth_cap = 1000;     // queue depth used to derive the rate bound
};
ModelPtr build_model1(const Model1Params& params);

/// Model 2: state-independent tables per (kind, size, absolute price).
struct Model2Params {
  Depth max_size = 1;
  // table[kind][z - 1][k - 1]; kind in kAllEventKinds order
  std::array<std::vector<std::vector<double>>, 4> table;
};
ModelPtr build_model2(const Model2Params& params);

/// Model 3 in the centred frame. Vectors are indexed by distance 1..K from
/// the opposite best quote; boundary padding is applied after each clearing.
struct Model3Params {
  int d_prime = 1;
  int K = 1;
  std::vector<double> limit_buy, limit_sell, cancel_buy, cancel_sell;
  double market_buy = 0.0;
  double market_sell = 0.0;
  Depth a_inf = 1;
  Depth b_inf = 1;
  Depth depth_cap = 1000;
};
ModelPtr build_model3(const Model3Params& params);

/// Model A: constant rates with a queue cap n.
struct ModelAParams {
  Depth n = 300;
  double limit_buy = 11.6;
  double limit_sell = 10.7;
  double cancel_buy = 10.8;
  double cancel_sell = 9.7;
};
ModelPtr build_modelA(const ModelAParams& params);

using Matrix6 = std::array<std::array<double, 6>, 6>;

/// Model B: rates by size (row) and relative price (column). Relative price r
/// is a - k for buy arrivals, k - b for sell arrivals, b - k for buy
/// cancellations and k - a for sell cancellations; column j (1-based) holds
/// r = relative_origin + j - 1.
struct ModelBParams {
  Depth n = 300;
  Matrix6 alpha{};  // sell arrivals
  Matrix6 mu{};     // sell cancellations
  Matrix6 beta{};   // buy arrivals
  Matrix6 gamma{};  // buy cancellations
  int relative_origin = 0;
};
ModelBParams default_modelB_params(Depth n);
ModelPtr build_modelB(const ModelBParams& params);

/// Model defined by an arbitrary rate function, for experiments and tests.
using RateFunction = std::function<double(const FlowContext&, EventKind, int, Depth)>;
ModelPtr make_function_model(ModelInfo info, RateFunction fn);

nlohmann::json model_to_json(const IntensityModel& model);
/// Throws ParseError on malformed payloads and BadParameter on invalid values.
ModelPtr model_from_json(const nlohmann::json& j);
ModelPtr load_model(const std::string& path);

}  // namespace lobforge
