#include "lobforge/book.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <string>

#include "lobforge/errors.hpp"

namespace lobforge {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NegativeQueue: return "NegativeQueue";
    case ErrorCode::SideWipedOut: return "SideWipedOut";
    case ErrorCode::OutOfGrid: return "OutOfGrid";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::DeadState: return "DeadState";
    case ErrorCode::StabilityViolated: return "StabilityViolated";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyBook: return "EmptyBook";
    case ErrorCode::ReplicationTimeout: return "ReplicationTimeout";
  }
  return "Unknown";
}

BookState::BookState(int d) {
  if (d < 1) throw Error(ErrorCode::BadParameter, "grid size must be positive");
  buy.assign(static_cast<std::size_t>(d), 0);
  sell.assign(static_cast<std::size_t>(d), 0);
}

BookState::BookState(Side buy_side, Side sell_side) : buy(std::move(buy_side)), sell(std::move(sell_side)) {
  if (buy.empty() || buy.size() != sell.size())
    throw Error(ErrorCode::BadParameter, "buy and sell sides must have the same positive length");
  auto negative = [](Depth v) { return v < 0; };
  if (std::any_of(buy.begin(), buy.end(), negative) || std::any_of(sell.begin(), sell.end(), negative))
    throw Error(ErrorCode::BadParameter, "depths must be non-negative");
}

Depth BookState::buy_volume() const { return std::accumulate(buy.begin(), buy.end(), Depth{0}); }
Depth BookState::sell_volume() const { return std::accumulate(sell.begin(), sell.end(), Depth{0}); }

std::size_t hash_sides(const Side& buy, const Side& sell) noexcept {
  // FNV-1a over the entries; depths are small so mixing each word is enough.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const Side& side) {
    for (Depth v : side) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  mix(buy);
  mix(sell);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

std::size_t BookStateHash::operator()(const BookState& s) const noexcept { return hash_sides(s.buy, s.sell); }

Price inf_support(const Side& side) {
  for (std::size_t i = 0; i < side.size(); ++i)
    if (side[i] > 0) return static_cast<Price>(i + 1);
  return static_cast<Price>(side.size() + 1);
}

Price sup_support(const Side& side) {
  for (std::size_t i = side.size(); i > 0; --i)
    if (side[i - 1] > 0) return static_cast<Price>(i);
  return 0;
}

Quote ask_bid(const BookState& state) { return {inf_support(state.sell), sup_support(state.buy)}; }

bool is_admissible(const BookState& state) {
  const Quote q = ask_bid(state);
  return q.ask > q.bid;
}

Side truncate(const Side& side, TruncateMode mode, long i) {
  const long d = static_cast<long>(side.size());
  Side out(side.size(), 0);
  if (mode == TruncateMode::KeepBelow) {
    const long hi = std::min(i, d);
    for (long k = 1; k <= hi; ++k) out[static_cast<std::size_t>(k - 1)] = side[static_cast<std::size_t>(k - 1)];
  } else {
    const long lo = std::max(i, 1L);
    for (long k = lo; k <= d; ++k) out[static_cast<std::size_t>(k - 1)] = side[static_cast<std::size_t>(k - 1)];
  }
  return out;
}

Depth BookProfile::B(Price k) const {
  if (k > d) return 0;
  if (k < 1) k = 1;
  return cum_buy_above[static_cast<std::size_t>(k - 1)];
}

Depth BookProfile::S(Price k) const {
  if (k < 1) return 0;
  if (k > d) k = d;
  return cum_sell_below[static_cast<std::size_t>(k - 1)];
}

Price BookProfile::buy_inverse(Depth z) const {
  // B is non-increasing, so the qualifying set is a prefix 1..r.
  for (Price i = d; i >= 1; --i)
    if (cum_buy_above[static_cast<std::size_t>(i - 1)] >= z) return i;
  return 0;
}

Price BookProfile::sell_inverse(Depth z) const {
  for (Price i = 1; i <= d; ++i)
    if (cum_sell_below[static_cast<std::size_t>(i - 1)] >= z) return i;
  return d + 1;
}

BookProfile profile(const BookState& state) {
  BookProfile p;
  p.d = state.d();
  const auto n = static_cast<std::size_t>(p.d);
  p.cum_buy_above.resize(n);
  p.cum_sell_below.resize(n);
  p.imbalance.resize(n);
  Depth acc = 0;
  for (std::size_t i = n; i > 0; --i) {
    acc += state.buy[i - 1];
    assert(acc >= 0 && "depth overflow");
    p.cum_buy_above[i - 1] = acc;
  }
  acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += state.sell[i];
    assert(acc >= 0 && "depth overflow");
    p.cum_sell_below[i] = acc;
  }
  p.p_ask = p.d + 1;
  p.p_bid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    p.imbalance[i] = p.cum_sell_below[i] - p.cum_buy_above[i];
    if (p.imbalance[i] < 0) p.p_bid = static_cast<Price>(i + 1);
    if (p.imbalance[i] > 0 && p.p_ask == p.d + 1) p.p_ask = static_cast<Price>(i + 1);
  }
  return p;
}

Depth ExecutedOrders::buy_volume() const { return std::accumulate(buy.begin(), buy.end(), Depth{0}); }
Depth ExecutedOrders::sell_volume() const { return std::accumulate(sell.begin(), sell.end(), Depth{0}); }

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::LimitBuy: return "limit_buy";
    case EventKind::LimitSell: return "limit_sell";
    case EventKind::CancelBuy: return "cancel_buy";
    case EventKind::CancelSell: return "cancel_sell";
  }
  return "?";
}

EventKind event_kind_from_string(std::string_view text) {
  for (EventKind k : kAllEventKinds)
    if (to_string(k) == text) return k;
  if (text == "buy" || text == "LimitBuy") return EventKind::LimitBuy;
  if (text == "sell" || text == "LimitSell") return EventKind::LimitSell;
  if (text == "CancelBuy") return EventKind::CancelBuy;
  if (text == "CancelSell") return EventKind::CancelSell;
  throw Error(ErrorCode::BadParameter, "unknown event kind '" + std::string(text) + "'");
}

void perturb_in_place(Side& buy, Side& sell, std::size_t index, EventKind kind, Depth size) {
  switch (kind) {
    case EventKind::LimitBuy: buy[index] += size; break;
    case EventKind::LimitSell: sell[index] += size; break;
    case EventKind::CancelBuy:
      if (buy[index] < size) throw Error(ErrorCode::NegativeQueue, "buy cancellation exceeds queue");
      buy[index] -= size;
      break;
    case EventKind::CancelSell:
      if (sell[index] < size) throw Error(ErrorCode::NegativeQueue, "sell cancellation exceeds queue");
      sell[index] -= size;
      break;
  }
}

BookState perturb(const BookState& state, const Event& event) {
  if (event.price < 1 || event.price > state.d())
    throw Error(ErrorCode::OutOfGrid, "event price " + std::to_string(event.price) + " outside 1.." +
                                          std::to_string(state.d()));
  if (event.size < 0) throw Error(ErrorCode::BadParameter, "event size must be non-negative");
  BookState out = state;
  perturb_in_place(out.buy, out.sell, static_cast<std::size_t>(event.price - 1), event.kind, event.size);
  return out;
}

}  // namespace lobforge
