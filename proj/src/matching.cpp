#include "lobforge/matching.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "lobforge/errors.hpp"

namespace lobforge {

namespace {

ExecutedOrders difference(const BookState& input, const BookState& cleared) {
  ExecutedOrders z{Side(input.buy.size()), Side(input.sell.size())};
  for (std::size_t i = 0; i < input.buy.size(); ++i) {
    z.buy[i] = input.buy[i] - cleared.buy[i];
    z.sell[i] = input.sell[i] - cleared.sell[i];
  }
  return z;
}

std::vector<Trade> trades_of(const ExecutedOrders& z) {
  std::vector<Trade> out;
  for (std::size_t i = 0; i < z.sell.size(); ++i)
    if (z.sell[i] > 0) out.push_back({EventKind::LimitSell, static_cast<Price>(i + 1), z.sell[i]});
  for (std::size_t i = z.buy.size(); i > 0; --i)
    if (z.buy[i - 1] > 0) out.push_back({EventKind::LimitBuy, static_cast<Price>(i), z.buy[i - 1]});
  return out;
}

ClearingResult make_result(const BookState& input, BookState cleared) {
  ClearingResult r;
  r.executed = difference(input, cleared);
  r.trades = trades_of(r.executed);
  r.cleared = std::move(cleared);
  return r;
}

Depth sum(const Side& s) {
  Depth t = 0;
  for (Depth v : s) t += v;
  return t;
}

}  // namespace

BookState clear_state(const BookState& state) {
  const BookProfile prof = profile(state);
  const int d = state.d();
  BookState out(d);

  const Price pb = prof.p_bid;
  if (pb != 0) {
    const Depth g = prof.g(pb);
    if (g <= -state.buy_at(pb)) {
      out.buy = keep_below(state.buy, pb);
    } else {
      out.buy = keep_below(state.buy, pb - 1);
      out.buy_at(pb) -= std::min<Depth>(0, g);
    }
  }

  const Price pa = prof.p_ask;
  if (pa != d + 1) {
    const Depth g = prof.g(pa);
    if (g >= state.sell_at(pa)) {
      out.sell = keep_above(state.sell, pa);
    } else {
      out.sell = keep_above(state.sell, pa + 1);
      out.sell_at(pa) += std::max<Depth>(0, g);
    }
  }
  return out;
}

ClearingResult clear(const BookState& state) { return make_result(state, clear_state(state)); }

const char* to_string(EventCase c) {
  switch (c) {
    case EventCase::BuyBelowBid: return "1.1";
    case EventCase::BuyInSpread: return "1.2";
    case EventCase::BuyPartialFill: return "1.3";
    case EventCase::BuyFullFill: return "1.4";
    case EventCase::SellAboveAsk: return "2.1";
    case EventCase::SellInSpread: return "2.2";
    case EventCase::SellPartialFill: return "2.3";
    case EventCase::SellFullFill: return "2.4";
    case EventCase::CancelBuyAtBid: return "3.1";
    case EventCase::CancelBuyBelowBid: return "3.2";
    case EventCase::CancelSellAtAsk: return "4.1";
    case EventCase::CancelSellAboveAsk: return "4.2";
    case EventCase::Fallback: return "fallback";
  }
  return "?";
}

namespace {

bool table_applies(const BookState& state, const BookProfile& prof, const Event& e) {
  const int d = state.d();
  if (e.price < 1 || e.price > d || e.size < 1) return false;
  const Quote q = ask_bid(state);
  if (q.bid == 0 || q.ask == d + 1 || q.ask <= q.bid) return false;
  if (e.size >= std::min(prof.B(1), prof.S(d))) return false;
  switch (e.kind) {
    case EventKind::CancelBuy: return e.price <= q.bid && e.size <= state.buy_at(e.price);
    case EventKind::CancelSell: return e.price >= q.ask && e.size <= state.sell_at(e.price);
    default: return true;
  }
}

}  // namespace

bool event_table_applies(const BookState& state, const Event& event) {
  return table_applies(state, profile(state), event);
}

EventOutcome apply_event(const BookState& state, const Event& event) {
  return apply_event(state, profile(state), event);
}

EventOutcome apply_event(const BookState& state, const BookProfile& prof, const Event& e) {
  if (!table_applies(state, prof, e)) {
    BookState next = clear_state(perturb(state, e));
    const Quote q = ask_bid(next);
    return {std::move(next), q.bid, q.ask, EventCase::Fallback};
  }

  const Quote q = ask_bid(state);
  const Price a = q.ask, b = q.bid, k = e.price;
  const Depth z = e.size;
  EventOutcome out{state, b, a, EventCase::Fallback};

  switch (e.kind) {
    case EventKind::LimitBuy: {
      const Price s = prof.sell_inverse(z);
      if (k <= b) {
        out.state.buy_at(k) += z;
        out.which = EventCase::BuyBelowBid;
      } else if (k < a) {
        out.state.buy_at(k) += z;
        out.bid = k;
        out.which = EventCase::BuyInSpread;
      } else if (k < s) {
        out.state.buy_at(k) += z - prof.S(k);
        out.state.sell = keep_above(state.sell, k + 1);
        out.bid = k;
        out.ask = prof.sell_inverse(prof.S(k) + 1);
        out.which = EventCase::BuyPartialFill;
      } else {
        out.state.sell = keep_above(state.sell, s + 1);
        out.state.sell_at(s) += prof.S(s) - z;
        out.ask = prof.sell_inverse(z + 1);
        out.which = EventCase::BuyFullFill;
      }
      break;
    }
    case EventKind::LimitSell: {
      const Price s = prof.buy_inverse(z);
      if (k >= a) {
        out.state.sell_at(k) += z;
        out.which = EventCase::SellAboveAsk;
      } else if (k > b) {
        out.state.sell_at(k) += z;
        out.ask = k;
        out.which = EventCase::SellInSpread;
      } else if (k > s) {
        out.state.buy = keep_below(state.buy, k - 1);
        out.state.sell_at(k) += z - prof.B(k);
        out.bid = prof.buy_inverse(prof.B(k) + 1);
        out.ask = k;
        out.which = EventCase::SellPartialFill;
      } else {
        out.state.buy = keep_below(state.buy, s - 1);
        out.state.buy_at(s) += prof.B(s) - z;
        out.bid = prof.buy_inverse(z + 1);
        out.which = EventCase::SellFullFill;
      }
      break;
    }
    case EventKind::CancelBuy:
      out.state.buy_at(k) -= z;
      if (k == b) {
        out.bid = prof.buy_inverse(z + 1);
        out.which = EventCase::CancelBuyAtBid;
      } else {
        out.which = EventCase::CancelBuyBelowBid;
      }
      break;
    case EventKind::CancelSell:
      out.state.sell_at(k) -= z;
      if (k == a) {
        out.ask = prof.sell_inverse(z + 1);
        out.which = EventCase::CancelSellAtAsk;
      } else {
        out.which = EventCase::CancelSellAboveAsk;
      }
      break;
  }
  return out;
}

bool preimage_contains(const BookState& candidate, const BookState& target) {
  if (!is_admissible(target)) throw Error(ErrorCode::PreconditionViolated, "pre-image target must be admissible");
  if (candidate.d() != target.d()) return false;
  const ExecutedOrders z = difference(candidate, target);
  for (std::size_t i = 0; i < z.buy.size(); ++i)
    if (z.buy[i] < 0 || z.sell[i] < 0) return false;
  if (z.buy_volume() != z.sell_volume()) return false;
  const Quote q = ask_bid(target);
  const Price sup_sell = sup_support(z.sell);
  const Price inf_buy = inf_support(z.buy);
  return sup_sell <= inf_buy && sup_sell <= q.ask && inf_buy >= q.bid;
}

bool satisfies_matching_rules(const BookState& input, const BookState& cleared) {
  if (input.d() != cleared.d()) return false;
  const ExecutedOrders z = difference(input, cleared);
  for (std::size_t i = 0; i < z.buy.size(); ++i)
    if (z.buy[i] < 0 || z.sell[i] < 0) return false;
  if (z.buy_volume() != z.sell_volume()) return false;
  if (sup_support(z.sell) > inf_support(z.buy)) return false;
  if (sup_support(z.sell) > inf_support(cleared.sell)) return false;
  if (inf_support(z.buy) < sup_support(cleared.buy)) return false;
  return true;
}

namespace {

// Calls visit(part) for every depth array bounded elementwise by `cap`.
template <class Visit>
bool for_each_sub_array(const Side& cap, Visit&& visit) {
  Side part(cap.size(), 0);
  while (true) {
    if (!visit(part)) return false;
    std::size_t i = 0;
    while (i < cap.size() && part[i] == cap[i]) part[i++] = 0;
    if (i == cap.size()) return true;
    ++part[i];
  }
}

}  // namespace

ClearingResult brute_force_clear(const BookState& state, BruteForceBudget budget) {
  std::uint64_t buy_count = 1, sell_count = 1;
  for (std::size_t i = 0; i < state.buy.size(); ++i) {
    buy_count *= static_cast<std::uint64_t>(state.buy[i] + 1);
    sell_count *= static_cast<std::uint64_t>(state.sell[i] + 1);
    if (buy_count > budget.max_candidates || sell_count > budget.max_candidates ||
        buy_count * sell_count > budget.max_candidates)
      throw Error(ErrorCode::BudgetExceeded, "brute-force clearing search space too large");
  }

  std::optional<BookState> found;
  BookState candidate = state;
  for_each_sub_array(state.buy, [&](const Side& zb) {
    const Depth vol = sum(zb);
    for (std::size_t i = 0; i < zb.size(); ++i) candidate.buy[i] = state.buy[i] - zb[i];
    return for_each_sub_array(state.sell, [&](const Side& zs) {
      if (sum(zs) != vol) return true;
      for (std::size_t i = 0; i < zs.size(); ++i) candidate.sell[i] = state.sell[i] - zs[i];
      if (!is_admissible(candidate) || !satisfies_matching_rules(state, candidate)) return true;
      if (found)
        throw Error(ErrorCode::PreconditionViolated, "more than one matching satisfies the clearing rules");
      found = candidate;
      return true;
    });
  });
  if (!found) throw Error(ErrorCode::PreconditionViolated, "no matching satisfies the clearing rules");
  return make_result(state, *found);
}

ClearingResult clear_batch(const BookState& state, std::span<const Event> events) {
  const int d = state.d();
  BookState net = state;
  for (const Event& e : events) {
    if (e.price < 1 || e.price > d) throw Error(ErrorCode::OutOfGrid, "batch event outside the grid");
    const auto i = static_cast<std::size_t>(e.price - 1);
    switch (e.kind) {
      case EventKind::LimitBuy: net.buy[i] += e.size; break;
      case EventKind::LimitSell: net.sell[i] += e.size; break;
      case EventKind::CancelBuy: net.buy[i] -= e.size; break;
      case EventKind::CancelSell: net.sell[i] -= e.size; break;
    }
  }
  for (int k = 1; k <= d; ++k)
    if (net.buy_at(k) < 0 || net.sell_at(k) < 0)
      throw Error(ErrorCode::NegativeQueue, "netted batch drives the queue at price " + std::to_string(k) + " negative");
  return clear(net);
}

}  // namespace lobforge
