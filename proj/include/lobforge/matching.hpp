#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lobforge/book.hpp"

namespace lobforge {

struct Trade {
  EventKind side;  // LimitSell for executed sell volume, LimitBuy for executed buy volume
  Price price;
  Depth volume;
  bool operator==(const Trade&) const = default;
};

struct ClearingResult {
  BookState cleared;
  ExecutedOrders executed;
  /// Executed sell levels by ascending price, then buy levels by descending price.
  std::vector<Trade> trades;
};

/// Order-matching clearing operator: the unique map onto admissible books
/// obeying the matching rules (see satisfies_matching_rules). Identity exactly
/// on admissible states.
ClearingResult clear(const BookState& state);

/// The cleared state alone, without the bookkeeping view.
BookState clear_state(const BookState& state);

/// Sub-case of the single-event clearing table that produced an outcome.
enum class EventCase : std::uint8_t {
  BuyBelowBid,         // k <= b
  BuyInSpread,         // b < k < a
  BuyPartialFill,      // a <= k < S^-1(z)
  BuyFullFill,         // S^-1(z) <= k
  SellAboveAsk,        // a <= k
  SellInSpread,        // b < k < a
  SellPartialFill,     // B^-1(z) < k <= b
  SellFullFill,        // k <= B^-1(z)
  CancelBuyAtBid,      // k = b
  CancelBuyBelowBid,   // k < b
  CancelSellAtAsk,     // k = a
  CancelSellAboveAsk,  // k > a
  Fallback,            // preconditions failed; general clearing was used
};

inline constexpr int kEventCaseCount = 13;
const char* to_string(EventCase c);

struct EventOutcome {
  BookState state;
  Price bid;
  Price ask;
  EventCase which;
};

/// True when the fast single-event table applies: admissible state with both
/// sides non-empty, z < min(B(1), S(d)), and cancellations within the queue.
bool event_table_applies(const BookState& state, const Event& event);

/// clear(state + event) evaluated through the per-case table, reporting the new
/// bid/ask without a second pass. Falls back to clear() when the table does not
/// apply; throws NegativeQueue when a cancellation exceeds its queue.
EventOutcome apply_event(const BookState& state, const Event& event);

/// Same, reusing a profile the caller already holds for `state`.
EventOutcome apply_event(const BookState& state, const BookProfile& prof, const Event& event);

/// Membership of `candidate` in the pre-image of the admissible `target`.
/// Throws PreconditionViolated if `target` is not admissible.
bool preimage_contains(const BookState& candidate, const BookState& target);

struct BruteForceBudget {
  std::uint64_t max_candidates = 1'000'000;
};

/// Exhaustive search over all executed pairs Z <= X obeying the matching rules with
/// X - Z admissible. Throws PreconditionViolated if the solution is not unique
/// and BudgetExceeded when the candidate count exceeds the budget.
ClearingResult brute_force_clear(const BookState& state, BruteForceBudget budget = {});

/// Nets all events onto `state` (sum of increments) then clears once.
/// Throws NegativeQueue when the netted book leaves E.
ClearingResult clear_batch(const BookState& state, std::span<const Event> events);

/// Matching rules for the executed orders Z = input - cleared: Z is
/// non-negative, both sides execute equal volume, every executed sell is
/// priced at or below every executed buy, and no resting order is better
/// priced than an executed one on its side.
bool satisfies_matching_rules(const BookState& input, const BookState& cleared);

}  // namespace lobforge
