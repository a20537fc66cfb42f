#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace lobforge {

/// Queue volume in model units. Exact integer arithmetic only.
using Depth = std::int64_t;

/// Price index on the fixed grid 1..d. The empty-side markers are 0 (no bid)
/// and d + 1 (no ask), so every comparison between an ask and a bid is total.
using Price = int;

/// Depth array over the grid; element k - 1 holds the volume at price k.
using Side = std::vector<Depth>;

struct BookState {
  Side buy;
  Side sell;

  BookState() = default;
  explicit BookState(int d);
  /// Throws BadParameter on mismatched lengths, an empty grid, or a negative entry.
  BookState(Side buy_side, Side sell_side);

  int d() const { return static_cast<int>(buy.size()); }
  Depth buy_at(Price k) const { return buy[static_cast<std::size_t>(k - 1)]; }
  Depth sell_at(Price k) const { return sell[static_cast<std::size_t>(k - 1)]; }
  Depth& buy_at(Price k) { return buy[static_cast<std::size_t>(k - 1)]; }
  Depth& sell_at(Price k) { return sell[static_cast<std::size_t>(k - 1)]; }

  Depth buy_volume() const;
  Depth sell_volume() const;

  bool operator==(const BookState&) const = default;
};

struct BookStateHash {
  std::size_t operator()(const BookState& s) const noexcept;
};

/// Hash of a depth array; shared by every state type keyed on side pairs.
std::size_t hash_sides(const Side& buy, const Side& sell) noexcept;

struct Quote {
  Price ask;
  Price bid;
  bool operator==(const Quote&) const = default;
};

inline Price no_ask(int d) { return d + 1; }
inline constexpr Price no_bid = 0;

/// inf supp, with d + 1 for the zero array.
Price inf_support(const Side& side);
/// sup supp, with 0 for the zero array.
Price sup_support(const Side& side);

Quote ask_bid(const BookState& state);
bool is_admissible(const BookState& state);

enum class TruncateMode {
  KeepBelow,  // keep indices <= i
  KeepAbove,  // keep indices >= i
};

Side truncate(const Side& side, TruncateMode mode, long i);
inline Side keep_below(const Side& side, long i) { return truncate(side, TruncateMode::KeepBelow, i); }
inline Side keep_above(const Side& side, long i) { return truncate(side, TruncateMode::KeepAbove, i); }

/// Cumulative statistics of one state, shared by clearing and the generator.
struct BookProfile {
  int d = 0;
  std::vector<Depth> cum_buy_above;   // B(k) = sum_{i >= k} buy_i
  std::vector<Depth> cum_sell_below;  // S(k) = sum_{i <= k} sell_i
  std::vector<Depth> imbalance;       // g(k) = S(k) - B(k)
  Price p_ask = 0;                    // inf {k : g(k) > 0}, d + 1 if none
  Price p_bid = 0;                    // sup {k : g(k) < 0}, 0 if none

  Depth B(Price k) const;
  Depth S(Price k) const;
  Depth g(Price k) const { return imbalance[static_cast<std::size_t>(k - 1)]; }

  /// sup {i : B(i) >= z}, or 0 when no level qualifies.
  Price buy_inverse(Depth z) const;
  /// inf {i : S(i) >= z}, or d + 1 when no level qualifies.
  Price sell_inverse(Depth z) const;
};

BookProfile profile(const BookState& state);

/// Z = X - C(X): volume removed from each level by matching.
struct ExecutedOrders {
  Side buy;
  Side sell;

  Depth buy_volume() const;
  Depth sell_volume() const;
  bool empty() const { return buy_volume() == 0 && sell_volume() == 0; }
  bool operator==(const ExecutedOrders&) const = default;
};

enum class EventKind : std::uint8_t { LimitBuy, LimitSell, CancelBuy, CancelSell };

inline constexpr EventKind kAllEventKinds[] = {EventKind::LimitBuy, EventKind::LimitSell,
                                               EventKind::CancelBuy, EventKind::CancelSell};

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view text);

struct Event {
  EventKind kind;
  Price price;
  Depth size;
  bool operator==(const Event&) const = default;
};

/// X + Delta X for one elementary event; throws NegativeQueue when a
/// cancellation exceeds the queue and OutOfGrid for prices off the grid.
BookState perturb(const BookState& state, const Event& event);

/// In-place variant over a raw side pair; used by both coordinate frames.
void perturb_in_place(Side& buy, Side& sell, std::size_t index, EventKind kind, Depth size);

}  // namespace lobforge
