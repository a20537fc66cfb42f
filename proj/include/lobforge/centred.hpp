#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "lobforge/book.hpp"

namespace lobforge {

/// Book re-indexed around the mid-price. Arrays have 2d'+1 entries and
/// element 0 holds index -d'. `p` is ask + bid in absolute ticks.
struct CentredState {
  Side buy;
  Side sell;
  int d_prime = 0;
  long p = 0;

  CentredState() = default;
  CentredState(int d_prime, long p);
  /// Throws BadParameter when array lengths differ from 2d'+1 or entries are negative.
  CentredState(Side buy_side, Side sell_side, int d_prime, long p);

  std::size_t width() const { return buy.size(); }
  Depth buy_at(int i) const { return buy[static_cast<std::size_t>(i + d_prime)]; }
  Depth sell_at(int i) const { return sell[static_cast<std::size_t>(i + d_prime)]; }
  Depth& buy_at(int i) { return buy[static_cast<std::size_t>(i + d_prime)]; }
  Depth& sell_at(int i) { return sell[static_cast<std::size_t>(i + d_prime)]; }

  bool operator==(const CentredState&) const = default;
};

struct CentredStateHash {
  std::size_t operator()(const CentredState& s) const noexcept;
};

/// p mod 2 in {0, 1} for any sign.
inline long parity(long p) { return ((p % 2) + 2) % 2; }
/// Smallest integer >= p / 2.
inline long ceil_half(long p) { return (p + parity(p)) / 2; }

/// Centred ask: inf supp of the sell side, d' when empty.
int centred_ask(const CentredState& x);
/// Centred bid: sup supp of the buy side, -d' when empty.
int centred_bid(const CentredState& x);

/// Membership of the centred state space: both sides non-empty, a > b, a + b + p mod 2 = 0.
bool is_centred_admissible(const CentredState& x);

/// Shifts one side: result_j = side_{j+i}, zero where j + i leaves the window.
Side shift_side(const Side& side, int d_prime, long i);

/// Centering operator. Throws PreconditionViolated unless both sides are
/// non-empty and uncrossed.
CentredState center(const CentredState& y);

/// Order matching on the window followed by centering. Throws SideWipedOut
/// when matching empties a side.
CentredState clear_centred(const CentredState& x);

/// Throws PreconditionViolated unless the book is admissible with both sides
/// non-empty, and OutOfGrid when a best quote falls outside the window.
CentredState to_centred(const BookState& state, int d_prime);
/// Throws OutOfGrid when a non-empty level lands outside 1..d.
BookState from_centred(const CentredState& x, int d);

struct PreimageOptions {
  Depth max_size = 1;                      // cap on each free boundary entry and each executed entry
  std::uint64_t max_candidates = 5'000'000;
};

/// Visits every (state, p') mapped onto `target` by clear_centred whose free
/// boundary entries and executed volumes are each at most max_size. Order:
/// shift ascending, p' ascending, free entries lexicographic, then executed
/// volume ascending with buy and sell parts lexicographic. Returning false
/// from `visit` stops the walk. Throws PreconditionViolated when the target is
/// outside the centred state space and BudgetExceeded past max_candidates.
void for_each_centred_preimage(const CentredState& target, const PreimageOptions& options,
                               const std::function<bool(const CentredState&)>& visit);

std::vector<CentredState> enumerate_centred_preimage(const CentredState& target, const PreimageOptions& options);

/// Pads the buy side with b_inf below a - K and the sell side with a_inf above b + K.
CentredState model3_pad(const CentredState& x, int K, Depth a_inf, Depth b_inf);

nlohmann::json centred_to_json(const CentredState& x);
CentredState centred_from_json(const nlohmann::json& j);

}  // namespace lobforge
