#include "lobforge/centred.hpp"

#include <algorithm>
#include <string>

#include "lobforge/errors.hpp"
#include "lobforge/matching.hpp"

namespace lobforge {

CentredState::CentredState(int dp, long p_value) : d_prime(dp), p(p_value) {
  if (dp < 1) throw Error(ErrorCode::BadParameter, "half-window must be positive");
  buy.assign(static_cast<std::size_t>(2 * dp + 1), 0);
  sell.assign(static_cast<std::size_t>(2 * dp + 1), 0);
}

CentredState::CentredState(Side buy_side, Side sell_side, int dp, long p_value)
    : buy(std::move(buy_side)), sell(std::move(sell_side)), d_prime(dp), p(p_value) {
  const auto w = static_cast<std::size_t>(2 * dp + 1);
  if (dp < 1 || buy.size() != w || sell.size() != w)
    throw Error(ErrorCode::BadParameter, "centred sides need 2d'+1 entries");
  for (std::size_t i = 0; i < w; ++i)
    if (buy[i] < 0 || sell[i] < 0) throw Error(ErrorCode::BadParameter, "depths must be non-negative");
}

std::size_t CentredStateHash::operator()(const CentredState& s) const noexcept {
  return hash_sides(s.buy, s.sell) ^ (static_cast<std::size_t>(s.p) * 0x9e3779b97f4a7c15ull);
}

int centred_ask(const CentredState& x) {
  const Price k = inf_support(x.sell);
  return k == static_cast<Price>(x.sell.size() + 1) ? x.d_prime : k - 1 - x.d_prime;
}

int centred_bid(const CentredState& x) {
  const Price k = sup_support(x.buy);
  return k == 0 ? -x.d_prime : k - 1 - x.d_prime;
}

namespace {
bool nonzero(const Side& s) {
  return std::any_of(s.begin(), s.end(), [](Depth v) { return v != 0; });
}
}  // namespace

bool is_centred_admissible(const CentredState& x) {
  if (!nonzero(x.buy) || !nonzero(x.sell)) return false;
  const int a = centred_ask(x), b = centred_bid(x);
  return a > b && a + b + parity(x.p) == 0;
}

Side shift_side(const Side& side, int d_prime, long i) {
  Side out(side.size(), 0);
  const long lo = std::max<long>(-d_prime, -d_prime - i);
  const long hi = std::min<long>(d_prime, d_prime - i);
  for (long j = lo; j <= hi; ++j) out[static_cast<std::size_t>(j + d_prime)] = side[static_cast<std::size_t>(j + i + d_prime)];
  return out;
}

CentredState center(const CentredState& y) {
  if (!nonzero(y.buy) || !nonzero(y.sell))
    throw Error(ErrorCode::PreconditionViolated, "centering needs both sides non-empty");
  const int a = centred_ask(y), b = centred_bid(y);
  if (a <= b) throw Error(ErrorCode::PreconditionViolated, "centering needs an uncrossed book");
  const long p_next = y.p + a + b + parity(y.p);
  const long shift = ceil_half(p_next) - ceil_half(y.p);
  return CentredState(shift_side(y.buy, y.d_prime, shift), shift_side(y.sell, y.d_prime, shift), y.d_prime, p_next);
}

CentredState clear_centred(const CentredState& x) {
  BookState matched = clear_state(BookState(x.buy, x.sell));
  if (!nonzero(matched.buy) || !nonzero(matched.sell))
    throw Error(ErrorCode::SideWipedOut, "matching emptied one side of the centred book");
  return center(CentredState(std::move(matched.buy), std::move(matched.sell), x.d_prime, x.p));
}

CentredState to_centred(const BookState& state, int d_prime) {
  const Quote q = ask_bid(state);
  if (q.bid == 0 || q.ask == state.d() + 1 || q.ask <= q.bid)
    throw Error(ErrorCode::PreconditionViolated, "centring needs an admissible book with both sides non-empty");
  CentredState x(d_prime, static_cast<long>(q.ask) + q.bid);
  const long origin = ceil_half(x.p);
  if (q.ask - origin > d_prime || origin - q.bid > d_prime)
    throw Error(ErrorCode::OutOfGrid, "best quotes fall outside the centred window");
  for (int k = 1; k <= state.d(); ++k) {
    const long i = k - origin;
    if (i < -d_prime || i > d_prime) continue;
    x.buy_at(static_cast<int>(i)) = state.buy_at(k);
    x.sell_at(static_cast<int>(i)) = state.sell_at(k);
  }
  return x;
}

BookState from_centred(const CentredState& x, int d) {
  BookState out(d);
  const long origin = ceil_half(x.p);
  for (int i = -x.d_prime; i <= x.d_prime; ++i) {
    const Depth b = x.buy_at(i), s = x.sell_at(i);
    if (b == 0 && s == 0) continue;
    const long k = i + origin;
    if (k < 1 || k > d)
      throw Error(ErrorCode::OutOfGrid, "centred level " + std::to_string(i) + " maps to absolute price " +
                                            std::to_string(k) + " outside 1.." + std::to_string(d));
    out.buy_at(static_cast<Price>(k)) = b;
    out.sell_at(static_cast<Price>(k)) = s;
  }
  return out;
}

namespace {

// Odometer over `slots` of a depth array, each entry raised by 0..cap on top of
// its current value, last slot fastest. Stops early when visit returns false;
// the array is restored either way.
template <class Visit>
bool for_each_fill(Side& side, const std::vector<std::size_t>& slots, Depth cap, Visit&& visit) {
  std::vector<Depth> add(slots.size(), 0);
  bool completed = true;
  while (true) {
    if (!visit()) {
      completed = false;
      break;
    }
    std::size_t n = slots.size();
    while (n > 0 && add[n - 1] == cap) {
      side[slots[n - 1]] -= cap;
      add[n - 1] = 0;
      --n;
    }
    if (n == 0) return true;
    ++add[n - 1];
    ++side[slots[n - 1]];
  }
  for (std::size_t n = 0; n < slots.size(); ++n) side[slots[n]] -= add[n];
  return completed;
}

struct Part {
  Side z;
  Depth volume;
  int edge;  // inf supp for buys, sup supp for sells
};

// All executed-volume arrays on indices from..to of one side, bucketed by volume.
std::vector<std::vector<Part>> executed_parts(std::size_t w, int dp, int from, int to, Depth m, bool buy_side,
                                              const std::function<void()>& charge) {
  std::vector<std::vector<Part>> by_volume;
  Side z(w, 0);
  std::vector<std::size_t> slots;
  for (int i = from; i <= to; ++i) slots.push_back(static_cast<std::size_t>(i + dp));
  for_each_fill(z, slots, m, [&] {
    charge();
    Depth v = 0;
    int lo = dp + 1, hi = -dp - 1;
    for (std::size_t k = 0; k < w; ++k) {
      if (z[k] == 0) continue;
      v += z[k];
      const int i = static_cast<int>(k) - dp;
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
    if (by_volume.size() <= static_cast<std::size_t>(v)) by_volume.resize(static_cast<std::size_t>(v) + 1);
    by_volume[static_cast<std::size_t>(v)].push_back({z, v, buy_side ? lo : hi});
    return true;
  });
  return by_volume;
}

}  // namespace

void for_each_centred_preimage(const CentredState& target, const PreimageOptions& options,
                               const std::function<bool(const CentredState&)>& visit) {
  if (!is_centred_admissible(target))
    throw Error(ErrorCode::PreconditionViolated, "pre-image target must lie in the centred state space");
  if (options.max_size < 0) throw Error(ErrorCode::BadParameter, "max_size must be non-negative");
  const int dp = target.d_prime;
  const auto w = target.width();
  const Depth m = options.max_size;
  std::uint64_t examined = 0;
  const std::function<void()> charge = [&] {
    if (++examined > options.max_candidates)
      throw Error(ErrorCode::BudgetExceeded, "centred pre-image enumeration exceeded its budget");
  };

  for (long s = -2L * dp; s <= 2L * dp; ++s) {
    const long c = ceil_half(target.p) + s;
    for (long p_prev : {2 * c - 1, 2 * c}) {
      // Centring pre-image: the target shifted back, plus free volume where the
      // shift discards data. Free buy volume can only sit below the window's
      // kept part and free sell volume above it, else the quotes would move.
      CentredState y(shift_side(target.buy, dp, s), shift_side(target.sell, dp, s), dp, p_prev);
      std::vector<std::size_t> free_slots;
      for (long i = -dp; i <= dp; ++i)
        if (i + s < -dp || i + s > dp) free_slots.push_back(static_cast<std::size_t>(i + dp));
      Side& free_side = s < 0 ? y.buy : y.sell;
      const bool more = for_each_fill(free_side, free_slots, m, [&] {
        charge();
        if (!nonzero(y.buy) || !nonzero(y.sell)) return true;
        const int a = centred_ask(y), b = centred_bid(y);
        if (a <= b || center(y) != target) return true;
        // Matching pre-image of y: executed volume Z with |Z+| = |Z-|,
        // sup supp Z- <= inf supp Z+, sup supp Z- <= a(y), inf supp Z+ >= b(y).
        const auto buys = executed_parts(w, dp, b, dp, m, true, charge);
        const auto sells = executed_parts(w, dp, -dp, a, m, false, charge);
        CentredState x = y;
        for (std::size_t v = 0; v < buys.size() && v < sells.size(); ++v) {
          for (const Part& zb : buys[v]) {
            for (const Part& zs : sells[v]) {
              if (v > 0 && zs.edge > zb.edge) continue;
              charge();
              for (std::size_t k = 0; k < w; ++k) {
                x.buy[k] = y.buy[k] + zb.z[k];
                x.sell[k] = y.sell[k] + zs.z[k];
              }
              if (!visit(x)) return false;
            }
          }
        }
        return true;
      });
      if (!more) return;
    }
  }
}

std::vector<CentredState> enumerate_centred_preimage(const CentredState& target, const PreimageOptions& options) {
  std::vector<CentredState> out;
  for_each_centred_preimage(target, options, [&](const CentredState& x) {
    out.push_back(x);
    return true;
  });
  return out;
}

CentredState model3_pad(const CentredState& x, int K, Depth a_inf, Depth b_inf) {
  if (K < 0 || K > 2 * x.d_prime) throw Error(ErrorCode::BadParameter, "K must lie in 0..2d'");
  if (a_inf < 0 || b_inf < 0) throw Error(ErrorCode::BadParameter, "padding depths must be non-negative");
  CentredState y = x;
  const int a = centred_ask(x), b = centred_bid(x);
  for (int i = -x.d_prime; i <= x.d_prime; ++i) {
    if (i < a - K) y.buy_at(i) = b_inf;
    if (i > b + K) y.sell_at(i) = a_inf;
  }
  return y;
}

nlohmann::json centred_to_json(const CentredState& x) {
  return nlohmann::json{{"d_prime", x.d_prime}, {"p", x.p}, {"buy", x.buy}, {"sell", x.sell}};
}

CentredState centred_from_json(const nlohmann::json& j) {
  try {
    return CentredState(j.at("buy").get<Side>(), j.at("sell").get<Side>(), j.at("d_prime").get<int>(), j.at("p").get<long>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, 0, std::string("centred book: ") + e.what());
  }
}

}  // namespace lobforge
