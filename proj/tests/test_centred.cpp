#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "lobforge/centred.hpp"
#include "lobforge/errors.hpp"
#include "lobforge/matching.hpp"
#include "support/oracles.hpp"

using namespace lobforge;

namespace {

CentredState make(int dp, long p, std::map<int, Depth> buys, std::map<int, Depth> sells) {
  CentredState x(dp, p);
  for (auto [i, v] : buys) x.buy_at(i) = v;
  for (auto [i, v] : sells) x.sell_at(i) = v;
  return x;
}

// Base book with mid-price 10 plus five arrivals, three of them crossing.
CentredState arrivals_state() {
  CentredState x = make(3, 10, {{-3, 3}, {-2, 2}, {-1, 1}}, {{1, 1}, {3, 3}});
  x.sell_at(-2) += 1;
  x.sell_at(0) += 1;
  x.sell_at(2) += 1;
  x.buy_at(1) += 1;
  x.buy_at(2) += 2;
  return x;
}

}  // namespace

TEST_CASE("parity and half ceiling for any sign") {
  CHECK(parity(10) == 0);
  CHECK(parity(-3) == 1);
  CHECK(ceil_half(11) == 6);
  CHECK(ceil_half(-3) == -1);
  CHECK(ceil_half(-4) == -2);
  for (long p = -9; p <= 9; ++p) CHECK(2 * ceil_half(p) == p + parity(p));
}

TEST_CASE("shift operator") {
  Side s{3, 2, 1, 0, 0, 0, 0};
  CHECK(shift_side(s, 3, 0) == s);
  CHECK(shift_side(s, 3, 1) == Side{2, 1, 0, 0, 0, 0, 0});
  Side edge{5, 0, 0, 0, 0, 0, 7};
  CHECK(shift_side(shift_side(edge, 3, -1), 3, 1) != edge);
  CHECK(shift_side(s, 3, 7) == Side(7, 0));
}

TEST_CASE("absolute to centred conversions") {
  BookState even({1, 3, 2, 1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 1, 0, 3, 2});
  CentredState c = to_centred(even, 3);
  CHECK(c == make(3, 10, {{-3, 3}, {-2, 2}, {-1, 1}}, {{1, 1}, {3, 3}}));
  CHECK(is_centred_admissible(c));

  BookState odd({1, 3, 2, 1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 1, 3, 2});
  CentredState o = to_centred(odd, 3);
  CHECK(o == make(3, 11, {{-3, 2}, {-2, 1}}, {{1, 1}, {2, 3}, {3, 2}}));
  CHECK(is_centred_admissible(o));
  CHECK(centred_ask(o) == 1);
  CHECK(centred_bid(o) == -2);

  BookState inside({0, 0, 2, 1, 0, 0, 0}, {0, 0, 0, 0, 1, 4, 0});
  CHECK(from_centred(to_centred(inside, 3), 7) == inside);
  CHECK_THROWS_AS(from_centred(c, 4), Error);
  CHECK_THROWS_AS(to_centred(BookState({1, 0}, {0, 0}), 2), Error);
}

TEST_CASE("centering the matched middle panel") {
  CentredState middle = make(3, 10, {{-3, 3}, {-2, 2}, {-1, 1}}, {{2, 1}, {3, 3}});
  CentredState right = center(middle);
  CHECK(right == make(3, 11, {{-3, 2}, {-2, 1}}, {{1, 1}, {2, 3}}));
  CHECK(is_centred_admissible(right));
  CHECK(center(right) == right);
}

TEST_CASE("centering an odd book") {
  CentredState y = make(2, 7, {{-1, 1}}, {{1, 1}});
  CentredState x = center(y);
  CHECK(x.p == 8);
  CHECK(is_centred_admissible(x));
  CHECK_THROWS_AS(center(make(2, 7, {{1, 1}}, {{0, 1}})), Error);
}

TEST_CASE("centred clearing of the arrivals example") {
  CentredState in = arrivals_state();
  BookState middle = clear_state(BookState(in.buy, in.sell));
  CHECK(middle.buy == make(3, 10, {{-3, 3}, {-2, 2}, {-1, 1}}, {}).buy);
  CHECK(middle.sell == make(3, 10, {}, {{2, 1}, {3, 3}}).sell);
  CHECK(clear_centred(in) == make(3, 11, {{-3, 2}, {-2, 1}}, {{1, 1}, {2, 3}}));
}

TEST_CASE("centred clearing wipe-out") {
  CHECK_THROWS_AS(clear_centred(make(2, 4, {{0, 1}}, {{0, 1}})), Error);
}

TEST_CASE("centred clearing fixes the centred state space") {
  const auto books = oracle::all_books(5, 2);
  for (long p = -6; p <= 6; ++p) {
    for (const auto& b : books) {
      CentredState x(b.buy, b.sell, 2, p);
      CentredState y;
      try {
        y = clear_centred(x);
      } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::SideWipedOut);
        continue;
      }
      REQUIRE(is_centred_admissible(y));
      REQUIRE(clear_centred(y) == y);
      REQUIRE((y == x) == is_centred_admissible(x));
    }
  }
}

TEST_CASE("centering always lands in the centred state space") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 20000; ++n) {
    const int dp = std::uniform_int_distribution<int>(2, 4)(rng);
    BookState b = oracle::random_two_sided_book(rng, 2 * dp + 1, 3);
    CentredState y(b.buy, b.sell, dp, std::uniform_int_distribution<long>(-20, 20)(rng));
    REQUIRE(is_centred_admissible(center(y)));
  }
}

TEST_CASE("centred clearing agrees with absolute clearing inside the window") {
  std::mt19937_64 rng(17);
  int checked = 0;
  while (checked < 2000) {
    const int dp = 3, d = 20;
    BookState b = oracle::random_two_sided_book(rng, 2 * dp + 1, 3);
    CentredState x(b.buy, b.sell, dp, std::uniform_int_distribution<long>(16, 24)(rng));
    if (!is_centred_admissible(x)) x = center(x);
    // one crossing arrival
    CentredState y = x;
    const int i = std::uniform_int_distribution<int>(-dp, dp)(rng);
    if (std::uniform_int_distribution<int>(0, 1)(rng))
      y.buy_at(i) += 1;
    else
      y.sell_at(i) += 1;
    CentredState c;
    try {
      c = clear_centred(y);
    } catch (const Error&) {
      continue;
    }
    BookState absolute = clear_state(from_centred(y, d));
    // Levels shifted out of the window are cancelled in the centred frame only.
    BookState expected = from_centred(to_centred(absolute, dp), d);
    REQUIRE(from_centred(c, d) == expected);
    ++checked;
  }
}

TEST_CASE("model 3 padding") {
  CentredState x = make(3, 10, {{-3, 3}, {-2, 2}, {-1, 1}}, {{1, 1}, {3, 3}});
  CentredState zero = make(3, 10, {{-1, 1}}, {{1, 1}});
  CHECK(model3_pad(zero, 2, 0, 0) == zero);
  CentredState padded = model3_pad(x, 2, 5, 5);
  CHECK(padded.buy_at(-3) == 5);
  CHECK(padded.buy_at(-2) == 5);
  CHECK(padded.buy_at(-1) == 1);
  CHECK(padded.sell_at(2) == 5);
  CHECK(padded.sell_at(3) == 5);
  CHECK(padded.sell_at(1) == 1);
  CHECK(model3_pad(padded, 2, 5, 5) == padded);
  CHECK_THROWS_AS(model3_pad(x, 7, 1, 1), Error);
}

TEST_CASE("centred pre-image of the arrivals example contains its input") {
  CentredState target = make(3, 11, {{-3, 2}, {-2, 1}}, {{1, 1}, {2, 3}});
  bool saw_target = false, saw_input = false;
  for_each_centred_preimage(target, {3, 50'000'000}, [&](const CentredState& x) {
    saw_target |= (x == target);
    saw_input |= (x == arrivals_state());
    return !(saw_target && saw_input);
  });
  CHECK(saw_target);
  CHECK(saw_input);
}

TEST_CASE("centred pre-image is exact on a small window") {
  const int dp = 2;
  const Depth cap = 1;
  const auto books = oracle::all_books(2 * dp + 1, cap);
  for (long p = -1; p <= 1; ++p) {
    // Forward images of every bounded state with nearby p'.
    std::map<std::pair<Side, Side>, std::set<std::pair<std::pair<Side, Side>, long>>> by_target;
    for (long q = p - 4 * dp - 2; q <= p + 4 * dp + 2; ++q) {
      for (const auto& b : books) {
        CentredState x(b.buy, b.sell, dp, q);
        try {
          CentredState y = clear_centred(x);
          if (y.p == p) by_target[{y.buy, y.sell}].insert({{x.buy, x.sell}, q});
        } catch (const Error&) {
        }
      }
    }
    for (const auto& b : books) {
      CentredState target(b.buy, b.sell, dp, p);
      if (!is_centred_admissible(target)) continue;
      std::set<std::pair<std::pair<Side, Side>, long>> found;
      for_each_centred_preimage(target, {cap, 10'000'000}, [&](const CentredState& x) {
        REQUIRE(clear_centred(x) == target);
        bool bounded = true;
        for (std::size_t k = 0; k < x.width(); ++k) bounded &= x.buy[k] <= cap && x.sell[k] <= cap;
        if (bounded) REQUIRE(found.insert({{x.buy, x.sell}, x.p}).second);
        return true;
      });
      REQUIRE(found == by_target[{target.buy, target.sell}]);
    }
  }
}

TEST_CASE("centred JSON round-trip") {
  CentredState x = make(2, -3, {{-1, 4}}, {{1, 2}});
  CHECK(centred_from_json(nlohmann::json::parse(centred_to_json(x).dump())) == x);
}
