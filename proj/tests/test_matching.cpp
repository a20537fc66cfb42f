#include <doctest.h>

#include <array>
#include <random>

#include "lobforge/errors.hpp"
#include "lobforge/matching.hpp"
#include "support/oracles.hpp"

using namespace lobforge;

namespace {
BookState fig13() { return BookState({1, 3, 2, 1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 1, 0, 3, 2}); }
BookState fig23_left() { return BookState({1, 3, 2, 1, 0, 0, 2, 0, 0}, {0, 0, 1, 1, 1, 1, 0, 3, 2}); }
}  // namespace

TEST_CASE("clearing the crossed example") {
  ClearingResult r = clear(fig23_left());
  CHECK(r.cleared == BookState({1, 3, 2, 1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 0, 3, 2}));
  CHECK(r.executed.buy == Side{0, 0, 0, 0, 0, 0, 2, 0, 0});
  CHECK(r.executed.sell == Side{0, 0, 1, 1, 0, 0, 0, 0, 0});
  REQUIRE(r.trades.size() == 3);
  CHECK(r.trades[0] == Trade{EventKind::LimitSell, 3, 1});
  CHECK(r.trades[1] == Trade{EventKind::LimitSell, 4, 1});
  CHECK(r.trades[2] == Trade{EventKind::LimitBuy, 7, 2});
}

TEST_CASE("one side wiped out") {
  ClearingResult r = clear(BookState({0, 3, 0, 0}, {5, 0, 0, 0}));
  CHECK(r.cleared == BookState({0, 0, 0, 0}, {2, 0, 0, 0}));
  CHECK(r.executed.buy_volume() == 3);
  CHECK(r.executed.sell_volume() == 3);
}

TEST_CASE("brute force on a small crossed book") {
  ClearingResult r = brute_force_clear(BookState({0, 2, 0}, {1, 1, 0}));
  CHECK(r.cleared == BookState(3));
  CHECK(r.executed.buy == Side{0, 2, 0});
  CHECK(r.executed.sell == Side{1, 1, 0});
  CHECK(brute_force_clear(fig23_left()).cleared == clear(fig23_left()).cleared);
  CHECK(brute_force_clear(fig13()).executed.empty());
}

TEST_CASE("brute force budget") {
  BruteForceBudget tiny{10};
  CHECK_THROWS_AS(brute_force_clear(fig23_left(), tiny), Error);
}

TEST_CASE("clearing matches both oracles on every small book") {
  for (const BookState& x : oracle::all_books(4, 2)) {
    ClearingResult r = clear(x);
    REQUIRE(is_admissible(r.cleared));
    REQUIRE(r.cleared == oracle::greedy_clear(x));
    REQUIRE(r.cleared == brute_force_clear(x).cleared);
    REQUIRE(clear_state(r.cleared) == r.cleared);
    REQUIRE((r.cleared == x) == is_admissible(x));
    REQUIRE(satisfies_matching_rules(x, r.cleared));
    for (std::size_t i = 0; i < 4; ++i) {
      REQUIRE(r.cleared.buy[i] + r.executed.buy[i] == x.buy[i]);
      REQUIRE(r.cleared.sell[i] + r.executed.sell[i] == x.sell[i]);
    }
  }
}

TEST_CASE("pre-image test on examples") {
  CHECK(preimage_contains(fig23_left(), clear(fig23_left()).cleared));
  CHECK(preimage_contains(fig13(), fig13()));
  BookState unequal = fig13();
  unequal.buy_at(1) += 1;
  unequal.sell_at(1) += 2;
  CHECK_FALSE(preimage_contains(unequal, fig13()));
  CHECK_THROWS_AS(preimage_contains(fig13(), fig23_left()), Error);
}

TEST_CASE("pre-images partition the small books") {
  const auto books = oracle::all_books(3, 2);
  std::vector<BookState> admissible;
  for (const auto& x : books)
    if (is_admissible(x)) admissible.push_back(x);
  for (const auto& y : books) {
    const BookState cy = clear_state(y);
    for (const auto& x : admissible) REQUIRE(preimage_contains(y, x) == (cy == x));
  }
}

TEST_CASE("single-event table on worked examples") {
  BookState x = fig13();
  EventOutcome o = apply_event(x, {EventKind::LimitBuy, 7, 2});
  CHECK(o.which == EventCase::BuyPartialFill);
  CHECK(o.state == BookState({1, 3, 2, 1, 0, 0, 1, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 3, 2}));
  CHECK(o.bid == 7);
  CHECK(o.ask == 8);

  o = apply_event(x, {EventKind::LimitBuy, 9, 2});
  CHECK(o.which == EventCase::BuyFullFill);
  CHECK(o.state == BookState({1, 3, 2, 1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 2, 2}));
  CHECK(o.bid == 4);
  CHECK(o.ask == 8);

  o = apply_event(x, {EventKind::CancelBuy, 4, 1});
  CHECK(o.which == EventCase::CancelBuyAtBid);
  CHECK(o.state == BookState({1, 3, 2, 0, 0, 0, 0, 0, 0}, x.sell));
  CHECK(o.bid == 3);
  CHECK(o.ask == 6);

  o = apply_event(x, {EventKind::CancelSell, 8, 1});
  CHECK(o.which == EventCase::CancelSellAboveAsk);
  CHECK(o.state.sell_at(8) == 2);
  CHECK(o.state.buy == x.buy);
}

TEST_CASE("single-event table falls back outside its preconditions") {
  BookState x({0, 1, 0, 0}, {0, 0, 1, 0});
  EventOutcome o = apply_event(x, {EventKind::LimitBuy, 3, 5});
  CHECK(o.which == EventCase::Fallback);
  CHECK(o.state == clear_state(perturb(x, {EventKind::LimitBuy, 3, 5})));
  CHECK_THROWS_AS(apply_event(x, {EventKind::CancelBuy, 2, 2}), Error);
}

TEST_CASE("single-event table agrees with clearing") {
  std::mt19937_64 rng(11);
  std::array<int, kEventCaseCount> hits{};
  int checked = 0;
  while (checked < 20000) {
    const int d = std::uniform_int_distribution<int>(2, 8)(rng);
    BookState x = oracle::random_two_sided_book(rng, d, 4);
    Event e{kAllEventKinds[std::uniform_int_distribution<int>(0, 3)(rng)],
            std::uniform_int_distribution<int>(1, d)(rng), std::uniform_int_distribution<Depth>(1, 6)(rng)};
    if (!event_table_applies(x, e)) continue;
    ++checked;
    EventOutcome o = apply_event(x, e);
    REQUIRE(o.which != EventCase::Fallback);
    ++hits[static_cast<int>(o.which)];
    REQUIRE(o.state == clear_state(perturb(x, e)));
    REQUIRE(ask_bid(o.state) == Quote{o.ask, o.bid});
  }
  for (int c = 0; c < kEventCaseCount - 1; ++c) CHECK(hits[c] > 100);
}

TEST_CASE("batch clearing") {
  BookState x = fig13();
  CHECK(clear_batch(x, {}).cleared == x);
  std::vector<Event> net_zero{{EventKind::LimitBuy, 6, 1}, {EventKind::CancelBuy, 6, 1}};
  CHECK(clear_batch(x, net_zero).cleared == x);
  std::vector<Event> negative{{EventKind::CancelBuy, 5, 1}};
  CHECK_THROWS_AS(clear_batch(x, negative), Error);
  std::vector<Event> crossing{{EventKind::LimitBuy, 8, 2}, {EventKind::LimitSell, 2, 1}};
  CHECK(clear_batch(x, crossing).cleared == clear_state(BookState({1, 3, 2, 1, 0, 0, 0, 2, 0}, {0, 1, 0, 0, 0, 1, 0, 3, 2})));
}
