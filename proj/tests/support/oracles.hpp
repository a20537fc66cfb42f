#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lobforge/book.hpp"

namespace oracle {

using lobforge::BookState;
using lobforge::Depth;
using lobforge::Side;

// Every book with d levels per side and each entry in 0..cap.
std::vector<BookState> all_books(int d, Depth cap);

// Every depth array of length n with entries in 0..cap.
std::vector<Side> all_sides(int n, Depth cap);

// Ask and bid straight from the definitions, with the d+1 / 0 conventions.
lobforge::Quote quote(const BookState& x);

Depth cum_buy_above(const BookState& x, int k);
Depth cum_sell_below(const BookState& x, int k);

// Unit-by-unit matching: the highest buy meets the lowest sell while the buy
// price is at least the sell price.
BookState greedy_clear(const BookState& x);

}  // namespace oracle

#include <random>

namespace oracle {

// Random admissible book with both sides non-empty.
BookState random_two_sided_book(std::mt19937_64& rng, int d, Depth max_depth);

}  // namespace oracle
