#pragma once

#include <cstdint>
#include <vector>

#include "lobforge/book.hpp"
#include "lobforge/kbe.hpp"
#include "lobforge/matching.hpp"
#include "lobforge/order_flow.hpp"
#include "lobforge/rng.hpp"

namespace lobforge {

enum class StopKind { Horizon, FirstMove, MaxEvents };

/// Which price defines the first price movement.
enum class MoveSemantics { Ask, Mid };

struct StopRule {
  StopKind kind = StopKind::Horizon;
  double horizon = 0.0;                  // Horizon
  std::size_t max_events = 1'000'000;    // hard cap for every kind; the MaxEvents target
  MoveSemantics move = MoveSemantics::Ask;
};

/// states[0] is the origin at times[0] = 0; events[k - 1] takes states[k - 1]
/// to states[k] at times[k]. end_time is the horizon for Horizon stops and the
/// last event time otherwise.
struct PathRecord {
  std::vector<double> times;
  std::vector<Event> events;
  std::vector<BookState> states;
  std::vector<Price> ask;
  std::vector<Price> bid;
  double end_time = 0.0;
  bool hit_event_cap = false;  // stopped by max_events before the stop condition
};

/// Event-driven simulation with clearing after every event. Under a Horizon
/// stop a state with zero total rate is held until the horizon; under the
/// other stops it throws DeadState.
PathRecord simulate_path(const IntensityModel& model, const BookState& origin, const StopRule& stop, RngStream& rng);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;               // replications entering the mean
  std::uint64_t seed = 0;
  std::size_t timeouts = 0;        // replications that hit the event budget
  std::size_t dead = 0;            // first-move replications stuck in a zero-rate state
};

struct McOptions {
  std::size_t reps = 500;
  std::uint64_t seed = 1;
  std::size_t max_events = 1'000'000;
  MoveSemantics move = MoveSemantics::Ask;
  Execution exec = Execution::Parallel;
};

/// Success = the ask (or mid) is above its initial value when it first changes.
Estimate estimate_first_move(const IntensityModel& model, const BookState& origin, const McOptions& opt);

/// Success = a(X_T) > a(origin).
Estimate estimate_horizon(const IntensityModel& model, const BookState& origin, double T, const McOptions& opt);

/// Per-replication outcome: 1 success, 0 failure, -1 timeout, -2 dead.
std::vector<int> first_move_outcomes(const IntensityModel& model, const BookState& origin, const McOptions& opt);
std::vector<int> horizon_outcomes(const IntensityModel& model, const BookState& origin, double T, const McOptions& opt);

/// Mean and standard error of the 0/1 outcomes, compensated summation in
/// replication order; negative outcomes are counted and excluded.
Estimate summarize(const std::vector<int>& outcomes, std::uint64_t seed);

}  // namespace lobforge
