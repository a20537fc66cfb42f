#include "lobforge/monte_carlo.hpp"

#include <cmath>
#include <limits>

#include "lobforge/errors.hpp"

namespace lobforge {

namespace {

// Twice the mid price, or the ask, depending on the move semantics.
long move_price(Price ask, Price bid, MoveSemantics move) {
  return move == MoveSemantics::Ask ? static_cast<long>(ask) : static_cast<long>(ask) + static_cast<long>(bid);
}

void check_origin(const BookState& origin) {
  if (!is_admissible(origin)) throw Error(ErrorCode::PreconditionViolated, "simulation origin must be admissible");
}

template <class Outcome>
std::vector<int> run_replications(const McOptions& opt, Outcome&& outcome) {
  if (opt.reps < 2) throw Error(ErrorCode::BadParameter, "an estimate needs at least 2 replications");
  std::vector<int> out(opt.reps, 0);
  const auto n = static_cast<std::int64_t>(opt.reps);
  if (opt.exec == Execution::Parallel) {
    bool failed = false;
    Error first_error(ErrorCode::BadParameter, "");
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t r = 0; r < n; ++r) {
      try {
        RngStream rng(replication_seed(opt.seed, static_cast<std::uint64_t>(r)));
        out[static_cast<std::size_t>(r)] = outcome(rng);
      } catch (const Error& e) {
#pragma omp critical
        if (!failed) {
          failed = true;
          first_error = e;
        }
      }
    }
    if (failed) throw first_error;
  } else {
    for (std::int64_t r = 0; r < n; ++r) {
      RngStream rng(replication_seed(opt.seed, static_cast<std::uint64_t>(r)));
      out[static_cast<std::size_t>(r)] = outcome(rng);
    }
  }
  return out;
}

}  // namespace

PathRecord simulate_path(const IntensityModel& model, const BookState& origin, const StopRule& stop, RngStream& rng) {
  check_origin(origin);
  if (model.frame() != Frame::Absolute) throw Error(ErrorCode::PreconditionViolated, "simulation works in the absolute frame");
  if (stop.kind == StopKind::Horizon && !(stop.horizon >= 0.0))
    throw Error(ErrorCode::BadParameter, "horizon must be non-negative");
  PathRecord path;
  BookState x = origin;
  Quote q = ask_bid(x);
  path.times.push_back(0.0);
  path.states.push_back(x);
  path.ask.push_back(q.ask);
  path.bid.push_back(q.bid);
  const long start_price = move_price(q.ask, q.bid, stop.move);
  double t = 0.0;
  std::size_t count = 0;
  while (true) {
    if (stop.kind == StopKind::MaxEvents && count >= stop.max_events) break;
    if (stop.kind != StopKind::MaxEvents && count >= stop.max_events) {
      path.hit_event_cap = true;
      break;
    }
    const FlowContext ctx = FlowContext::of(x);
    if (stop.kind == StopKind::Horizon && total_rate(model, ctx) == 0.0) break;
    const SampledEvent ev = sample_next_event(model, ctx, rng);
    if (stop.kind == StopKind::Horizon && t + ev.wait > stop.horizon) break;
    const double next_t = t + ev.wait;
    if (!(next_t > t)) throw Error(ErrorCode::PreconditionViolated, "event times must increase strictly");
    t = next_t;
    const EventOutcome out = apply_event(x, ev.event);
    x = out.state;
    ++count;
    path.times.push_back(t);
    path.events.push_back(ev.event);
    path.states.push_back(x);
    path.ask.push_back(out.ask);
    path.bid.push_back(out.bid);
    if (stop.kind == StopKind::FirstMove && move_price(out.ask, out.bid, stop.move) != start_price) break;
  }
  path.end_time = stop.kind == StopKind::Horizon ? stop.horizon : t;
  return path;
}

std::vector<int> first_move_outcomes(const IntensityModel& model, const BookState& origin, const McOptions& opt) {
  check_origin(origin);
  StopRule stop;
  stop.kind = StopKind::FirstMove;
  stop.max_events = opt.max_events;
  stop.move = opt.move;
  const Quote q0 = ask_bid(origin);
  const long start = move_price(q0.ask, q0.bid, opt.move);
  return run_replications(opt, [&](RngStream& rng) {
    PathRecord path;
    try {
      path = simulate_path(model, origin, stop, rng);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DeadState) return -2;
      throw;
    }
    if (path.hit_event_cap) return -1;
    return move_price(path.ask.back(), path.bid.back(), opt.move) > start ? 1 : 0;
  });
}

std::vector<int> horizon_outcomes(const IntensityModel& model, const BookState& origin, double T, const McOptions& opt) {
  check_origin(origin);
  StopRule stop;
  stop.kind = StopKind::Horizon;
  stop.horizon = T;
  stop.max_events = opt.max_events;
  const Price a0 = ask_bid(origin).ask;
  return run_replications(opt, [&](RngStream& rng) {
    const PathRecord path = simulate_path(model, origin, stop, rng);
    if (path.hit_event_cap) return -1;
    return path.ask.back() > a0 ? 1 : 0;
  });
}

Estimate summarize(const std::vector<int>& outcomes, std::uint64_t seed) {
  Estimate e;
  e.seed = seed;
  double sum = 0.0, comp = 0.0;
  for (int o : outcomes) {
    if (o == -1) ++e.timeouts;
    if (o == -2) ++e.dead;
    if (o < 0) continue;
    ++e.n;
    const double y = static_cast<double>(o) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  if (e.n < 2) throw Error(ErrorCode::InsufficientData, "fewer than 2 replications completed");
  const double n = static_cast<double>(e.n);
  e.mean = sum / n;
  // For 0/1 outcomes the sample variance is n / (n - 1) * p (1 - p).
  const double var = n / (n - 1.0) * e.mean * (1.0 - e.mean);
  e.std_error = std::sqrt(var / n);
  return e;
}

Estimate estimate_first_move(const IntensityModel& model, const BookState& origin, const McOptions& opt) {
  return summarize(first_move_outcomes(model, origin, opt), opt.seed);
}

Estimate estimate_horizon(const IntensityModel& model, const BookState& origin, double T, const McOptions& opt) {
  return summarize(horizon_outcomes(model, origin, T, opt), opt.seed);
}

}  // namespace lobforge
