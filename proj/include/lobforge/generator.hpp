#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "lobforge/book.hpp"
#include "lobforge/centred.hpp"
#include "lobforge/errors.hpp"
#include "lobforge/matching.hpp"
#include "lobforge/order_flow.hpp"

namespace lobforge {

template <class State>
struct FrameTraits;

template <>
struct FrameTraits<BookState> {
  using Hash = BookStateHash;
  static constexpr Frame frame = Frame::Absolute;
  static FlowContext context(const BookState& x) { return FlowContext::of(x); }
  static BookState perturbed(const BookState& x, const Event& e) {
    BookState y = x;
    perturb_in_place(y.buy, y.sell, static_cast<std::size_t>(e.price - 1), e.kind, e.size);
    return y;
  }
  static BookState cleared(const IntensityModel&, const BookState& y) { return clear_state(y); }
  static bool admissible(const BookState& x) { return is_admissible(x); }
};

template <>
struct FrameTraits<CentredState> {
  using Hash = CentredStateHash;
  static constexpr Frame frame = Frame::Centred;
  static FlowContext context(const CentredState& x) { return FlowContext::of(x); }
  static CentredState perturbed(const CentredState& x, const Event& e) {
    CentredState y = x;
    perturb_in_place(y.buy, y.sell, static_cast<std::size_t>(e.price + x.d_prime), e.kind, e.size);
    return y;
  }
  static CentredState cleared(const IntensityModel& model, const CentredState& y) {
    return model.after_clearing(clear_centred(y));
  }
  static bool admissible(const CentredState& x) { return is_centred_admissible(x); }
};

/// Function on states: explicit values plus a default for every other state.
template <class State>
struct StateFunction {
  std::unordered_map<State, double, typename FrameTraits<State>::Hash> values;
  double default_value = 0.0;

  double operator()(const State& x) const {
    const auto it = values.find(x);
    return it == values.end() ? default_value : it->second;
  }
  void set(const State& x, double v) { values[x] = v; }
  double sup_norm() const {
    double s = std::abs(default_value);
    for (const auto& [x, v] : values) s = std::max(s, std::abs(v));
    return s;
  }
};

/// Finitely supported signed measure on states.
template <class State>
struct StateMeasure {
  std::unordered_map<State, double, typename FrameTraits<State>::Hash> mass;

  double operator()(const State& x) const {
    const auto it = mass.find(x);
    return it == mass.end() ? 0.0 : it->second;
  }
  void add(const State& x, double v) { mass[x] += v; }
  double total_mass() const {
    double s = 0.0;
    for (const auto& [x, v] : mass) s += v;
    return s;
  }
};

/// <f, mu> over the support of mu.
template <class State>
double pairing(const StateFunction<State>& f, const StateMeasure<State>& mu) {
  double s = 0.0;
  for (const auto& [x, m] : mu.mass) s += f(x) * m;
  return s;
}

template <class State>
struct Transition {
  State successor;
  double rate = 0.0;
  std::vector<Event> events;  // flow events merged into this successor
};

template <class State>
struct TransitionDistribution {
  std::vector<Transition<State>> transitions;  // in order of first occurrence
  double total_rate = 0.0;
};

/// Order-flow generator: sum of rate * (f(x + event) - f(x)), before clearing.
template <class State>
double apply_Lo(const IntensityModel& model, const StateFunction<State>& f, const State& x) {
  using T = FrameTraits<State>;
  const double fx = f(x);
  double sum = 0.0;
  model.for_each_rate(T::context(x), [&](const Event& e, double r) { sum += r * (f(T::perturbed(x, e)) - fx); });
  return sum;
}

/// Order-book generator, computed as the order-flow generator applied to f
/// composed with clearing.
template <class State>
double apply_L(const IntensityModel& model, const StateFunction<State>& f, const State& x) {
  using T = FrameTraits<State>;
  const double fx = f(x);
  double sum = 0.0;
  model.for_each_rate(T::context(x), [&](const Event& e, double r) {
    sum += r * (f(T::cleared(model, T::perturbed(x, e))) - fx);
  });
  return sum;
}

/// Closed form of the order-book generator from the cumulative profile,
/// without calling the matching engine. Throws PreconditionViolated unless the
/// state is admissible with both sides non-empty.
double apply_L_explicit(const IntensityModel& model, const StateFunction<BookState>& f, const BookState& x);

template <class State>
TransitionDistribution<State> transition_distribution(const IntensityModel& model, const State& x) {
  using T = FrameTraits<State>;
  TransitionDistribution<State> out;
  std::unordered_map<State, std::size_t, typename T::Hash> slot;
  model.for_each_rate(T::context(x), [&](const Event& e, double r) {
    State y = T::cleared(model, T::perturbed(x, e));
    out.total_rate += r;
    const auto [it, fresh] = slot.try_emplace(y, out.transitions.size());
    if (fresh) {
      out.transitions.push_back({std::move(y), r, {e}});
    } else {
      out.transitions[it->second].rate += r;
      out.transitions[it->second].events.push_back(e);
    }
  });
  return out;
}

/// Forward action on a measure: outflow -total_rate(x) mu(x) at x and inflow
/// rate * mu(x) at every successor.
template <class State>
StateMeasure<State> apply_L_adjoint(const IntensityModel& model, const StateMeasure<State>& mu) {
  StateMeasure<State> out;
  for (const auto& [x, m] : mu.mass) {
    const auto dist = transition_distribution(model, x);
    out.add(x, -dist.total_rate * m);
    for (const auto& t : dist.transitions) out.add(t.successor, t.rate * m);
  }
  return out;
}

struct TruncationCaps {
  Depth max_depth = 2;         // events whose raw outcome exceeds this depth anywhere are dropped
  std::size_t max_states = 20000;
  long max_mid_shift = 2;      // centred frame: successors with |p - p_seed| above this are dropped
};

/// Finite generator matrix on a closed set of admissible states. Q is
/// row-major with Q[i * n + j] the jump rate from states[i] to states[j] and
/// the diagonal set so that every row sums to zero, so (Q f)_i = Lf(states[i])
/// whenever dropped_rate[i] = 0.
template <class State>
struct Truncation {
  std::vector<State> states;
  std::unordered_map<State, std::size_t, typename FrameTraits<State>::Hash> index;
  std::vector<double> Q;
  std::vector<double> dropped_rate;

  std::size_t size() const { return states.size(); }
  double at(std::size_t i, std::size_t j) const { return Q[i * states.size() + j]; }
};

namespace detail {
inline bool within_depth(const Side& buy, const Side& sell, Depth cap) {
  for (std::size_t k = 0; k < buy.size(); ++k)
    if (buy[k] > cap || sell[k] > cap) return false;
  return true;
}
inline bool within_mid_shift(const BookState&, const BookState&, long) { return true; }
inline bool within_mid_shift(const CentredState& y, const CentredState& seed, long cap) {
  return std::abs(y.p - seed.p) <= cap;
}
}  // namespace detail

/// Breadth-first closure from `seed` under the order-book dynamics. States
/// are numbered in discovery order. Throws BudgetExceeded past max_states.
template <class State>
Truncation<State> enumerate_truncation(const IntensityModel& model, const State& seed, const TruncationCaps& caps) {
  using T = FrameTraits<State>;
  if (!T::admissible(seed)) throw Error(ErrorCode::PreconditionViolated, "truncation seed must be admissible");
  Truncation<State> tr;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  auto intern = [&](const State& y) {
    const auto [it, fresh] = tr.index.try_emplace(y, tr.states.size());
    if (fresh) {
      if (tr.states.size() >= caps.max_states) throw Error(ErrorCode::BudgetExceeded, "truncation exceeded max_states");
      tr.states.push_back(y);
    }
    return it->second;
  };
  intern(seed);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const State x = tr.states[i];
    std::vector<std::pair<std::size_t, double>> row;
    double dropped = 0.0;
    model.for_each_rate(T::context(x), [&](const Event& e, double r) {
      const State raw = T::perturbed(x, e);
      if (!detail::within_depth(raw.buy, raw.sell, caps.max_depth)) {
        dropped += r;
        return;
      }
      State y = T::cleared(model, raw);
      if (!detail::within_mid_shift(y, seed, caps.max_mid_shift)) {
        dropped += r;
        return;
      }
      row.emplace_back(intern(y), r);
    });
    rows.push_back(std::move(row));
    tr.dropped_rate.push_back(dropped);
  }
  const std::size_t n = tr.states.size();
  tr.Q.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, r] : rows[i]) {
      tr.Q[i * n + j] += r;
      tr.Q[i * n + i] -= r;
    }
  return tr;
}

/// Order-flow generator on every book with d levels and depths in 0..cap,
/// crossed configurations included. Events leaving the box are dropped, so
/// restricted to admissible rows Q_o composed with clearing reproduces the
/// truncated order-book generator with the same caps.
struct FlowTruncation {
  std::vector<BookState> states;
  std::unordered_map<BookState, std::size_t, BookStateHash> index;
  std::vector<double> Q_o;               // row-major, rows sum to zero
  std::vector<std::size_t> clear_index;  // index of clear(states[i])
  std::vector<std::size_t> admissible;   // indices of admissible states, ascending
  std::size_t size() const { return states.size(); }
};

FlowTruncation flow_truncation(const IntensityModel& model, int d, Depth cap);

/// Edge list "src,dst,rate" of the off-diagonal entries.
template <class State>
void write_truncation_edges(std::ostream& out, const Truncation<State>& tr) {
  out << "src,dst,rate\n";
  const std::size_t n = tr.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && tr.Q[i * n + j] != 0.0) out << i << ',' << j << ',' << tr.Q[i * n + j] << '\n';
}

/// State table "index,buy,sell" with depths joined by spaces.
void write_truncation_states(std::ostream& out, const Truncation<BookState>& tr);

}  // namespace lobforge
