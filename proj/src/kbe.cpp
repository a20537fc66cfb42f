#include "lobforge/kbe.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>

#include <absl/container/flat_hash_map.h>

#include "lobforge/errors.hpp"
#include "lobforge/matching.hpp"

namespace lobforge {

int step_count(double T, double dt) {
  if (!(T >= 0.0) || !(dt > 0.0) || (T > 0.0 && dt > T * (1.0 + 1e-12)))
    throw Error(ErrorCode::BadParameter, "KBE needs T >= 0 and 0 < dt <= T");
  return static_cast<int>(std::lround(T / dt));
}

Terminal ask_increase_indicator(const BookState& origin) {
  const Price a0 = ask_bid(origin).ask;
  return [a0](const BookState& x) { return inf_support(x.sell) > a0 ? 1.0 : 0.0; };
}

namespace {

// Book packed into 32 bytes: one byte per level, buy side first.
struct PackedBook {
  std::array<std::uint64_t, 4> words{};
  bool operator==(const PackedBook&) const = default;
  template <typename H>
  friend H AbslHashValue(H h, const PackedBook& p) {
    return H::combine(std::move(h), p.words[0], p.words[1], p.words[2], p.words[3]);
  }
};

constexpr int kMaxLevels = 16;
constexpr Depth kMaxPackedDepth = 255;

PackedBook pack(const BookState& x) {
  PackedBook p;
  unsigned char bytes[32] = {};
  const int d = x.d();
  for (int k = 0; k < d; ++k) {
    if (x.buy[k] > kMaxPackedDepth || x.sell[k] > kMaxPackedDepth)
      throw Error(ErrorCode::BudgetExceeded, "queue depth above 255 in the KBE state store");
    bytes[k] = static_cast<unsigned char>(x.buy[k]);
    bytes[kMaxLevels + k] = static_cast<unsigned char>(x.sell[k]);
  }
  std::memcpy(p.words.data(), bytes, sizeof bytes);
  return p;
}

BookState unpack(const PackedBook& p, int d) {
  unsigned char bytes[32];
  std::memcpy(bytes, p.words.data(), sizeof bytes);
  BookState x(d);
  for (int k = 0; k < d; ++k) {
    x.buy[k] = bytes[k];
    x.sell[k] = bytes[kMaxLevels + k];
  }
  return x;
}

struct Row {
  std::vector<PackedBook> successors;
  std::vector<double> rates;
  double total = 0.0;
};

// Transitions of one state with successors merged, in for_each_rate order of
// first occurrence.
Row expand_row(const IntensityModel& model, const BookState& x) {
  Row row;
  const FlowContext ctx = FlowContext::of(x);
  const BookProfile prof = profile(x);
  model.for_each_rate(ctx, [&](const Event& e, double r) {
    row.total += r;
    const PackedBook y = pack(apply_event(x, prof, e).state);
    for (std::size_t i = 0; i < row.successors.size(); ++i)
      if (row.successors[i] == y) {
        row.rates[i] += r;
        return;
      }
    row.successors.push_back(y);
    row.rates.push_back(r);
  });
  return row;
}

// Interned states with lazily generated generator rows.
class StateStore {
 public:
  StateStore(const KbeProblem& problem) : problem_(problem), d_(problem.origin.d()) {
    if (d_ > kMaxLevels) throw Error(ErrorCode::BudgetExceeded, "KBE state store supports at most 16 levels");
  }

  std::uint32_t intern(const PackedBook& p) {
    const auto [it, fresh] = index_.try_emplace(p, static_cast<std::uint32_t>(keys_.size()));
    if (fresh) {
      if (keys_.size() >= problem_.max_states) throw Error(ErrorCode::BudgetExceeded, "KBE explored set exceeded max_states");
      keys_.push_back(p);
      row_start_.push_back(kUnexpanded);
      row_len_.push_back(0);
      total_.push_back(0.0);
      f_.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return it->second;
  }

  bool expanded(std::uint32_t id) const { return row_start_[id] != kUnexpanded; }

  // Generates rows for every listed state that lacks one.
  void expand(const std::vector<std::uint32_t>& ids, Execution exec) {
    std::vector<std::uint32_t> todo;
    for (std::uint32_t id : ids)
      if (!expanded(id)) todo.push_back(id);
    std::vector<Row> rows(todo.size());
    const auto n = static_cast<std::int64_t>(todo.size());
    const IntensityModel& model = *problem_.model;
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
      for (std::int64_t i = 0; i < n; ++i) rows[i] = expand_row(model, unpack(keys_[todo[i]], d_));
    } else {
      for (std::int64_t i = 0; i < n; ++i) rows[i] = expand_row(model, unpack(keys_[todo[i]], d_));
    }
    for (std::size_t i = 0; i < todo.size(); ++i) {
      const std::uint32_t id = todo[i];
      row_start_[id] = successor_.size();
      row_len_[id] = static_cast<std::uint32_t>(rows[i].successors.size());
      total_[id] = rows[i].total;
      max_rate_ = std::max(max_rate_, rows[i].total);
      ++expanded_count_;
      for (std::size_t k = 0; k < rows[i].successors.size(); ++k) {
        successor_.push_back(intern(rows[i].successors[k]));
        rate_.push_back(rows[i].rates[k]);
      }
    }
  }

  double f(std::uint32_t id) {
    if (std::isnan(f_[id])) f_[id] = problem_.terminal(unpack(keys_[id], d_));
    return f_[id];
  }

  std::size_t size() const { return keys_.size(); }
  std::size_t expanded_count() const { return expanded_count_; }
  double max_rate() const { return max_rate_; }
  double total(std::uint32_t id) const { return total_[id]; }
  std::size_t row_start(std::uint32_t id) const { return row_start_[id]; }
  std::uint32_t row_len(std::uint32_t id) const { return row_len_[id]; }
  std::uint32_t successor(std::size_t k) const { return successor_[k]; }
  double rate(std::size_t k) const { return rate_[k]; }
  std::size_t transitions() const { return successor_.size(); }
  BookState state(std::uint32_t id) const { return unpack(keys_[id], d_); }

 private:
  static constexpr std::size_t kUnexpanded = std::numeric_limits<std::size_t>::max();
  const KbeProblem& problem_;
  int d_;
  absl::flat_hash_map<PackedBook, std::uint32_t> index_;
  std::vector<PackedBook> keys_;
  std::vector<std::size_t> row_start_;
  std::vector<std::uint32_t> row_len_;
  std::vector<double> total_;
  std::vector<double> f_;
  std::vector<std::uint32_t> successor_;
  std::vector<double> rate_;
  std::size_t expanded_count_ = 0;
  double max_rate_ = 0.0;
};

// Smallest J with Poisson(mean) mass above J below tol.
std::size_t poisson_cutoff(double mean, double tol) {
  if (mean <= 0.0) return 0;
  double log_p = -mean;
  double cdf = std::exp(log_p);
  std::size_t j = 0;
  while (1.0 - cdf > tol && j < 1'000'000) {
    ++j;
    log_p += std::log(mean) - std::log(static_cast<double>(j));
    cdf += std::exp(log_p);
  }
  return j;
}

void check_problem(const KbeProblem& p) {
  if (!p.model) throw Error(ErrorCode::BadParameter, "KBE problem needs a model");
  if (p.model->frame() != Frame::Absolute) throw Error(ErrorCode::PreconditionViolated, "KBE solver works in the absolute frame");
  if (!p.terminal) throw Error(ErrorCode::BadParameter, "KBE problem needs a terminal function");
  if (!is_admissible(p.origin)) throw Error(ErrorCode::PreconditionViolated, "KBE origin must be admissible");
  if (!(p.pruning_eps >= 0.0)) throw Error(ErrorCode::BadParameter, "pruning_eps must be non-negative");
  step_count(p.T, p.dt);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Propagation {
  std::vector<double> s;
  double uniform_rate = 0.0;
  double pruned_mass = 0.0;
  std::size_t peak_support = 0;
};

// Pushes the origin's mass through powers of K = I + L / lambda. Returns
// false, leaving `out` partial, when a state's total rate exceeds lambda.
bool propagate(StateStore& store, std::uint32_t origin, double lambda, double T, double eps, Execution exec,
               Propagation& out) {
  out = Propagation{};
  out.uniform_rate = lambda;
  const std::size_t jmax = poisson_cutoff(lambda * T, 1e-13);
  std::vector<double> cur(store.size(), 0.0), next;
  std::vector<std::uint32_t> active{origin}, touched;
  cur[origin] = 1.0;
  out.s.push_back(store.f(origin));
  for (std::size_t j = 1; j <= jmax; ++j) {
    store.expand(active, exec);
    for (std::uint32_t id : active)
      if (store.total(id) > lambda * (1.0 + 1e-12)) return false;
    next.assign(store.size(), 0.0);
    cur.resize(store.size(), 0.0);
    touched.clear();
    auto add = [&](std::uint32_t id, double m) {
      if (next[id] == 0.0) touched.push_back(id);
      next[id] += m;
    };
    for (std::uint32_t id : active) {
      const double m = cur[id];
      const double stay = 1.0 - store.total(id) / lambda;
      if (stay > 0.0) add(id, m * stay);
      const std::size_t b = store.row_start(id);
      for (std::size_t k = b; k < b + store.row_len(id); ++k) add(store.successor(k), m * store.rate(k) / lambda);
    }
    for (std::uint32_t id : active) cur[id] = 0.0;
    active.clear();
    double sj = 0.0;
    for (std::uint32_t id : touched) {
      const double m = next[id];
      if (m < eps) {
        out.pruned_mass += m;
        continue;
      }
      active.push_back(id);
      sj += m * store.f(id);
    }
    out.s.push_back(sj);
    out.peak_support = std::max(out.peak_support, active.size());
    std::swap(cur, next);
    for (std::uint32_t id : touched)
      if (cur[id] < eps) cur[id] = 0.0;
    if (active.empty()) break;
  }
  return true;
}

// Runs the propagation with lambda raised to the largest total rate met.
Propagation run_series(const KbeProblem& problem, StateStore& store, std::uint32_t origin, Execution exec) {
  store.expand({origin}, exec);
  double lambda = std::max(store.max_rate(), 1e-300);
  Propagation prop;
  while (!propagate(store, origin, lambda, problem.T, problem.pruning_eps, exec, prop)) lambda = store.max_rate();
  return prop;
}

}  // namespace

JumpSeries jump_series(const KbeProblem& problem, Execution exec) {
  check_problem(problem);
  const auto t0 = std::chrono::steady_clock::now();
  StateStore store(problem);
  const std::uint32_t origin = store.intern(pack(problem.origin));
  const Propagation prop = run_series(problem, store, origin, exec);
  JumpSeries out;
  out.uniform_rate = prop.uniform_rate;
  out.s = prop.s;
  KbeDiagnostics& dg = out.diagnostics;
  dg.steps = step_count(problem.T, problem.dt);
  dg.uniform_rate = prop.uniform_rate;
  dg.max_total_rate = store.max_rate();
  dg.jumps = prop.s.size();
  dg.explored_states = store.expanded_count();
  dg.interned_states = store.size();
  dg.transitions = store.transitions();
  dg.peak_support = prop.peak_support;
  dg.pruned_mass = prop.pruned_mass;
  dg.seconds = seconds_since(t0);
  return out;
}

double euler_value(const JumpSeries& series, double T, double dt, double* truncated_weight) {
  const int N = step_count(T, dt);
  const double lambda = series.uniform_rate;
  if (dt * series.diagnostics.max_total_rate >= 1.0)
    throw Error(ErrorCode::StabilityViolated, "dt * max total rate = " + std::to_string(dt * series.diagnostics.max_total_rate) + " >= 1");
  const double q = lambda * dt;
  if (q > 1.0) throw Error(ErrorCode::StabilityViolated, "uniform rate times dt exceeds 1");
  double value = 0.0, weight_sum = 0.0;
  const std::size_t jmax = std::min<std::size_t>(series.s.size() - 1, static_cast<std::size_t>(N));
  for (std::size_t j = 0; j <= jmax; ++j) {
    double w;
    if (q == 0.0) {
      w = j == 0 ? 1.0 : 0.0;
    } else if (q == 1.0) {
      w = static_cast<int>(j) == N ? 1.0 : 0.0;
    } else {
      const double jd = static_cast<double>(j);
      w = std::exp(std::lgamma(N + 1.0) - std::lgamma(jd + 1.0) - std::lgamma(N - jd + 1.0) + jd * std::log(q) +
                   (N - jd) * std::log1p(-q));
    }
    value += w * series.s[j];
    weight_sum += w;
  }
  if (truncated_weight) *truncated_weight = std::max(0.0, 1.0 - weight_sum);
  return value;
}

double origin_value(const KbeProblem& problem, KbeDiagnostics* diagnostics) {
  const JumpSeries series = jump_series(problem);
  double truncated = 0.0;
  const double v = euler_value(series, problem.T, problem.dt, &truncated);
  if (diagnostics) {
    *diagnostics = series.diagnostics;
    diagnostics->truncated_weight = truncated;
  }
  return v;
}

double ask_increase_probability(const ModelPtr& model, const BookState& origin, double T, double dt, double pruning_eps,
                                KbeDiagnostics* diagnostics) {
  KbeProblem p;
  p.model = model;
  p.terminal = ask_increase_indicator(origin);
  p.T = T;
  p.dt = dt;
  p.origin = origin;
  p.pruning_eps = pruning_eps;
  return origin_value(p, diagnostics);
}

ExploredSet explore(const KbeProblem& problem, Execution exec) {
  check_problem(problem);
  const auto t0 = std::chrono::steady_clock::now();
  StateStore store(problem);
  const std::uint32_t origin = store.intern(pack(problem.origin));
  const Propagation prop = run_series(problem, store, origin, exec);

  // Renumber: expanded states first, in discovery order.
  const auto n = static_cast<std::uint32_t>(store.size());
  std::vector<std::uint32_t> order, position(n);
  for (std::uint32_t id = 0; id < n; ++id)
    if (store.expanded(id)) order.push_back(id);
  const std::size_t expanded = order.size();
  for (std::uint32_t id = 0; id < n; ++id)
    if (!store.expanded(id)) order.push_back(id);
  for (std::uint32_t i = 0; i < n; ++i) position[order[i]] = i;

  ExploredSet set;
  set.expanded = expanded;
  set.states.reserve(n);
  for (std::uint32_t id : order) set.states.push_back(store.state(id));
  set.row_begin.push_back(0);
  for (std::size_t i = 0; i < expanded; ++i) {
    const std::uint32_t id = order[i];
    const std::size_t b = store.row_start(id);
    for (std::size_t k = b; k < b + store.row_len(id); ++k) {
      if (store.successor(k) == id) continue;  // self-loops cancel in L
      set.successor.push_back(position[store.successor(k)]);
      set.rate.push_back(store.rate(k));
    }
    set.row_begin.push_back(set.successor.size());
    set.total_rate.push_back(store.total(id));
  }
  KbeDiagnostics& dg = set.diagnostics;
  dg.steps = step_count(problem.T, problem.dt);
  dg.uniform_rate = prop.uniform_rate;
  dg.max_total_rate = store.max_rate();
  dg.jumps = prop.s.size();
  dg.explored_states = expanded;
  dg.interned_states = n;
  dg.transitions = set.successor.size();
  dg.peak_support = prop.peak_support;
  dg.pruned_mass = prop.pruned_mass;
  dg.seconds = seconds_since(t0);
  return set;
}

void euler_sweep(const ExploredSet& set, const std::vector<double>& w, std::vector<double>& out, double dt,
                 double outside, Execution exec) {
  const auto n = static_cast<std::int64_t>(set.expanded);
  out.resize(w.size());
  auto update = [&](std::int64_t i) {
    const double wi = w[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (std::size_t k = set.row_begin[i]; k < set.row_begin[i + 1]; ++k) {
      const std::uint32_t j = set.successor[k];
      const double wj = j < set.expanded ? w[j] : outside;
      acc += set.rate[k] * (wj - wi);
    }
    out[static_cast<std::size_t>(i)] = wi + dt * acc;
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) update(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) update(i);
  }
}

KbeSolution solve(const KbeProblem& problem, Execution exec) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExploredSet set = explore(problem, exec);
  const int N = step_count(problem.T, problem.dt);
  if (problem.dt * set.diagnostics.max_total_rate >= 1.0)
    throw Error(ErrorCode::StabilityViolated,
                "dt * max total rate = " + std::to_string(problem.dt * set.diagnostics.max_total_rate) + " >= 1");
  std::vector<double> w(set.expanded), next(set.expanded);
  for (std::size_t i = 0; i < set.expanded; ++i) w[i] = problem.terminal(set.states[i]);
  for (int n = 0; n < N; ++n) {
    euler_sweep(set, w, next, problem.dt, problem.terminal_default, exec);
    std::swap(w, next);
  }
  KbeSolution sol;
  sol.u.default_value = problem.terminal_default;
  for (std::size_t i = 0; i < set.expanded; ++i) sol.u.set(set.states[i], w[i]);
  sol.diagnostics = set.diagnostics;
  sol.diagnostics.seconds = seconds_since(t0);
  return sol;
}

std::vector<ConvergencePoint> convergence_study(const KbeProblem& problem, const std::vector<double>& dts, double dt_min,
                                                KbeDiagnostics* diagnostics) {
  for (double dt : dts)
    if (!(dt_min <= dt)) throw Error(ErrorCode::BadParameter, "dt_min must not exceed any dt in the study");
  const JumpSeries series = jump_series(problem);
  const double reference = euler_value(series, problem.T, dt_min);
  std::vector<ConvergencePoint> out;
  for (double dt : dts) {
    const double v = euler_value(series, problem.T, dt);
    out.push_back({dt, v, std::abs(v - reference)});
  }
  if (diagnostics) *diagnostics = series.diagnostics;
  return out;
}

double loglog_slope(const std::vector<ConvergencePoint>& points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : points) {
    if (!(p.error > 0.0)) continue;
    const double x = std::log(p.dt), y = std::log(p.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw Error(ErrorCode::PreconditionViolated, "slope needs two points with positive error");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace lobforge
