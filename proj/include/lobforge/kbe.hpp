#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "lobforge/book.hpp"
#include "lobforge/generator.hpp"
#include "lobforge/order_flow.hpp"

namespace lobforge {

using Terminal = std::function<double(const BookState&)>;

struct KbeProblem {
  ModelPtr model;
  Terminal terminal;
  double terminal_default = 0.0;  // value of the iterate outside the explored set
  double T = 0.2;
  double dt = 5e-4;
  BookState origin;
  double pruning_eps = 1e-8;
  std::size_t max_states = 30'000'000;
};

/// N_T = T / dt rounded to the nearest integer. Throws BadParameter unless
/// T > 0 and 0 < dt <= T.
int step_count(double T, double dt);

/// 1{a(X) > a(origin)}.
Terminal ask_increase_indicator(const BookState& origin);

enum class Execution { Serial, Parallel };

struct KbeDiagnostics {
  int steps = 0;                   // N_T
  double uniform_rate = 0.0;       // Lambda of the uniformized jump chain
  double max_total_rate = 0.0;     // largest total rate met while exploring
  std::size_t jumps = 0;           // number of jump-chain powers kept
  std::size_t explored_states = 0; // states whose transitions were generated
  std::size_t interned_states = 0; // explored states plus their successors
  std::size_t transitions = 0;
  std::size_t peak_support = 0;
  double pruned_mass = 0.0;        // mass dropped below pruning_eps, summed over powers
  double truncated_weight = 0.0;   // binomial weight beyond the last kept power
  double seconds = 0.0;
};

/// s_j = <delta_origin K^j, f> for the uniformized jump chain K = I + L / Lambda,
/// with Lambda the largest total rate among explored states. Mass below
/// pruning_eps is dropped after every power. The series does not depend on dt.
struct JumpSeries {
  double uniform_rate = 0.0;
  std::vector<double> s;
  KbeDiagnostics diagnostics;
};

/// Expands powers until the Poisson(Lambda * T) tail beyond them is below 1e-13.
JumpSeries jump_series(const KbeProblem& problem, Execution exec = Execution::Parallel);

/// Forward Euler value at the origin: sum_j Binom(N_T, j; Lambda dt) s_j.
/// Throws StabilityViolated when dt * max total rate >= 1.
double euler_value(const JumpSeries& series, double T, double dt, double* truncated_weight = nullptr);

/// Euler estimate of E[f(X_T) | X_0 = origin] through the jump series.
double origin_value(const KbeProblem& problem, KbeDiagnostics* diagnostics = nullptr);

double ask_increase_probability(const ModelPtr& model, const BookState& origin, double T, double dt,
                                double pruning_eps = 1e-8, KbeDiagnostics* diagnostics = nullptr);

/// Explored state set with its generator rows in compressed form. States
/// with index < expanded have their transitions listed; the rest are
/// successors left unexpanded and take the terminal default.
struct ExploredSet {
  std::vector<BookState> states;
  std::size_t expanded = 0;
  std::vector<std::size_t> row_begin;  // size expanded + 1
  std::vector<std::uint32_t> successor;
  std::vector<double> rate;
  std::vector<double> total_rate;      // per expanded state
  KbeDiagnostics diagnostics;
};

/// States reached by the uniformized jump chain with mass >= pruning_eps.
ExploredSet explore(const KbeProblem& problem, Execution exec = Execution::Parallel);

struct KbeSolution {
  StateFunction<BookState> u;  // u(0, .) on the expanded states
  KbeDiagnostics diagnostics;
};

/// Forward Euler iteration w <- w + dt L w for N_T steps on the explored set.
/// Throws StabilityViolated when dt * max total rate >= 1.
KbeSolution solve(const KbeProblem& problem, Execution exec = Execution::Parallel);

/// One backward Euler sweep on a prepared explored set; exposed for
/// benchmarking the kernel.
void euler_sweep(const ExploredSet& set, const std::vector<double>& w, std::vector<double>& out, double dt,
                 double outside, Execution exec);

struct ConvergencePoint {
  double dt = 0.0;
  double value = 0.0;
  double error = 0.0;
};

/// Err(dt) = |value(dt) - value(dt_min)| for each dt, all from one jump series.
std::vector<ConvergencePoint> convergence_study(const KbeProblem& problem, const std::vector<double>& dts,
                                                double dt_min, KbeDiagnostics* diagnostics = nullptr);

/// Least-squares slope of log Err against log dt over points with Err > 0.
double loglog_slope(const std::vector<ConvergencePoint>& points);

}  // namespace lobforge
