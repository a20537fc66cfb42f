#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lobforge/generator.hpp"

namespace oracle {

using lobforge::BookState;
using lobforge::CentredState;
using lobforge::IntensityModel;
using lobforge::StateFunction;
using lobforge::StateMeasure;

// Model 1 generator written term by term from its closed-form display.
double model1_generator(const lobforge::Model1Params& p, const StateFunction<BookState>& f, const BookState& x);

// Random Model 2 instance on d levels with sizes 1..m.
lobforge::ModelPtr random_model2(std::mt19937_64& rng, int d, lobforge::Depth m);

// f with random values on x and on every one-event cleared neighbour of x,
// plus a random default.
StateFunction<BookState> random_function_around(std::mt19937_64& rng, const IntensityModel& model, const BookState& x);

// Adjoint action computed target by target from the centred pre-image sets:
// inflow into y sums mu(w) * rate over every w and event whose raw outcome
// clears to y.
StateMeasure<CentredState> centred_adjoint_by_preimage(const IntensityModel& model, const StateMeasure<CentredState>& mu,
                                                       const std::vector<CentredState>& targets, lobforge::Depth cap);

// Dense matrix exponential.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

// Operator sup-norm (max absolute row sum) of the gap between
// (exp(-dt L))^N and (Xi exp(-dt L_o) C)^N with N = T / dt, on the
// admissible part of a flow truncation. L is formed as Xi L_o C.
double splitting_error(const lobforge::FlowTruncation& flow, double T, double dt);

}  // namespace oracle
