#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lobforge/kbe.hpp"
#include "lobforge/monte_carlo.hpp"

namespace lobforge {

/// X+ = [2, 4, z1, 0, 0, 0], X- = [0, 0, 0, z2, 4, 2]: bid depth z1 at level 3,
/// ask depth z2 at level 4.
BookState canonical_origin(Depth bid_depth, Depth ask_depth);

struct CompareRow {
  Depth ask_depth = 0;
  Depth bid_depth = 0;
  Estimate mc;
  std::optional<double> kbe;
};

struct CompareOptions {
  std::vector<Depth> ask_depths{1, 2, 3, 4, 5, 6};
  std::vector<Depth> bid_depths{1, 2, 3, 4, 5, 6};
  double T = 0.2;
  double dt = 5e-4;
  double pruning_eps = 1e-8;
  McOptions mc;
  bool with_kbe = true;
};

/// Ask-increase probability at horizon T on the canonical origins, by Monte
/// Carlo and by the Kolmogorov solver; rows ordered by ask depth, then bid depth.
std::vector<CompareRow> compare_grid(const ModelPtr& model, const CompareOptions& opt);

/// Header "ask_depth,bid_depth,mc_mean,mc_std_error,mc_n,mc_timeouts,kbe";
/// an empty kbe field means the solver was skipped.
void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows);
std::vector<CompareRow> read_compare_csv(std::istream& in);

struct FirstMoveCell {
  Depth ask_depth = 0;
  Depth bid_depth = 0;
  Estimate estimate;
};

/// First-move probabilities on the canonical origins, every replication
/// seeded from opt.seed and its cell.
std::vector<FirstMoveCell> first_move_grid(const IntensityModel& model, const std::vector<Depth>& ask_depths,
                                           const std::vector<Depth>& bid_depths, const McOptions& opt);

struct MonotonicityScore {
  std::size_t ask_pairs = 0, ask_ok = 0;  // non-increasing in ask depth
  std::size_t bid_pairs = 0, bid_ok = 0;  // non-decreasing in bid depth
  double fraction() const {
    const std::size_t n = ask_pairs + bid_pairs;
    return n == 0 ? 1.0 : static_cast<double>(ask_ok + bid_ok) / static_cast<double>(n);
  }
};

/// Counts adjacent grid pairs ordered as expected; cells must form the full
/// product of the depth lists in first_move_grid order.
MonotonicityScore monotonicity(const std::vector<FirstMoveCell>& cells, std::size_t n_ask, std::size_t n_bid);

}  // namespace lobforge
