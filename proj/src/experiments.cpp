#include "lobforge/experiments.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "lobforge/book_io.hpp"
#include "lobforge/errors.hpp"

namespace lobforge {

BookState canonical_origin(Depth bid_depth, Depth ask_depth) {
  return BookState(Side{2, 4, bid_depth, 0, 0, 0}, Side{0, 0, 0, ask_depth, 4, 2});
}

namespace {

std::uint64_t cell_seed(std::uint64_t seed, Depth ask, Depth bid) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ask) << 32 | static_cast<std::uint64_t>(bid)));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<CompareRow> compare_grid(const ModelPtr& model, const CompareOptions& opt) {
  std::vector<CompareRow> rows;
  for (Depth a : opt.ask_depths)
    for (Depth b : opt.bid_depths) {
      const BookState x0 = canonical_origin(b, a);
      CompareRow row;
      row.ask_depth = a;
      row.bid_depth = b;
      McOptions mc = opt.mc;
      mc.seed = cell_seed(opt.mc.seed, a, b);
      row.mc = estimate_horizon(*model, x0, opt.T, mc);
      row.mc.seed = opt.mc.seed;
      if (opt.with_kbe) row.kbe = ask_increase_probability(model, x0, opt.T, opt.dt, opt.pruning_eps);
      rows.push_back(row);
    }
  return rows;
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << "ask_depth,bid_depth,mc_mean,mc_std_error,mc_n,mc_timeouts,kbe\n";
  for (const auto& r : rows) {
    out << r.ask_depth << ',' << r.bid_depth << ',' << fmt(r.mc.mean) << ',' << fmt(r.mc.std_error) << ',' << r.mc.n
        << ',' << r.mc.timeouts << ',' << (r.kbe ? fmt(*r.kbe) : std::string()) << '\n';
  }
}

std::vector<CompareRow> read_compare_csv(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line) || line.rfind("ask_depth,bid_depth", 0) != 0) throw ParseError(1, 1, "missing compare header");
  std::vector<CompareRow> out;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw ParseError(row + 1, f.size(), "compare rows have 7 columns");
    CompareRow r;
    try {
      r.ask_depth = std::stoll(f[0]);
      r.bid_depth = std::stoll(f[1]);
      r.mc.mean = std::stod(f[2]);
      r.mc.std_error = std::stod(f[3]);
      r.mc.n = std::stoull(f[4]);
      r.mc.timeouts = std::stoull(f[5]);
      if (!f[6].empty()) r.kbe = std::stod(f[6]);
    } catch (const std::logic_error&) {
      throw ParseError(row + 1, 0, "bad number in compare row");
    }
    out.push_back(r);
  }
  return out;
}

std::vector<FirstMoveCell> first_move_grid(const IntensityModel& model, const std::vector<Depth>& ask_depths,
                                           const std::vector<Depth>& bid_depths, const McOptions& opt) {
  std::vector<FirstMoveCell> cells;
  for (Depth a : ask_depths)
    for (Depth b : bid_depths) {
      McOptions mc = opt;
      mc.seed = cell_seed(opt.seed, a, b);
      cells.push_back({a, b, estimate_first_move(model, canonical_origin(b, a), mc)});
    }
  return cells;
}

MonotonicityScore monotonicity(const std::vector<FirstMoveCell>& cells, std::size_t n_ask, std::size_t n_bid) {
  if (cells.size() != n_ask * n_bid) throw Error(ErrorCode::BadParameter, "grid size mismatch");
  auto at = [&](std::size_t i, std::size_t j) { return cells[i * n_bid + j].estimate.mean; };
  MonotonicityScore s;
  for (std::size_t i = 0; i < n_ask; ++i)
    for (std::size_t j = 0; j < n_bid; ++j) {
      if (i + 1 < n_ask) {
        ++s.ask_pairs;
        if (at(i + 1, j) <= at(i, j)) ++s.ask_ok;
      }
      if (j + 1 < n_bid) {
        ++s.bid_pairs;
        if (at(i, j + 1) >= at(i, j)) ++s.bid_ok;
      }
    }
  return s;
}

}  // namespace lobforge
