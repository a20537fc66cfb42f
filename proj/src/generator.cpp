#include "lobforge/generator.hpp"

#include <functional>

namespace lobforge {

double apply_L_explicit(const IntensityModel& model, const StateFunction<BookState>& f, const BookState& x) {
  const Quote q = ask_bid(x);
  if (q.bid == no_bid || q.ask == no_ask(x.d()) || q.ask <= q.bid)
    throw Error(ErrorCode::PreconditionViolated, "explicit generator needs an admissible book with both sides non-empty");
  const int d = x.d();
  const int a = q.ask, b = q.bid;
  const BookProfile pr = profile(x);
  const FlowContext ctx = FlowContext::of(x);
  const double fx = f(x);
  double sum = 0.0;
  auto term = [&](EventKind kind, int i, Depth z, const std::function<BookState()>& successor) {
    const double r = model.rate(ctx, kind, i, z);
    if (r > 0.0) sum += r * (f(successor()) - fx);
  };

  for (Depth z = 1; z <= model.max_size(); ++z) {
    // Buy arrivals: resting below the ask, partially executing, fully executing.
    const int s_inv = pr.sell_inverse(z);
    for (int i = 1; i <= a - 1; ++i)
      term(EventKind::LimitBuy, i, z, [&] {
        BookState y = x;
        y.buy_at(i) += z;
        return y;
      });
    for (int i = a; i <= std::min(s_inv - 1, d); ++i)
      term(EventKind::LimitBuy, i, z, [&] {
        BookState y(x.buy, keep_above(x.sell, i + 1));
        y.buy_at(i) += z - pr.S(i);
        return y;
      });
    for (int i = s_inv; i <= d; ++i)
      term(EventKind::LimitBuy, i, z, [&] {
        BookState y(x.buy, keep_above(x.sell, s_inv + 1));
        y.sell_at(s_inv) += pr.S(s_inv) - z;
        return y;
      });

    // Sell arrivals, mirrored.
    const int b_inv = pr.buy_inverse(z);
    for (int i = b + 1; i <= d; ++i)
      term(EventKind::LimitSell, i, z, [&] {
        BookState y = x;
        y.sell_at(i) += z;
        return y;
      });
    for (int i = std::max(b_inv + 1, 1); i <= b; ++i)
      term(EventKind::LimitSell, i, z, [&] {
        BookState y(keep_below(x.buy, i - 1), x.sell);
        y.sell_at(i) += z - pr.B(i);
        return y;
      });
    for (int i = 1; i <= b_inv; ++i)
      term(EventKind::LimitSell, i, z, [&] {
        BookState y(keep_below(x.buy, b_inv - 1), x.sell);
        y.buy_at(b_inv) += pr.B(b_inv) - z;
        return y;
      });

    // Cancellations.
    for (int i = 1; i <= b; ++i)
      term(EventKind::CancelBuy, i, z, [&] {
        BookState y = x;
        y.buy_at(i) -= z;
        return y;
      });
    for (int i = a; i <= d; ++i)
      term(EventKind::CancelSell, i, z, [&] {
        BookState y = x;
        y.sell_at(i) -= z;
        return y;
      });
  }
  return sum;
}

FlowTruncation flow_truncation(const IntensityModel& model, int d, Depth cap) {
  if (model.frame() != Frame::Absolute) throw Error(ErrorCode::PreconditionViolated, "flow truncation is absolute-frame");
  FlowTruncation tr;
  // Every (buy, sell) pair of depth arrays with entries in 0..cap.
  const std::size_t levels = static_cast<std::size_t>(2 * d);
  std::vector<Depth> digits(levels, 0);
  while (true) {
    BookState x(Side(digits.begin(), digits.begin() + d), Side(digits.begin() + d, digits.end()));
    tr.index.emplace(x, tr.states.size());
    tr.states.push_back(std::move(x));
    std::size_t k = levels;
    while (k > 0 && digits[k - 1] == cap) digits[--k] = 0;
    if (k == 0) break;
    ++digits[k - 1];
  }
  const std::size_t n = tr.states.size();
  if (n > 20000) throw Error(ErrorCode::BudgetExceeded, "flow truncation box is too large for a dense matrix");
  tr.Q_o.assign(n * n, 0.0);
  tr.clear_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const BookState& x = tr.states[i];
    tr.clear_index[i] = tr.index.at(clear_state(x));
    if (is_admissible(x)) tr.admissible.push_back(i);
    model.for_each_rate(FlowContext::of(x), [&](const Event& e, double r) {
      const BookState y = FrameTraits<BookState>::perturbed(x, e);
      const auto it = tr.index.find(y);
      if (it == tr.index.end()) return;
      tr.Q_o[i * n + it->second] += r;
      tr.Q_o[i * n + i] -= r;
    });
  }
  return tr;
}

void write_truncation_states(std::ostream& out, const Truncation<BookState>& tr) {
  out << "index,buy,sell\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    out << i << ',';
    for (std::size_t k = 0; k < tr.states[i].buy.size(); ++k) out << (k ? " " : "") << tr.states[i].buy[k];
    out << ',';
    for (std::size_t k = 0; k < tr.states[i].sell.size(); ++k) out << (k ? " " : "") << tr.states[i].sell[k];
    out << '\n';
  }
}

}  // namespace lobforge
