#include "lobforge/market_data.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "lobforge/errors.hpp"
#include "lobforge/matching.hpp"

namespace lobforge {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::int64_t parse_int(std::string_view text, std::size_t row, std::size_t col) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError(row, col, "expected an integer, got '" + std::string(text) + "'");
  return v;
}

double parse_double(std::string_view text, std::size_t row, std::size_t col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError(row, col, "expected a decimal time, got '" + std::string(text) + "'");
  return v;
}

const char* scheme_name(Scheme s) { return s == Scheme::ModelA ? "modelA" : "modelB"; }

}  // namespace

std::optional<MessageRecord> MessageReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++row_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != 6)
      throw ParseError(row_, fields.size(), "expected 6 columns, found " + std::to_string(fields.size()));
    MessageRecord m;
    m.time_text = std::string(fields[0]);
    m.time = parse_double(fields[0], row_, 1);
    m.msg_type = static_cast<int>(parse_int(fields[1], row_, 2));
    m.order_id = parse_int(fields[2], row_, 3);
    m.size = parse_int(fields[3], row_, 4);
    m.price = parse_int(fields[4], row_, 5);
    m.direction = static_cast<int>(parse_int(fields[5], row_, 6));
    if (m.time < last_time_) throw ParseError(row_, 1, "time decreases");
    last_time_ = m.time;
    switch (m.msg_type) {
      case 1:
        m.kind = MessageKind::Submission;
        break;
      case 2:
      case 3:
        m.kind = MessageKind::Cancellation;
        break;
      case 4:
      case 5:
        m.kind = MessageKind::Execution;
        break;
      default:
        ++skipped_;
        continue;
    }
    if (m.size <= 0) throw ParseError(row_, 4, "size must be positive");
    if (m.price <= 0) throw ParseError(row_, 5, "price must be positive");
    if (m.direction != 1 && m.direction != -1) throw ParseError(row_, 6, "direction must be 1 or -1");
    return m;
  }
  return std::nullopt;
}

MessageStream parse_messages(std::istream& in) {
  MessageReader reader(in);
  MessageStream out;
  while (auto m = reader.next()) out.records.push_back(std::move(*m));
  out.skipped = reader.skipped();
  return out;
}

MessageStream parse_messages_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadParameter, "cannot open " + path);
  return parse_messages(in);
}

void write_messages(std::ostream& out, const std::vector<MessageRecord>& records) {
  for (const auto& m : records)
    out << m.time_text << ',' << m.msg_type << ',' << m.order_id << ',' << m.size << ',' << m.price << ','
        << m.direction << '\n';
}

std::optional<std::int64_t> RawBook::best_bid() const {
  for (auto it = buy.rbegin(); it != buy.rend(); ++it)
    if (it->second > 0) return it->first;
  return std::nullopt;
}

std::optional<std::int64_t> RawBook::best_ask() const {
  for (const auto& [p, s] : sell)
    if (s > 0) return p;
  return std::nullopt;
}

void RawBook::apply(const MessageRecord& m) {
  auto& side = m.direction == 1 ? buy : sell;
  if (m.kind == MessageKind::Submission) {
    side[m.price] += m.size;
    return;
  }
  const auto it = side.find(m.price);
  if (it == side.end()) return;
  it->second = std::max<std::int64_t>(0, it->second - m.size);
  if (it->second == 0) side.erase(it);
}

RawBook replay(const std::vector<MessageRecord>& records, RawBook start) {
  for (const auto& m : records) start.apply(m);
  return start;
}

RawBook parse_snapshot_row(const std::string& line) {
  std::string_view text(line);
  if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
  const auto fields = split_commas(text);
  if (fields.size() % 4 != 0) throw ParseError(1, fields.size(), "snapshot needs 4 columns per level");
  RawBook book;
  for (std::size_t i = 0; i < fields.size(); i += 4) {
    const std::int64_t ap = parse_int(fields[i], 1, i + 1), as = parse_int(fields[i + 1], 1, i + 2);
    const std::int64_t bp = parse_int(fields[i + 2], 1, i + 3), bs = parse_int(fields[i + 3], 1, i + 4);
    if (as < 0 || bs < 0) throw ParseError(1, i + 2, "negative snapshot size");
    if (as > 0 && ap > 0) book.sell[ap] += as;
    if (bs > 0 && bp > 0) book.buy[bp] += bs;
  }
  return book;
}

std::int64_t to_units(std::int64_t shares, std::int64_t unit_size) {
  if (unit_size <= 0) throw Error(ErrorCode::BadParameter, "unit_size must be positive");
  const std::int64_t mag = shares < 0 ? -shares : shares;
  std::int64_t q = mag / unit_size;
  if (2 * (mag % unit_size) >= unit_size) ++q;
  return shares < 0 ? -q : q;
}

InitialState build_initial_state(const RawBook& raw, int d, std::int64_t unit_size,
                                 std::optional<GridReference> reference) {
  if (d < 2) throw Error(ErrorCode::BadParameter, "need d >= 2");
  InitialState out;
  if (!reference) {
    const auto bid = raw.best_bid();
    if (!bid) throw Error(ErrorCode::EmptyBook, "no bid to anchor the grid");
    reference = GridReference{*bid, d / 2, 100};
  }
  if (reference->tick <= 0) throw Error(ErrorCode::BadParameter, "tick must be positive");
  out.reference = *reference;
  std::vector<std::int64_t> buy_shares(static_cast<std::size_t>(d), 0), sell_shares(static_cast<std::size_t>(d), 0);
  auto place = [&](const std::map<std::int64_t, std::int64_t>& side, std::vector<std::int64_t>& shares) {
    for (const auto& [price, size] : side) {
      const std::int64_t diff = price - reference->bid_price;
      if (diff % reference->tick != 0) {
        ++out.dropped_levels;
        continue;
      }
      const std::int64_t level = reference->bid_level + diff / reference->tick;
      if (level < 1 || level > d) {
        ++out.dropped_levels;
        continue;
      }
      shares[static_cast<std::size_t>(level - 1)] += size;
    }
  };
  place(raw.buy, buy_shares);
  place(raw.sell, sell_shares);
  BookState x(d);
  for (int k = 0; k < d; ++k) {
    x.buy[static_cast<std::size_t>(k)] = std::max<std::int64_t>(0, to_units(buy_shares[static_cast<std::size_t>(k)], unit_size));
    x.sell[static_cast<std::size_t>(k)] = std::max<std::int64_t>(0, to_units(sell_shares[static_cast<std::size_t>(k)], unit_size));
  }
  if (!is_admissible(x)) {
    x = clear_state(x);
    out.warnings.push_back("crossed snapshot cleared before use");
  }
  if (inf_support(x.sell) > d || sup_support(x.buy) < 1) throw Error(ErrorCode::EmptyBook, "a side is empty on the grid");
  out.state = std::move(x);
  return out;
}

nlohmann::json CalibrationReport::to_json() const {
  nlohmann::json j;
  j["scheme"] = scheme_name(scheme);
  j["unit_size"] = unit_size;
  j["tick"] = tick;
  j["d"] = d;
  j["max_size"] = max_size;
  j["n"] = n;
  j["T"] = T;
  j["used"] = used;
  j["off_grid"] = off_grid;
  j["unresolved"] = unresolved;
  j["executions"] = executions;
  j["warnings"] = warnings;
  static const char* names[4] = {"limit_buy", "limit_sell", "cancel_buy", "cancel_sell"};
  for (std::size_t k = 0; k < 4; ++k) j["counts"][names[k]] = counts[k];
  if (model) j["model"] = model_to_json(*model);
  return j;
}

CalibrationReport calibrate(const std::vector<MessageRecord>& records, const CalibrationOptions& opt) {
  if (opt.unit_size <= 0 || opt.tick <= 0) throw Error(ErrorCode::BadParameter, "unit_size and tick must be positive");
  if (opt.d < 1) throw Error(ErrorCode::BadParameter, "need d >= 1");
  if (opt.scheme == Scheme::ModelB && (opt.max_size < 1 || opt.max_size > 6))
    throw Error(ErrorCode::BadParameter, "modelB sizes run over 1..6");
  CalibrationReport rep;
  rep.scheme = opt.scheme;
  rep.unit_size = opt.unit_size;
  rep.tick = opt.tick;
  rep.d = opt.d;
  rep.max_size = opt.scheme == Scheme::ModelA ? 1 : opt.max_size;
  rep.n = opt.n;
  const std::size_t rows = static_cast<std::size_t>(rep.max_size);
  const std::size_t cols = opt.scheme == Scheme::ModelA ? 1 : 6;
  for (auto& c : rep.counts) c.assign(rows, std::vector<std::int64_t>(cols, 0));
  if (records.empty()) throw Error(ErrorCode::InsufficientData, "no messages");
  rep.T = records.back().time - records.front().time;
  if (!(rep.T > 0.0)) throw Error(ErrorCode::InsufficientData, "messages span no time");

  RawBook book = opt.initial_book;
  for (const auto& m : records) {
    if (m.kind == MessageKind::Execution) {
      ++rep.executions;
      book.apply(m);
      continue;
    }
    const bool buy = m.direction == 1;
    const bool arrival = m.kind == MessageKind::Submission;
    const EventKind kind = arrival ? (buy ? EventKind::LimitBuy : EventKind::LimitSell)
                                   : (buy ? EventKind::CancelBuy : EventKind::CancelSell);
    const auto k = static_cast<std::size_t>(kind);
    if (opt.scheme == Scheme::ModelA) {
      ++rep.counts[k][0][0];
      ++rep.used;
      book.apply(m);
      continue;
    }
    // Buy arrivals and sell cancellations are measured from the ask, the
    // other two from the bid.
    const bool from_ask = kind == EventKind::LimitBuy || kind == EventKind::CancelSell;
    const auto ref = from_ask ? book.best_ask() : book.best_bid();
    if (!ref) {
      ++rep.unresolved;
      book.apply(m);
      continue;
    }
    const std::int64_t diff = kind == EventKind::LimitBuy || kind == EventKind::CancelBuy ? *ref - m.price : m.price - *ref;
    const std::int64_t col = diff / opt.tick - opt.relative_origin;
    if (diff % opt.tick != 0 || col < 0 || col >= static_cast<std::int64_t>(cols)) {
      ++rep.off_grid;
      book.apply(m);
      continue;
    }
    const std::int64_t z = std::clamp<std::int64_t>(to_units(m.size, opt.unit_size), 1, rep.max_size);
    ++rep.counts[k][static_cast<std::size_t>(z - 1)][static_cast<std::size_t>(col)];
    ++rep.used;
    book.apply(m);
  }
  if (rep.used == 0 && rep.unresolved > 0 && rep.off_grid == 0)
    throw Error(ErrorCode::InsufficientData, "no message had a prevailing best price on its reference side");
  if (rep.unresolved > 0)
    rep.warnings.push_back(std::to_string(rep.unresolved) + " messages skipped without a prevailing best price");
  if (rep.used == 0) rep.warnings.push_back("no message fell inside the calibrated relative prices; all rates are zero");

  if (opt.scheme == Scheme::ModelA) {
    const double norm = static_cast<double>(opt.d) * rep.T;
    ModelAParams p;
    p.n = opt.n;
    p.limit_buy = static_cast<double>(rep.counts[0][0][0]) / norm;
    p.limit_sell = static_cast<double>(rep.counts[1][0][0]) / norm;
    p.cancel_buy = static_cast<double>(rep.counts[2][0][0]) / norm;
    p.cancel_sell = static_cast<double>(rep.counts[3][0][0]) / norm;
    rep.model = build_modelA(p);
  } else {
    ModelBParams p;
    p.n = opt.n;
    p.relative_origin = opt.relative_origin;
    Matrix6* target[4] = {&p.beta, &p.alpha, &p.gamma, &p.mu};
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t z = 0; z < 6; ++z)
        for (std::size_t c = 0; c < 6; ++c)
          (*target[k])[z][c] = z < rows ? static_cast<double>(rep.counts[k][z][c]) / rep.T : 0.0;
    rep.model = build_modelB(p);
  }
  return rep;
}

}  // namespace lobforge
