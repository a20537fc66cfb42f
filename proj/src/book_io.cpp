#include "lobforge/book_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "lobforge/errors.hpp"

namespace lobforge {

namespace {

Depth parse_depth(const std::string& text, std::size_t row, std::size_t col) {
  Depth v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) throw ParseError(row, col, "expected an integer, got '" + text + "'");
  return v;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

Side side_from_json(const nlohmann::json& j, const char* key, std::size_t d) {
  if (!j.contains(key) || !j[key].is_array()) throw ParseError(0, 0, std::string("missing array '") + key + "'");
  const auto& arr = j[key];
  if (arr.size() != d) throw ParseError(0, 0, std::string("'") + key + "' must have d entries");
  Side out(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!arr[i].is_number_integer()) throw ParseError(0, i + 1, std::string("'") + key + "' entries must be integers");
    out[i] = arr[i].get<Depth>();
    if (out[i] < 0) throw ParseError(0, i + 1, "negative depth");
  }
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

nlohmann::json book_to_json(const BookState& state) {
  return nlohmann::json{{"d", state.d()}, {"buy", state.buy}, {"sell", state.sell}};
}

BookState book_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("d") || !j["d"].is_number_integer()) throw ParseError(0, 0, "book needs integer 'd'");
  const int d = j["d"].get<int>();
  if (d < 1) throw ParseError(0, 0, "'d' must be positive");
  return BookState(side_from_json(j, "buy", static_cast<std::size_t>(d)), side_from_json(j, "sell", static_cast<std::size_t>(d)));
}

void write_book_csv(std::ostream& out, const BookState& state) {
  out << "buy";
  for (Depth v : state.buy) out << ',' << v;
  out << "\nsell";
  for (Depth v : state.sell) out << ',' << v;
  out << '\n';
}

BookState read_book_csv(std::istream& in) {
  std::string line;
  Side buy, sell;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    const std::string tag = trim(cells[0]);
    Side* target = tag == "buy" ? &buy : tag == "sell" ? &sell : nullptr;
    if (!target) throw ParseError(row, 1, "expected 'buy' or 'sell'");
    if (!target->empty()) throw ParseError(row, 1, "duplicate '" + tag + "' row");
    for (std::size_t c = 1; c < cells.size(); ++c) target->push_back(parse_depth(cells[c], row, c + 1));
  }
  if (buy.empty() || sell.empty()) throw ParseError(row, 0, "book CSV needs a buy and a sell row");
  if (buy.size() != sell.size()) throw ParseError(row, 0, "buy and sell rows differ in length");
  for (std::size_t i = 0; i < buy.size(); ++i)
    if (buy[i] < 0 || sell[i] < 0) throw ParseError(0, i + 2, "negative depth");
  return BookState(std::move(buy), std::move(sell));
}

namespace {
bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

BookState load_book(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadParameter, "cannot open book file " + path);
  if (ends_with(path, ".csv")) return read_book_csv(in);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, e.byte, e.what());
  }
  return book_from_json(j);
}

void save_book(const std::string& path, const BookState& state) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadParameter, "cannot write " + path);
  if (ends_with(path, ".csv"))
    write_book_csv(out, state);
  else
    out << book_to_json(state).dump() << '\n';
}

std::vector<Event> read_events_csv(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (row == 1 && trim(cells[0]) == "kind") continue;
    if (cells.size() != 3) throw ParseError(row, cells.size(), "expected 3 columns: kind, price, size");
    Event e{};
    try {
      e.kind = event_kind_from_string(trim(cells[0]));
    } catch (const Error&) {
      throw ParseError(row, 1, "unknown event kind '" + cells[0] + "'");
    }
    e.price = static_cast<Price>(parse_depth(cells[1], row, 2));
    e.size = parse_depth(cells[2], row, 3);
    if (e.size < 0) throw ParseError(row, 3, "negative size");
    events.push_back(e);
  }
  return events;
}

void write_events_csv(std::ostream& out, const std::vector<Event>& events) {
  out << "kind,price,size\n";
  for (const Event& e : events) out << to_string(e.kind) << ',' << e.price << ',' << e.size << '\n';
}

std::vector<Event> load_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadParameter, "cannot open events file " + path);
  return read_events_csv(in);
}

nlohmann::json clearing_result_to_json(const ClearingResult& result) {
  nlohmann::json trades = nlohmann::json::array();
  for (const Trade& t : result.trades)
    trades.push_back({{"side", t.side == EventKind::LimitBuy ? "buy" : "sell"}, {"price", t.price}, {"volume", t.volume}});
  const Quote q = ask_bid(result.cleared);
  return nlohmann::json{{"cleared", book_to_json(result.cleared)},
                        {"executed", {{"buy", result.executed.buy}, {"sell", result.executed.sell}}},
                        {"trades", trades},
                        {"ask", q.ask},
                        {"bid", q.bid}};
}

}  // namespace lobforge
