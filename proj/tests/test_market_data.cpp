#include <doctest.h>

#include <fstream>
#include <sstream>

#include "lobforge/errors.hpp"
#include "lobforge/market_data.hpp"

using namespace lobforge;

namespace {

std::string data_path(const std::string& name) { return std::string(LOBFORGE_TEST_DATA) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MessageRecord message(double t, int type, std::int64_t size, std::int64_t price, int dir) {
  MessageRecord m;
  m.time = t;
  m.time_text = std::to_string(t);
  m.msg_type = type;
  m.size = size;
  m.price = price;
  m.direction = dir;
  m.kind = type == 1 ? MessageKind::Submission : (type <= 3 ? MessageKind::Cancellation : MessageKind::Execution);
  return m;
}

RawBook one_tick_book() {
  RawBook b;
  b.buy[2238200] = 500;
  b.sell[2238300] = 500;
  return b;
}

}  // namespace

TEST_CASE("a LOBSTER row parses by the column convention") {
  std::istringstream in("34200.189,1,11885113,100,2238200,1\n");
  const MessageStream s = parse_messages(in);
  REQUIRE(s.records.size() == 1);
  const MessageRecord& m = s.records[0];
  CHECK(m.time == doctest::Approx(34200.189));
  CHECK(m.kind == MessageKind::Submission);
  CHECK(m.direction == 1);
  CHECK(m.size == 100);
  CHECK(m.price == 2238200);  // 223.82 dollars
  CHECK(m.order_id == 11885113);
}

TEST_CASE("the message fixture maps types and round-trips byte for byte") {
  const std::string path = data_path("messages_small.csv");
  const MessageStream s = parse_messages_file(path);
  REQUIRE(s.records.size() == 8);
  CHECK(s.skipped == 0);
  CHECK(s.records[4].kind == MessageKind::Cancellation);
  CHECK(s.records[5].kind == MessageKind::Execution);
  CHECK(s.records[6].kind == MessageKind::Cancellation);
  std::ostringstream out;
  write_messages(out, s.records);
  CHECK(out.str() == slurp(path));
}

TEST_CASE("unknown message types are skipped and counted") {
  const MessageStream s = parse_messages_file(data_path("messages_with_halt.csv"));
  CHECK(s.records.size() == 2);
  CHECK(s.skipped == 1);
}

TEST_CASE("malformed message files are rejected with positions") {
  std::istringstream empty("");
  CHECK(parse_messages(empty).records.empty());
  std::istringstream five("34200.1,1,1,100,2238200,1\n34200.2,1,2,100,2238200\n");
  try {
    parse_messages(five);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
  std::istringstream bad_size("34200.1,1,1,-5,2238200,1\n");
  CHECK_THROWS_AS(parse_messages(bad_size), ParseError);
  std::istringstream backwards("34200.2,1,1,5,2238200,1\n34200.1,1,1,5,2238200,1\n");
  CHECK_THROWS_AS(parse_messages(backwards), ParseError);
  std::istringstream bad_dir("34200.1,1,1,5,2238200,0\n");
  CHECK_THROWS_AS(parse_messages(bad_dir), ParseError);
}

TEST_CASE("volume units round half away from zero") {
  CHECK(to_units(300, 100) == 3);
  CHECK(to_units(250, 100) == 3);
  CHECK(to_units(249, 100) == 2);
  CHECK(to_units(50, 100) == 1);
  CHECK(to_units(-150, 100) == -2);
  CHECK(to_units(0, 100) == 0);
}

TEST_CASE("initial state from a snapshot row") {
  std::ifstream in(data_path("snapshot_row.csv"));
  std::string line;
  std::getline(in, line);
  const InitialState s = build_initial_state(parse_snapshot_row(line), 6, 100);
  CHECK(s.state.buy == Side{3, 2, 2, 0, 0, 0});
  CHECK(s.state.sell == Side{0, 0, 0, 3, 4, 0});
  CHECK(s.reference.bid_level == 3);
  CHECK(s.warnings.empty());

  RawBook exact;
  exact.buy[2238200] = 100;
  exact.sell[2238300] = 300;
  CHECK(build_initial_state(exact, 6, 100).state.sell[3] == 3);
}

TEST_CASE("the canonical test state is constructible directly") {
  RawBook raw;
  const std::int64_t bid = 2238200;
  const Depth z1 = 5, z2 = 2;
  const Depth buy[] = {2, 4, z1}, sell[] = {z2, 4, 2};
  for (int k = 0; k < 3; ++k) {
    raw.buy[bid - 100 * (2 - k)] = 100 * buy[k];
    raw.sell[bid + 100 * (k + 1)] = 100 * sell[k];
  }
  const InitialState s = build_initial_state(raw, 6, 100);
  CHECK(s.state.buy == Side{2, 4, z1, 0, 0, 0});
  CHECK(s.state.sell == Side{0, 0, 0, z2, 4, 2});
}

TEST_CASE("crossed snapshots are cleared with a warning and empty sides rejected") {
  RawBook crossed;
  crossed.buy[2238200] = 300;
  crossed.buy[2238300] = 100;
  crossed.sell[2238300] = 200;
  crossed.sell[2238400] = 100;
  const InitialState s = build_initial_state(crossed, 6, 100, GridReference{2238200, 3, 100});
  CHECK(is_admissible(s.state));
  CHECK(s.state.buy == Side{0, 0, 3, 0, 0, 0});
  CHECK(s.state.sell == Side{0, 0, 0, 1, 1, 0});
  CHECK(s.warnings.size() == 1);

  RawBook one_sided;
  one_sided.buy[2238200] = 300;
  CHECK_THROWS_AS(build_initial_state(one_sided, 6, 100), Error);
  CHECK_THROWS_AS(build_initial_state(RawBook{}, 6, 100), Error);
}

TEST_CASE("Model A calibration divides counts by d T") {
  std::vector<MessageRecord> recs;
  for (int i = 0; i <= 60; ++i) recs.push_back(message(i * 0.5, 1, 100, 2238100, 1));  // 61 buys over 30 s
  recs.push_back(message(30.0, 3, 100, 2238100, 1));
  CalibrationOptions opt;
  opt.scheme = Scheme::ModelA;
  opt.n = 10;
  const CalibrationReport rep = calibrate(recs, opt);
  CHECK(rep.T == 30.0);
  const auto j = model_to_json(*rep.model);
  CHECK(j["limit_buy"].get<double>() == doctest::Approx(61.0 / (6 * 30.0)).epsilon(1e-15));
  CHECK(j["cancel_buy"].get<double>() == doctest::Approx(1.0 / (6 * 30.0)).epsilon(1e-15));
  CHECK(j["limit_sell"].get<double>() == 0.0);
  CHECK(j["n"].get<Depth>() == 10);
}

TEST_CASE("Model B calibration places counts in the matrix layout") {
  // 423 unit sells two ticks above the bid over 100 s.
  std::vector<MessageRecord> recs;
  for (int i = 0; i < 423; ++i) recs.push_back(message(100.0 * i / 422.0, 1, 100, 2238400, -1));
  CalibrationOptions opt;
  opt.initial_book = one_tick_book();
  opt.relative_origin = 1;
  const CalibrationReport rep = calibrate(recs, opt);
  CHECK(rep.T == doctest::Approx(100.0));
  const auto j = model_to_json(*rep.model);
  CHECK(j["alpha"][0][1].get<double>() == doctest::Approx(4.23).epsilon(1e-12));
  CHECK(rep.counts[1][0][1] == 423);

  opt.relative_origin = 0;
  const auto j0 = model_to_json(*calibrate(recs, opt).model);
  CHECK(j0["alpha"][0][2].get<double>() == doctest::Approx(4.23).epsilon(1e-12));
}

TEST_CASE("Model B calibration on the fixture stream") {
  const MessageStream s = parse_messages_file(data_path("messages_small.csv"));
  CalibrationOptions opt;
  opt.n = 10;
  const CalibrationReport rep = calibrate(s.records, opt);
  CHECK(rep.unresolved == 1);
  CHECK(rep.executions == 1);
  CHECK(rep.used == 6);
  CHECK(rep.off_grid == 0);
  CHECK(rep.counts[1][2][2] == 1);  // 300 sell two ticks above the bid
  CHECK(rep.counts[0][0][1] == 1);  // 100 buy one tick below the ask
  CHECK(rep.counts[1][0][2] == 1);
  CHECK(rep.counts[2][1][1] == 1);  // 200 buy cancel one tick below the bid
  CHECK(rep.counts[3][0][1] == 1);  // 50 shares round to one unit
  CHECK(rep.counts[0][3][3] == 1);
  std::int64_t total = 0;
  double rate_total = 0.0;
  const auto j = model_to_json(*rep.model);
  for (const auto& c : rep.counts)
    for (const auto& row : c)
      for (auto v : row) total += v;
  for (const char* name : {"alpha", "mu", "beta", "gamma"})
    for (const auto& row : j[name])
      for (const auto& v : row) rate_total += v.get<double>();
  CHECK(total == static_cast<std::int64_t>(rep.used));
  CHECK(rate_total * rep.T == doctest::Approx(static_cast<double>(total)).epsilon(1e-12));
  const auto rj = rep.to_json();
  CHECK(rj["scheme"] == "modelB");
  CHECK(rj["counts"]["limit_sell"][2][2] == 1);
}

TEST_CASE("orders far from the best prices give zero matrices with a warning") {
  std::vector<MessageRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back(message(i, 1, 100, 2239200, -1));
  CalibrationOptions opt;
  opt.initial_book = one_tick_book();
  const CalibrationReport rep = calibrate(recs, opt);
  CHECK(rep.used == 0);
  CHECK(rep.off_grid == 10);
  CHECK_FALSE(rep.warnings.empty());
  CHECK(total_rate(*rep.model, BookState(Side{0, 0, 3, 0, 0, 0}, Side{0, 0, 0, 3, 0, 0})) == 0.0);
}

TEST_CASE("calibration needs elapsed time and resolvable prices") {
  CalibrationOptions opt;
  CHECK_THROWS_AS(calibrate({message(1.0, 1, 100, 2238200, 1), message(1.0, 1, 100, 2238300, -1)}, opt), Error);
  try {
    calibrate({message(1.0, 1, 100, 2238200, 1), message(2.0, 1, 100, 2238100, 1)}, opt);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
}

TEST_CASE("calibrated models pass validation") {
  const MessageStream s = parse_messages_file(data_path("messages_small.csv"));
  CalibrationOptions opt;
  opt.n = 10;
  const ModelPtr m = calibrate(s.records, opt).model;
  std::vector<BookState> states;
  for (Depth a = 1; a <= 9; ++a)
    for (Depth b = 1; b <= 9; ++b) states.emplace_back(Side{2, 4, b, 0, 0, 0}, Side{0, 0, 0, a, 4, 2});
  CHECK(validate(*m, std::span<const BookState>(states)).violations.empty());
}
