#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobforge/book.hpp"
#include "lobforge/order_flow.hpp"

namespace lobforge {

enum class MessageKind { Submission, Cancellation, Execution };

/// One row of a LOBSTER message file. time_text keeps the original decimal
/// so a parsed stream writes back unchanged.
struct MessageRecord {
  double time = 0.0;
  std::string time_text;
  int msg_type = 0;
  std::int64_t order_id = 0;
  std::int64_t size = 0;
  std::int64_t price = 0;  // dollars times 10000
  int direction = 0;       // +1 buy, -1 sell
  MessageKind kind = MessageKind::Submission;
};

/// Streaming reader for LOBSTER message CSV: time, type, order id, size,
/// price, direction. Types 1 (submission), 2 and 3 (cancellation), 4 and 5
/// (execution) are returned; other types are skipped and counted.
class MessageReader {
 public:
  explicit MessageReader(std::istream& in) : in_(in) {}
  std::optional<MessageRecord> next();
  std::size_t skipped() const { return skipped_; }
  std::size_t row() const { return row_; }

 private:
  std::istream& in_;
  std::size_t row_ = 0;
  std::size_t skipped_ = 0;
  double last_time_ = -1.0;
};

struct MessageStream {
  std::vector<MessageRecord> records;
  std::size_t skipped = 0;
};

MessageStream parse_messages(std::istream& in);
MessageStream parse_messages_file(const std::string& path);
void write_messages(std::ostream& out, const std::vector<MessageRecord>& records);

/// Aggregate visible shares per raw price.
struct RawBook {
  std::map<std::int64_t, std::int64_t> buy;
  std::map<std::int64_t, std::int64_t> sell;

  std::optional<std::int64_t> best_bid() const;
  std::optional<std::int64_t> best_ask() const;
  /// Adds a submission, removes a cancellation or execution (clamped at 0).
  void apply(const MessageRecord& m);
};

/// Replays a message stream into a book, starting from `start`.
RawBook replay(const std::vector<MessageRecord>& records, RawBook start = {});

/// LOBSTER order book snapshot row: ask price, ask size, bid price, bid size
/// for each level; dummy levels (price -9999999999 or 9999999999, size 0) ignored.
RawBook parse_snapshot_row(const std::string& line);

/// Level grid: raw price of level k is bid_price + (k - bid_level) * tick.
struct GridReference {
  std::int64_t bid_price = 0;
  int bid_level = 0;
  std::int64_t tick = 100;
};

struct InitialState {
  BookState state;
  GridReference reference;
  std::size_t dropped_levels = 0;  // raw levels off the grid or between ticks
  std::vector<std::string> warnings;
};

/// Aggregates a raw book onto d levels. Shares are converted with round half
/// away from zero; a crossed result is cleared with a warning. Without a
/// reference, the best bid sits at level d / 2. Throws EmptyBook when a side
/// is empty after aggregation.
InitialState build_initial_state(const RawBook& raw, int d, std::int64_t unit_size,
                                 std::optional<GridReference> reference = std::nullopt);

/// Volume units for a share count, round half away from zero.
std::int64_t to_units(std::int64_t shares, std::int64_t unit_size);

enum class Scheme { ModelA, ModelB };

struct CalibrationOptions {
  Scheme scheme = Scheme::ModelB;
  int d = 6;
  std::int64_t unit_size = 100;
  std::int64_t tick = 100;
  Depth max_size = 6;
  Depth n = 300;
  int relative_origin = 0;
  RawBook initial_book;  // book before the first message
};

struct CalibrationReport {
  Scheme scheme = Scheme::ModelB;
  std::int64_t unit_size = 0;
  std::int64_t tick = 0;
  int d = 0;
  Depth max_size = 0;
  Depth n = 0;
  double T = 0.0;
  // counts[kind][z - 1][column], kinds in EventKind order; Model A uses one column.
  std::array<std::vector<std::vector<std::int64_t>>, 4> counts;
  std::size_t used = 0;
  std::size_t off_grid = 0;      // relative price outside the columns
  std::size_t unresolved = 0;    // no prevailing best price on the relevant side
  std::size_t executions = 0;
  std::vector<std::string> warnings;
  ModelPtr model;

  nlohmann::json to_json() const;
};

/// Count-based calibration. Model A: rate = count(kind) / (d T). Model B:
/// rate(kind, z, r) = count / T in the matrix layout row z, column
/// r - relative_origin. Relative prices use the prevailing best prices
/// before each message. Throws InsufficientData when T = 0 or no message has
/// a resolvable relative price.
CalibrationReport calibrate(const std::vector<MessageRecord>& records, const CalibrationOptions& opt);

}  // namespace lobforge
