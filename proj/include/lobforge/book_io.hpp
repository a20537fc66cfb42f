#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobforge/book.hpp"
#include "lobforge/matching.hpp"

namespace lobforge {

nlohmann::json book_to_json(const BookState& state);
/// Throws ParseError on missing keys, wrong lengths, or negative depths.
BookState book_from_json(const nlohmann::json& j);

/// Two rows, "buy,v1,...,vd" then "sell,v1,...,vd".
void write_book_csv(std::ostream& out, const BookState& state);
BookState read_book_csv(std::istream& in);

/// Loads a book by extension (.json or .csv).
BookState load_book(const std::string& path);
void save_book(const std::string& path, const BookState& state);

/// Events CSV with header "kind,price,size".
std::vector<Event> read_events_csv(std::istream& in);
void write_events_csv(std::ostream& out, const std::vector<Event>& events);
std::vector<Event> load_events(const std::string& path);

nlohmann::json clearing_result_to_json(const ClearingResult& result);

/// Splits one CSV line on commas; no quoting, which none of our formats use.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace lobforge
