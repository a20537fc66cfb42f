#pragma once

#include <stdexcept>
#include <string>

namespace lobforge {

enum class ErrorCode {
  PreconditionViolated,
  BudgetExceeded,
  NegativeQueue,
  SideWipedOut,
  OutOfGrid,
  BadParameter,
  DeadState,
  StabilityViolated,
  ParseError,
  InsufficientData,
  EmptyBook,
  ReplicationTimeout,
};

const char* to_string(ErrorCode code);

// Every domain failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& reason)
      : Error(ErrorCode::ParseError, "row " + std::to_string(row) + ", column " +
                                         std::to_string(column) + ": " + reason),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace lobforge
