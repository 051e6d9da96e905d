#pragma once

#include <stdexcept>
#include <string>

namespace bumpwatch {

// Base for every error the library throws. `kind()` lets callers branch
// without a dynamic_cast ladder.
class Error : public std::runtime_error {
 public:
  enum class Kind { Input, Ordering, Rate, Parse, Config, Design, Training, Io };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& w) : Error(Kind::Input, w) {}
};
struct OrderingError : Error {
  explicit OrderingError(const std::string& w) : Error(Kind::Ordering, w) {}
};
struct RateError : Error {
  explicit RateError(const std::string& w) : Error(Kind::Rate, w) {}
};
struct ParseError : Error {
  ParseError(const std::string& w, std::size_t line)
      : Error(Kind::Parse, "line " + std::to_string(line) + ": " + w), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(Kind::Config, w) {}
};
struct DesignError : Error {
  explicit DesignError(const std::string& w) : Error(Kind::Design, w) {}
};
struct TrainingError : Error {
  explicit TrainingError(const std::string& w) : Error(Kind::Training, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(Kind::Io, w) {}
};

}  // namespace bumpwatch
