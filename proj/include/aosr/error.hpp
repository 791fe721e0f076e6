#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aosr {

enum class ErrorKind {
  invalid_argument,
  parse,
  infeasible_region,
  numerical,
  divergence,
  undefined_normalizer,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; the kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Same kind, message prefixed with `context: `.
  Error with_context(std::string_view context) const;

 private:
  ErrorKind kind_;
};

[[noreturn]] void throw_invalid(const std::string& what);

inline void require(bool condition, const std::string& what) {
  if (!condition) throw_invalid(what);
}

}  // namespace aosr
