#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace dclab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed netlist / stimulus / model / test-point input. `path` is a JSON
/// pointer to the offending value when the document was syntactically valid;
/// `offset` is the byte offset of a syntax error.
class FormatError : public Error {
 public:
  FormatError(std::string reason, std::string path, std::optional<std::size_t> offset = {});

  const std::string& reason() const noexcept { return reason_; }
  const std::string& path() const noexcept { return path_; }
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  std::string reason_;
  std::string path_;
  std::optional<std::size_t> offset_;
};

/// A caller broke an operation's precondition (missing input pin, unknown
/// signal, unresolved pin reference, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace dclab
