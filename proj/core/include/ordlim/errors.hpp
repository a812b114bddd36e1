#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ordlim {

// Everything in this library is desk-scale: plain 64-bit naturals outside the
// ordinal notations (whose coefficients are arbitrary precision).
using Nat = std::uint64_t;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejected input text. `position` is a byte offset into the original string.
struct parse_error : error {
  parse_error(const std::string& what, std::size_t at)
      : error(what + " (at offset " + std::to_string(at) + ")"), position(at) {}
  std::size_t position;
};

// A well-formed request whose evaluation cannot proceed: missing variable
// binding, arity mismatch, or arithmetic that left the 64-bit range.
struct eval_error : error {
  using error::error;
};

// A configured budget ran out: notation depth, tower index, search contexts,
// or materialization past a verified witness bound.
struct resource_error : error {
  using error::error;
};

}  // namespace ordlim
