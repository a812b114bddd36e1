#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ordlim/errors.hpp"

namespace ordlim {

// Coefficients are arbitrary-precision; structure is what is bounded.
using Coeff = boost::multiprecision::cpp_int;

enum class Cmp { LT, EQ, GT };

struct OrdinalLimits {
  std::uint32_t max_exponent_depth = 8;
  std::uint32_t max_tower_index = 3;
};

// A notation below epsilon_0 in Cantor normal form: a finite sum
//   w^e1 * c1 + ... + w^ek * ck
// with e1 > e2 > ... > ek (recursively such notations) and every ci >= 1.
// The empty sum is zero. Construction validates; nothing is ever normalized
// after the fact.
class Ordinal {
 public:
  struct Term;  // defined below; exponents recurse through the class

  Ordinal() = default;  // zero

  static Ordinal finite(const Coeff& n);
  static Ordinal omega();
  // Throws std::invalid_argument naming the offending term index when the
  // canonical-form invariant fails, resource_error when the nesting cap is hit.
  static Ordinal from_terms(std::vector<Term> terms, const OrdinalLimits& limits = {});

  bool is_zero() const;
  bool is_finite() const;
  // Coefficient of the exponent-zero term, 0 when absent.
  Coeff finite_part() const;
  const std::vector<Term>& terms() const { return terms_; }
  // 0 for zero and naturals, 1 for w and w*k+m, 1 + depth(exponent) in general.
  std::uint32_t nesting_depth() const;

 private:
  std::vector<Term> terms_;
};

struct Ordinal::Term {
  Ordinal exponent;
  Coeff coefficient;
};

inline bool Ordinal::is_zero() const { return terms_.empty(); }

Cmp compare(const Ordinal& a, const Ordinal& b);

bool operator==(const Ordinal& a, const Ordinal& b);
bool operator!=(const Ordinal& a, const Ordinal& b);
bool operator<(const Ordinal& a, const Ordinal& b);
bool operator<=(const Ordinal& a, const Ordinal& b);
bool operator>(const Ordinal& a, const Ordinal& b);
bool operator>=(const Ordinal& a, const Ordinal& b);

// Ordinal sum a + b. Non-commutative: terms of a strictly below the leading
// exponent of b are absorbed.
Ordinal add(const Ordinal& a, const Ordinal& b);

// Left product n * a for finite n >= 1: infinite terms are fixed points, only
// the exponent-zero coefficient scales. Left rather than right multiplication
// because it preserves  a < b, i < n  =>  n*a + i < n*b,  which every descent
// argument in this library leans on.
Ordinal scale_finite(const Coeff& n, const Ordinal& a);

// tower(0) = 1, tower(n+1) = w^tower(n). Index capped by limits.
Ordinal omega_tower(std::uint32_t index, const OrdinalLimits& limits = {});

// Text form, highest term first: "0", "7", "w", "w^w*2+w+3", "w^(w+1)".
// Parsing is structurally strict (rejects "w+w", "3+5", "w*0") but tolerates
// redundant spellings of canonical structure such as "w^1" or "w*1".
Ordinal parse_ordinal(std::string_view text, const OrdinalLimits& limits = {});
std::string render_ordinal(const Ordinal& a);

const char* cmp_name(Cmp c);

}  // namespace ordlim
