#pragma once

// Shared helpers for the test binaries: deterministic random generators and
// the independent oracles the expected values are frozen against. Everything
// here is deliberately written from first principles rather than through the
// library under test.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ordlim/dsl.hpp"
#include "ordlim/ordinal.hpp"

namespace testsupport {

using ordlim::Cmp;
using ordlim::Coeff;
using ordlim::Nat;
using ordlim::Ordinal;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus_path(const std::string& name) {
#ifdef ORDLIM_CORPUS_DIR
  return std::string(ORDLIM_CORPUS_DIR) + "/" + name;
#else
  return "corpus/" + name;
#endif
}

inline ordlim::dsl::Document load_corpus(const std::string& name) {
  return ordlim::dsl::parse_document(read_file(corpus_path(name)));
}

// ---------------------------------------------------------------------------
// Small-ordinal oracle: every notation below w^10 with finite exponents is a
// coefficient vector (index = exponent). Order type is lexicographic from the
// top exponent down, and sums follow the absorption rule directly on vectors.
// This path shares no code with the Ordinal class.

struct VecOrdinal {
  std::array<ordlim::Coeff, 10> coeff{};  // coeff[e] multiplies w^e
};

inline Cmp oracle_compare(const VecOrdinal& a, const VecOrdinal& b) {
  for (int e = 9; e >= 0; --e) {
    if (a.coeff[e] < b.coeff[e]) return Cmp::LT;
    if (a.coeff[e] > b.coeff[e]) return Cmp::GT;
  }
  return Cmp::EQ;
}

inline VecOrdinal oracle_add(const VecOrdinal& a, const VecOrdinal& b) {
  int lead = -1;
  for (int e = 9; e >= 0; --e)
    if (b.coeff[e] != 0) {
      lead = e;
      break;
    }
  if (lead < 0) return a;
  VecOrdinal out;
  for (int e = 9; e > lead; --e) out.coeff[e] = a.coeff[e];
  out.coeff[lead] = a.coeff[lead] + b.coeff[lead];
  for (int e = lead - 1; e >= 0; --e) out.coeff[e] = b.coeff[e];
  return out;
}

// Converts a vector ordinal into a notation through the public constructor.
inline Ordinal to_notation(const VecOrdinal& v) {
  std::vector<Ordinal::Term> terms;
  for (int e = 9; e >= 0; --e)
    if (v.coeff[e] != 0)
      terms.push_back({Ordinal::finite(ordlim::Coeff(e)), v.coeff[e]});
  return Ordinal::from_terms(std::move(terms));
}

// ---------------------------------------------------------------------------
// Random generators. All deterministic given the engine state.

inline ordlim::Coeff rand_coeff(std::mt19937_64& rng, unsigned hi = 9) {
  return ordlim::Coeff(1 + rng() % hi);
}

// Random canonical notation with nesting depth <= depth and at most
// `max_terms` summands per layer.
inline Ordinal random_ordinal(std::mt19937_64& rng, unsigned depth, unsigned max_terms = 3) {
  unsigned n_terms = rng() % (max_terms + 1);  // 0 gives zero
  if (n_terms == 0) return Ordinal();
  std::vector<Ordinal> exps;
  for (unsigned i = 0; i < n_terms; ++i) {
    if (depth == 0) {
      exps.push_back(Ordinal());  // only w^0 available
    } else if (rng() % 3 == 0) {
      exps.push_back(Ordinal::finite(ordlim::Coeff(rng() % 6)));
    } else {
      exps.push_back(random_ordinal(rng, depth - 1, 2));
    }
  }
  std::sort(exps.begin(), exps.end(), [](const Ordinal& a, const Ordinal& b) {
    return compare(a, b) == Cmp::GT;
  });
  exps.erase(std::unique(exps.begin(), exps.end(),
                         [](const Ordinal& a, const Ordinal& b) {
                           return compare(a, b) == Cmp::EQ;
                         }),
             exps.end());
  std::vector<Ordinal::Term> terms;
  for (auto& e : exps) terms.push_back({std::move(e), rand_coeff(rng)});
  return Ordinal::from_terms(std::move(terms));
}

inline VecOrdinal random_vec_ordinal(std::mt19937_64& rng) {
  VecOrdinal v;
  for (int e = 0; e < 10; ++e)
    if (rng() % 3 == 0) v.coeff[e] = ordlim::Coeff(rng() % 10);
  return v;
}

}  // namespace testsupport
