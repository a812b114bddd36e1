#include "ordlim/tuple_code.hpp"

#include <cmath>
#include <limits>

namespace ordlim {

namespace {
using U128 = unsigned __int128;
constexpr Nat kMax = std::numeric_limits<Nat>::max();
}  // namespace

Nat cantor_pair(Nat a, Nat b) {
  U128 s = U128(a) + U128(b);
  U128 code = s * (s + 1) / 2 + U128(b);
  if (code > U128(kMax)) throw eval_error("pair code exceeds 64-bit range");
  return Nat(code);
}

std::pair<Nat, Nat> cantor_unpair(Nat code) {
  // s = floor((sqrt(8*code+1)-1)/2), then correct the float estimate exactly.
  long double r = std::sqrt(8.0L * static_cast<long double>(code) + 1.0L);
  Nat s = static_cast<Nat>((r - 1.0L) / 2.0L);
  auto tri = [](U128 n) { return n * (n + 1) / 2; };
  while (tri(U128(s) + 1) <= U128(code)) ++s;
  while (tri(U128(s)) > U128(code)) --s;
  Nat b = code - Nat(tri(U128(s)));
  Nat a = s - b;
  return {a, b};
}

Nat encode_tuple(std::span<const Nat> xs) {
  if (xs.empty()) throw eval_error("tuple arity must be >= 1");
  Nat code = xs.back();
  for (std::size_t i = xs.size() - 1; i-- > 0;) code = cantor_pair(xs[i], code);
  return code;
}

std::vector<Nat> decode_tuple(std::uint32_t k, Nat code) {
  if (k == 0) throw eval_error("tuple arity must be >= 1");
  std::vector<Nat> out;
  out.reserve(k);
  Nat rest = code;
  for (std::uint32_t i = 0; i + 1 < k; ++i) {
    auto [head, tail] = cantor_unpair(rest);
    out.push_back(head);
    rest = tail;
  }
  out.push_back(rest);
  return out;
}

}  // namespace ordlim
