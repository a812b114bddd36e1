#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ordlim/errors.hpp"

namespace ordlim {

// Cantor pairing (a+b)(a+b+1)/2 + b and its exact inverse. Throws eval_error
// when the code would not fit in 64 bits.
Nat cantor_pair(Nat a, Nat b);
std::pair<Nat, Nat> cantor_unpair(Nat code);

// k-tuples are coded by right-nested pairing:
//   <x1> = x1,   <x1,...,xk> = pair(x1, <x2,...,xk>).
// Bijective for every fixed k >= 1; k = 1 is the identity.
Nat encode_tuple(std::span<const Nat> xs);
std::vector<Nat> decode_tuple(std::uint32_t k, Nat code);

}  // namespace ordlim
