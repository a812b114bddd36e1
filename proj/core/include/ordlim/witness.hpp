#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ordlim/dsl.hpp"
#include "ordlim/errors.hpp"
#include "ordlim/ordinal.hpp"

namespace ordlim {

enum class Provenance { herbrand, derivation, baseline, external };

const char* provenance_name(Provenance p);

// An approximation pair (f, h) with its ordinal budget K. f(c, w) is the
// stage-w guess for input c; h(c, w) is the ordinal counter that pays for
// value changes. Intended, window-checkable contracts:
//   (descending)  K > h(c,w) >= h(c,w+1)
//   (lowering)    f(c,w) != f(c,w+1)  implies  h(c,w) > h(c,w+1)
// Baseline pairs carry a constant-zero h and are exempt from (lowering).
// f and h must be pure; builders may memoize behind the interface.
struct WitnessPair {
  Provenance provenance = Provenance::external;
  Ordinal bound;  // K
  std::function<Nat(Nat c, Nat w)> f;
  std::function<Ordinal(Nat c, Nat w)> h;
};

// Window-check outcome. Violations at a step transition (w, w+1) are
// reported at index w+1; bound violations at the offending w itself.
struct CheckVerdict {
  bool ok = true;
  std::optional<Nat> first_violation;
  std::string detail;
};

CheckVerdict check_weakly_descending(const WitnessPair& p, Nat c, Nat window);
CheckVerdict check_lowering(const WitnessPair& p, Nat c, Nat window);

struct LimitReport {
  Nat c = 0;
  Nat window = 0;
  Nat observed_limit = 0;
  Nat last_change = 0;    // greatest w <= window with f(c,w) != f(c,w-1), 0 if none
  Nat change_count = 0;
  Ordinal h_first;
  Ordinal h_final;
  bool checks_reliable = false;
  // The two finitely checkable convergence certificates: a finite K whose
  // change budget K-1 is exhausted, or h at 0. Baseline pairs are never
  // certified (their h carries no information).
  bool certified = false;
  // h still dropped at the last observed step; the window ended mid-descent.
  bool still_descending = false;
};

LimitReport find_limit(const WitnessPair& p, Nat c, Nat window);

// Limit of a weakly descending ordinal chain over a window: the minimum and
// where it is first attained. The descent verdict reports the first rise.
struct ChainLimitResult {
  Ordinal minimum;
  Nat first_attained = 0;
  CheckVerdict descent;
};

ChainLimitResult chain_limit(const std::function<Ordinal(Nat)>& chain, Nat window);

// The classic dual-least-search approximation: f(c,w) = 0 iff z0(w) <= x0(w)
// where z0(w) is the least z <= w surviving forall u<=w B(z,u,c) (w+1 when
// none) and x0(w) the least x <= w surviving forall y<=w !A(x,y,c). h is
// constantly 0; no change budget is claimed.
WitnessPair limit_lemma_witness(const dsl::Delta2Spec& spec);

std::vector<Nat> f_trace(const WitnessPair& p, Nat c, Nat window);
std::vector<Ordinal> h_trace(const WitnessPair& p, Nat c, Nat window);

}  // namespace ordlim
