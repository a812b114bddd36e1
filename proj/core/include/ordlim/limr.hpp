#pragma once

#include <functional>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "ordlim/dsl.hpp"
#include "ordlim/errors.hpp"
#include "ordlim/ordinal.hpp"

namespace ordlim {

// Lexicographic comparison of two tuples of equal, nonzero arity.
// Throws std::invalid_argument on an arity mismatch.
Cmp lex_compare(std::span<const Nat> a, std::span<const Nat> b);

// One step of the code-valued approximation chain. All four values are
// natural numbers; whenever they are read as tuples below, the arity-k
// decoding is meant.
struct LexChainState {
  Nat n;       // the step this state belongs to
  Nat g1;      // scan value: the step itself until a full witness appears,
               // then the head of the least witness code seen so far
  Nat g;       // direct value: the head of the step's own decoding when the
               // final component certifies it, otherwise g1
  Nat h;       // descent value: follows g while all g values are distinct,
               // afterwards only drops onto lex-smaller repeats
  Nat hprime;  // h gated to 0 until any full witness has appeared
};

// Approximation chain for a formula over the variables x1..x{k+1}. Step n
// decodes n as a (k+1)-tuple; chain values code k-tuples (candidate heads).
// States are memoized, so the cost of at(n) is linear in the largest step
// visited. Thread-compatible, not thread-safe.
class LexChain {
 public:
  // Requires k >= 1 and free variables of phi within {x1, ..., x{k+1}}.
  LexChain(dsl::QFFormula phi, Nat k);

  LexChainState at(Nat n);
  Nat arity() const { return k_; }

 private:
  void extend(Nat upto);
  bool full_witness(const std::vector<Nat>& comps);
  bool certified_head(const std::vector<Nat>& comps);
  bool lex_below(Nat a, Nat b) const;

  dsl::QFFormula phi_;
  Nat k_;
  std::vector<std::string> names_;
  std::vector<LexChainState> states_;
  std::optional<Nat> least_witness_;
  std::unordered_set<Nat> seen_g_;
  bool g_collision_ = false;
};

// Result of running the chain across a coded window. The window bounds the
// codes that are inspected, not the tuple components.
struct NestedLimitOutcome {
  enum class Status {
    ok,        // a witness exists in the window and hprime has a stable tail
    empty,     // no code in the window satisfies the formula
    unstable,  // hprime still moved at the window's last step
  };

  Status status = Status::empty;
  std::vector<Nat> tuple;  // arity-k decoding of the final hprime value
  Nat settled_at = 0;      // last step where hprime changed
  // component_settle[i]: last step where the leading i+1 components of the
  // decoded hprime moved; non-decreasing in i by construction.
  std::vector<Nat> component_settle;
  std::vector<Nat> brute_minimum;  // lex-least witness head in the window
  bool matches_brute = false;
};

const char* nested_limit_status_name(NestedLimitOutcome::Status s);

NestedLimitOutcome nested_limit(const dsl::QFFormula& phi, Nat k, Nat window);

// Input for the staged descent-point search. The chain h must be total on
// [0, window]. Locator j is a term over x0..x{j-1}, a1, a2, b1, b2 naming
// the point past which the chain is expected to stop rising once j earlier
// rise witnesses x0 < ... < x{j-1} have been consumed. theta1 and theta2
// are certificate predicates over the variables x and y; a certificate
// pair (b1, b2) is admissible when theta1(a1, b1) and theta2(a2, b2) hold.
struct StabilizationInput {
  std::function<Nat(Nat)> h;
  std::vector<dsl::TermExpr> locators;
  dsl::QFFormula theta1;
  dsl::QFFormula theta2;
  Nat a1 = 0;
  Nat a2 = 0;
};

struct StabilizationOutcome {
  enum class Status {
    ok,                  // some level's tail is rise-free through the window
    no_premise_witness,  // no admissible certificate pair in the window
    undetermined,        // every level still rises before the window ends
  };

  Status status = Status::undetermined;
  Nat level = 0;  // index of the first accepted locator
  Nat value = 0;  // least chain value reachable at or past that locator
  Nat b1 = 0;     // certificate pair backing the accepted level
  Nat b2 = 0;
  bool matches_observed = false;  // value == h(window)
};

const char* stabilization_status_name(StabilizationOutcome::Status s);

// Scans certificate pairs by their code, then rise witnesses in ascending
// order; level j is accepted when some admissible configuration places
// locator j strictly past the chain's last rise. The reported value is the
// least chain value over all of level j's in-window configurations, which
// can undercut the observed tail when the chain dips early and recovers.
StabilizationOutcome stabilization_search(const StabilizationInput& in,
                                          Nat window);

}  // namespace ordlim
