#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ordlim/dsl.hpp"
#include "ordlim/errors.hpp"
#include "ordlim/ordinal.hpp"
#include "ordlim/witness.hpp"

namespace ordlim {

// A staged implication list over a Delta2Spec: disjunct i reads
//     A(t_i, a_i, c) -> B(s_i, b_i, c)
// where t_i, s_i may mention a_j, b_j only for j < i, plus the parameter c.
struct HerbrandCertificate {
  Nat rank = 0;                        // r; the list has rank+1 disjuncts
  std::vector<dsl::TermExpr> t_terms;  // size rank+1
  std::vector<dsl::TermExpr> s_terms;

  // Validates the j < i variable discipline; throws std::invalid_argument.
  static HerbrandCertificate from_block(const dsl::HerbrandBlock& block);
};

struct CertificateCheck {
  bool ok = true;
  std::optional<Nat> c;         // failing parameter, when !ok
  std::vector<Nat> assignment;  // a_0, b_0, ..., a_r, b_r, lexicographically first
  std::string detail;
};

// Grid-checks the disjunction: for every c in [c_lo, c_hi] and every
// assignment of the a_i, b_i up to `window`, some disjunct must hold. The
// search is staged (disjunct i only depends on choices below i), so a
// counterexample is found as a depth-first path picking each (a_i, b_i) in
// lexicographic order.
CertificateCheck check_certificate(const HerbrandCertificate& cert, const dsl::Delta2Spec& spec,
                                   Nat c_lo, Nat c_hi, Nat window);

// The full approximation pair for a checked certificate.
//
// f(c, w) = 0 iff some stage j <= r fires under w: there are choices
// a_0, b_0, ..., a_{j-1}, b_{j-1} <= w with every intermediate locator value
// t_i, s_i <= w, A(t_i, a_i, c) and not B(s_i, b_i, c), and at stage j both
// locators are <= w, some a <= w satisfies A(t_j, a, c), and no b <= w
// refutes B(s_j, b, c). Every evaluated locator is required to fit under w
// in every disjunct, which keeps w -> "stage j fires by choices <= w"
// monotone in its existential part.
//
// h starts at K-1 and decrements (truncated) whenever f changes;
// K = 1 + 2r + 2.
WitnessPair build_pair(const HerbrandCertificate& cert, const dsl::Delta2Spec& spec);

std::function<Nat(Nat, Nat)> build_f(const HerbrandCertificate& cert,
                                     const dsl::Delta2Spec& spec);

struct ChangeBoundCheck {
  bool ok = true;
  Nat allowed = 0;  // K - 2, the maximal number of value changes
  Nat worst_c = 0;
  Nat worst_changes = 0;
};

// Counts f-changes over [0, window] for each c in [c_lo, c_hi] against the
// pair's finite budget K - 2. Requires a finite bound.
ChangeBoundCheck change_bound_check(const WitnessPair& pair, Nat c_lo, Nat c_hi, Nat window);

// Window-evaluable Boolean-hierarchy decomposition of "the limit is 0".
// y(k, c, W) holds when k change points w_1 < ... < w_k <= W can be chosen
// with f(c, w_k) = 0 (k = 0: f(c, 0) = 0); n(k, ...) likewise with value 1,
// except n(2r+2, ...) is pinned to false since the change budget rules a
// (2r+2)-nd change out. Both are monotone in W. The combination is
//     OR { y(k) && !n(k+1) : k <= 1 + 2r }.
struct Decomposition {
  Nat rank = 0;
  std::function<bool(Nat k, Nat c, Nat window)> y;
  std::function<bool(Nat k, Nat c, Nat window)> n;
  std::function<bool(Nat c, Nat window)> combined;
};

Decomposition boolean_decomposition(const WitnessPair& pair, Nat rank);

// One-block witness search from an explicit candidate list: f(c, w) is the
// value of the first candidate no u < w refutes (so f(c, 0) is always the
// first candidate); when every candidate is refuted the value sticks at the
// last candidate's. h pays each change from the budget K = #candidates + 1.
struct Sigma2FiniteWitness {
  WitnessPair pair;
  // Least w <= window from which every candidate carries a refutation below
  // w ("no stable witness" marker), if any.
  std::function<std::optional<Nat>(Nat c, Nat window)> exhausted_at;
};

Sigma2FiniteWitness sigma2_witness_finite(const std::vector<dsl::TermExpr>& candidates,
                                          const dsl::QFFormula& matrix_b);

}  // namespace ordlim
