#pragma once

#include <compare>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ordlim/dsl.hpp"
#include "ordlim/errors.hpp"
#include "ordlim/ordinal.hpp"
#include "ordlim/witness.hpp"

namespace ordlim {

// Position in a finitely-branching tree of sequents; the root is the empty
// path.
struct TreeAddress {
  std::vector<Nat> path;

  TreeAddress() = default;
  explicit TreeAddress(std::vector<Nat> p) : path(std::move(p)) {}

  bool is_root() const { return path.empty(); }
  Nat length() const { return path.size(); }
  Nat last() const { return path.back(); }

  TreeAddress child(Nat n) const;
  TreeAddress parent() const;  // throws on the root
  // The next sibling to the right (last component + 1); the root maps to
  // itself.
  TreeAddress bump() const;

  std::string render() const;  // "<>", "<0,2,0>"

  auto operator<=>(const TreeAddress&) const = default;
};

enum class Rule { intro_true, exists, forall, repeat };
const char* rule_name(Rule r);

enum class Arity { leaf, one, omega };

// Value snapshot of one node: rule, ordinal tag, and the candidate-sweep
// bookkeeping (which candidate this position tests, and at forall children
// which instance and whether its displayed formula is true).
struct NodeView {
  TreeAddress address;
  Rule rule = Rule::repeat;
  Arity arity = Arity::leaf;
  Ordinal ord;
  Nat block = 0;
  std::optional<Nat> index;  // forall-child instance
  bool side_true = false;    // meaningful at forall children
  std::string main;          // rendered main formula of the rule here
  std::string side;          // rendered instance formula, when there is one
};

// Minimal read interface the audit works against, so externally wrapped (or
// deliberately corrupted) trees can be checked with the same code path.
struct NodeSource {
  virtual ~NodeSource() = default;
  virtual NodeView node(const TreeAddress& a) const = 0;
  virtual bool eval_side(const TreeAddress& a) const = 0;  // forall children only
  virtual Ordinal bound() const = 0;
};

struct BlockChangeVerdict {
  bool ok = true;
  std::optional<Nat> at;  // stage w of the offending step
  std::string detail;
};

struct SigmaBoundVerdict {
  bool ok = true;
  std::optional<Nat> at;
};

// A lazily materialized, ordinal-annotated candidate-sweep tree for one
// parameter value c. Two shapes share the machinery:
//   - the combined form proves  exists x forall y [p(x,y,c)]  with
//     p = A((x)0,(y)0,c) -> B((x)1,(y)1,c);
//   - the one-block form proves exists z forall u [B(z,u,c)].
// Candidates are swept 0..X; block k is an existential introduction of the
// numeral k above an omega-branching forall whose n-th child displays the
// instance at n. True instances close as leaves; the first false instance
// continues (via a repetition node) into block k+1. Ordinals: the block-k
// forall carries w*(X+1-k), its children w*(X-k)+2, the repetition node
// w*(X-k)+1, the root w*(X+1)+1; the depth bound is K = w*(X+2).
class Derivation final : public NodeSource {
 public:
  enum class Kind { combined, one_block };

  NodeView node(const TreeAddress& a) const override;
  bool eval_side(const TreeAddress& a) const override;
  Ordinal bound() const override;  // K

  bool contains(const TreeAddress& a) const;
  Kind kind() const;
  Nat parameter() const;        // c
  Nat candidate_bound() const;  // X

  friend Derivation canonical_derivation(const dsl::Delta2Spec& spec, Nat c, Nat x_bound,
                                         Nat check_window);
  friend Derivation canonical_sigma2_derivation(const dsl::QFFormula& matrix_b, Nat c,
                                                Nat z_bound, Nat check_window);
  friend TreeAddress trace_address(const Derivation& d, Nat w);
  friend WitnessPair extract_pair(const Derivation& d);
  friend WitnessPair sigma2_trace_pair(const Derivation& d);
  friend BlockChangeVerdict check_forall_block_changes(const Derivation& d, Nat window);
  friend SigmaBoundVerdict check_sigma_elementary_bound(const Derivation& d, Nat window);

  struct Impl;

 private:
  explicit Derivation(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
};

// Least candidate x <= cap whose instances hold for every y <= audit_window
// (brute force); the sweep generator requires one to stay well-founded.
std::optional<Nat> find_witness_bound(const dsl::Delta2Spec& spec, Nat c, Nat audit_window,
                                      Nat cap);
std::optional<Nat> find_sigma2_witness_bound(const dsl::QFFormula& matrix_b, Nat c,
                                             Nat audit_window, Nat cap);

// Builds the sweep tree after verifying that some candidate <= x_bound
// passes the audit window; throws std::invalid_argument otherwise.
Derivation canonical_derivation(const dsl::Delta2Spec& spec, Nat c, Nat x_bound,
                                Nat check_window);
Derivation canonical_sigma2_derivation(const dsl::QFFormula& matrix_b, Nat c, Nat z_bound,
                                       Nat check_window);

struct AuditVerdict {
  bool ok = true;
  std::optional<TreeAddress> address;
  std::string detail;
};

// Walks the tree checking each visited node's rule-local conditions and the
// ordinal constraints: children strictly below their parent, forall siblings
// sharing one ordinal, leaves exactly at true instances, the root below the
// bound. Depth is limited by depth_budget (address length), forall fanout by
// width_budget.
AuditVerdict audit_local_correctness(const NodeSource& d, Nat depth_budget, Nat width_budget);

// The walk through the tree hunting a stable candidate: start at the root,
// descend leftmost below non-forall positions; on a forall child step right
// while the displayed instance is true and descend into the continuation
// when it is false. Both the length and every component of the address at
// stage w are <= w.
TreeAddress trace_address(const Derivation& d, Nat w);

// The approximation read off the walk of a combined-form tree. f(c,0) = 1;
// off forall children the value alternates; at a forall child with instance
// n the value is 0 iff the instance holds and some k <= n already witnessed
// the A-side. h scales the walk's ordinal by 3 and spends the finite
// offsets 2 -> 1 -> 0 inside a block; the pair's bound is 3 * K (left
// product, so only the finite tail scales).
WitnessPair extract_pair(const Derivation& d);

// The one-block variant: f is the candidate under test while the walk sits
// on a forall child and 0 elsewhere; h is the walk's ordinal itself.
WitnessPair sigma2_trace_pair(const Derivation& d);

// Within one forall block the extracted f changes at most twice, and a
// 0 -> 1 change only as the final step before the walk leaves the block.
BlockChangeVerdict check_forall_block_changes(const Derivation& d, Nat window);

// Pure analysis of one block run, exposed so synthetic runs can be checked:
// fs are the f values along consecutive children; ended_by_descent tells
// whether the run closed by descending; truncated marks a run cut off by the
// window (its final change cannot be held against it).
BlockChangeVerdict analyze_block_run(const std::vector<Nat>& fs, bool ended_by_descent,
                                     bool truncated);

// Checks length and components of the walk address against w, for w up to
// the window.
SigmaBoundVerdict check_sigma_elementary_bound(const Derivation& d, Nat window);

}  // namespace ordlim
