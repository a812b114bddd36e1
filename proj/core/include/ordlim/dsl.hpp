#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ordlim/errors.hpp"

namespace ordlim::dsl {

// Arithmetic term over naturals: variables, constants, +, truncated
// subtraction, *, Cantor pairing with projections, and fixed-arity tuple
// coding. Plain value-semantics tree.
struct TermExpr {
  enum class Kind {
    constant,
    variable,
    add,
    monus,
    mul,
    pair,
    proj0,
    proj1,
    tuple,  // k-ary right-nested pair coding
    proj,   // component i (1-based) of a k-tuple code
  };

  Kind kind = Kind::constant;
  Nat value = 0;            // constant
  std::string name;         // variable
  std::vector<TermExpr> args;
  std::uint32_t arity = 0;  // tuple/proj
  std::uint32_t index = 0;  // proj, 1-based

  static TermExpr constant(Nat v);
  static TermExpr variable(std::string name);
  static TermExpr add(TermExpr a, TermExpr b);
  static TermExpr monus(TermExpr a, TermExpr b);
  static TermExpr mul(TermExpr a, TermExpr b);
  static TermExpr pair(TermExpr a, TermExpr b);
  static TermExpr proj0(TermExpr a);
  static TermExpr proj1(TermExpr a);
  static TermExpr tuple(std::uint32_t k, std::vector<TermExpr> parts);
  static TermExpr project(std::uint32_t k, std::uint32_t i, TermExpr a);
};

// Formula over such terms: comparisons, propositional connectives, and
// bounded quantifiers only. `terms[0]` holds the comparison sides or the
// quantifier bound; quantifier bodies sit in `children[0]`.
struct QFFormula {
  enum class Kind { cmp, neg, conj, disj, impl, exists, forall };
  enum class CmpOp { eq, le, lt };

  Kind kind = Kind::cmp;
  CmpOp op = CmpOp::eq;
  std::vector<TermExpr> terms;
  std::vector<QFFormula> children;
  std::string var;  // quantified variable name

  static QFFormula cmp(CmpOp op, TermExpr lhs, TermExpr rhs);
  static QFFormula neg(QFFormula a);
  static QFFormula conj(QFFormula a, QFFormula b);
  static QFFormula disj(QFFormula a, QFFormula b);
  static QFFormula impl(QFFormula a, QFFormula b);
  static QFFormula exists(std::string var, TermExpr bound, QFFormula body);
  static QFFormula forall(std::string var, TermExpr bound, QFFormula body);

  // Convenience constants built from 0 = 0 / 0 < 0.
  static QFFormula truth();
  static QFFormula falsity();
};

// Variable assignment with lexical shadowing: lookups scan from the most
// recent binding backwards.
class Env {
 public:
  Env() = default;
  Env(std::initializer_list<std::pair<std::string, Nat>> init);

  void push(std::string name, Nat value);
  void pop();
  std::optional<Nat> lookup(std::string_view name) const;
  std::size_t size() const { return slots_.size(); }

 private:
  std::vector<std::pair<std::string, Nat>> slots_;
};

// Total on covered assignments; throws eval_error on an unbound variable or
// when +/*/pairing leaves the 64-bit range. Truncated subtraction never
// fails; bounded quantifiers range over 0..bound inclusive.
Nat eval_term(const TermExpr& t, const Env& env);
bool eval_formula(const QFFormula& f, Env& env);
bool eval_formula(const QFFormula& f, Env&& env);

std::string render_term(const TermExpr& t);
std::string render_formula(const QFFormula& f);

bool structurally_equal(const TermExpr& a, const TermExpr& b);
bool structurally_equal(const QFFormula& a, const QFFormula& b);

std::set<std::string> free_variables(const TermExpr& t);
std::set<std::string> free_variables(const QFFormula& f);

// Simultaneous capture-avoiding substitution; bound variables are renamed
// when a replacement would otherwise be captured.
TermExpr substitute(const TermExpr& t, const std::map<std::string, TermExpr>& subst);
QFFormula substitute(const QFFormula& f, const std::map<std::string, TermExpr>& subst);

// ---------------------------------------------------------------------------
// Source files. A document is a list of declarations
//     NAME(v1, ..., vk) := formula;
// optionally followed by a `herbrand { r = n; t0 = ...; s0 = ...; }` block
// and/or a `sigma2 { z0 = ...; z1 = ...; }` candidate block. '#' starts a
// line comment.

struct Decl {
  std::string name;
  std::vector<std::string> params;
  QFFormula body;
};

struct HerbrandBlock {
  std::uint32_t rank = 0;                    // r
  std::vector<TermExpr> t_terms, s_terms;    // each of size rank+1
};

struct Sigma2Block {
  std::vector<TermExpr> candidates;  // z0, z1, ... in order
};

struct Document {
  std::vector<Decl> decls;
  std::optional<HerbrandBlock> herbrand;
  std::optional<Sigma2Block> sigma2;

  const Decl* find(std::string_view name) const;
};

Document parse_document(std::string_view text);

// Standalone entry points used by tests and the CLI; `scope` lists the free
// variables the text may mention.
TermExpr parse_term(std::string_view text, const std::vector<std::string>& scope);
QFFormula parse_formula(std::string_view text, const std::vector<std::string>& scope);

// A limit-computable set presentation: intended reading
//     forall x exists y A(x,y,c)  <->  exists z forall u B(z,u,c).
// Requires declarations A(x,y,c) and B(z,u,c), with exactly those parameter
// lists.
struct Delta2Spec {
  QFFormula matrix_a;  // free variables among {x, y, c}
  QFFormula matrix_b;  // free variables among {z, u, c}
};

Delta2Spec spec_from_document(const Document& doc);
Delta2Spec parse_spec(std::string_view text);

// The combined matrix p(x,y,c) := A((x)0,(y)0,c) -> B((x)1,(y)1,c), with the
// pairing projections spliced in by substitution.
QFFormula combine_to_p(const Delta2Spec& spec);

enum class Truth { yes, no, unknown };

// Windowed decision of the two sides. Candidates range to W, their checks to
// 2W so a candidate surviving the window has real slack:
//   E_B := exists z<=W forall u<=2W B,   E_A := exists x<=W forall y<=2W !A.
// yes when exactly E_B holds, no when exactly E_A holds, unknown otherwise.
Truth brute_truth(const Delta2Spec& spec, Nat c, Nat window);

const char* truth_name(Truth t);

}  // namespace ordlim::dsl
