#include <doctest/doctest.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ordlim/dsl.hpp"
#include "ordlim/errors.hpp"
#include "ordlim/tuple_code.hpp"
#include "support.hpp"

using namespace ordlim;
using namespace ordlim::dsl;

namespace {

TermExpr t_parse(const std::string& s, std::vector<std::string> scope) {
  return parse_term(s, scope);
}

QFFormula f_parse(const std::string& s, std::vector<std::string> scope) {
  return parse_formula(s, scope);
}

}  // namespace

TEST_CASE("pairing: inverse and bijectivity on the test box") {
  CHECK(cantor_pair(0, 0) == 0);
  // Frozen small table for the standard diagonal enumeration.
  CHECK(cantor_pair(1, 0) == 1);
  CHECK(cantor_pair(0, 1) == 2);
  CHECK(cantor_pair(2, 0) == 3);
  CHECK(cantor_pair(1, 1) == 4);
  CHECK(cantor_pair(0, 2) == 5);

  for (Nat a = 0; a <= 2048; ++a)
    for (Nat b = 0; b <= 2048; ++b) {
      auto [x, y] = cantor_unpair(cantor_pair(a, b));
      if (x != a || y != b) {
        REQUIRE(x == a);
        REQUIRE(y == b);
      }
    }
  for (Nat code = 0; code <= 100000; ++code) {
    auto [a, b] = cantor_unpair(code);
    if (cantor_pair(a, b) != code) REQUIRE(cantor_pair(a, b) == code);
  }
}

TEST_CASE("tuple coding: right-nested, k=1 identity") {
  std::vector<Nat> one{42};
  CHECK(encode_tuple(one) == 42);
  CHECK(decode_tuple(1, 42) == std::vector<Nat>{42});

  std::vector<Nat> xs{7, 4};
  CHECK(encode_tuple(xs) == cantor_pair(7, 4));
  CHECK(decode_tuple(2, encode_tuple(xs)) == xs);

  std::vector<Nat> t3{2, 7, 4};
  CHECK(encode_tuple(t3) == cantor_pair(2, cantor_pair(7, 4)));
  CHECK(decode_tuple(3, encode_tuple(t3)) == t3);

  for (Nat a = 0; a <= 64; ++a)
    for (Nat b = 0; b <= 64; ++b) {
      std::vector<Nat> v{a, b};
      if (decode_tuple(2, encode_tuple(v)) != v) REQUIRE(decode_tuple(2, encode_tuple(v)) == v);
    }
}

TEST_CASE("terms: evaluation basics") {
  Env env{{"x", 2}, {"y", 7}, {"c", 5}};
  CHECK(eval_term(t_parse("x + c", {"x", "c"}), env) == 7);
  CHECK(eval_term(t_parse("y * c", {"y", "c"}), env) == 35);
  CHECK(eval_term(t_parse("3 - 5", {}), env) == 0);   // truncated
  CHECK(eval_term(t_parse("5 - 3", {}), env) == 2);
  CHECK(eval_term(t_parse("p0(<2,3>)", {}), env) == 2);
  CHECK(eval_term(t_parse("p1(<2,3>)", {}), env) == 3);
  CHECK(eval_term(t_parse("proj_3_2(tup_3(4,7,9))", {}), env) == 7);
  CHECK(eval_term(t_parse("proj_1_1(tup_1(x))", {"x"}), env) == 2);
  CHECK(eval_term(t_parse("(x + 1) * 2", {"x"}), env) == 6);
  CHECK(eval_term(t_parse("x + 1 * 2", {"x"}), env) == 4);   // * binds tighter
  CHECK(eval_term(t_parse("7 - 2 + 1", {}), env) == 6);      // left assoc
}

TEST_CASE("terms: evaluation errors") {
  Env empty;
  CHECK_THROWS_AS(eval_term(TermExpr::variable("q"), empty), eval_error);
  // 2^40 * 2^40 leaves the 64-bit range.
  TermExpr big = TermExpr::mul(TermExpr::constant(Nat(1) << 40), TermExpr::constant(Nat(1) << 40));
  CHECK_THROWS_AS(eval_term(big, empty), eval_error);
  TermExpr big_add =
      TermExpr::add(TermExpr::constant(~Nat(0)), TermExpr::constant(1));
  CHECK_THROWS_AS(eval_term(big_add, empty), eval_error);
}

TEST_CASE("env: shadowing") {
  Env env;
  env.push("v", 1);
  env.push("v", 2);
  CHECK(eval_term(TermExpr::variable("v"), env) == 2);
  env.pop();
  CHECK(eval_term(TermExpr::variable("v"), env) == 1);
  CHECK_FALSE(env.lookup("w").has_value());
}

TEST_CASE("formulas: evaluation basics") {
  Env env{{"x", 2}, {"y", 7}, {"c", 5}};
  CHECK(eval_formula(f_parse("y = x + c", {"x", "y", "c"}), env));
  CHECK_FALSE(eval_formula(f_parse("y < x", {"x", "y"}), env));
  CHECK(eval_formula(f_parse("x <= 2 && ! (c = 4)", {"x", "c"}), env));
  CHECK(eval_formula(f_parse("forall v <= 3 . v - 5 = 0", {}), env));
  CHECK(eval_formula(f_parse("exists v <= c . v * 2 = 8", {"c"}), env));
  CHECK_FALSE(eval_formula(f_parse("exists v <= c . v * 2 = 12", {"c"}), env));
  // Implication, right associative.
  CHECK(eval_formula(f_parse("0 < 0 -> 0 < 0 -> 0 = 0", {}), env));
  CHECK(eval_formula(f_parse("x = 2 -> y = 7", {"x", "y"}), env));
  CHECK_FALSE(eval_formula(f_parse("x = 2 -> y = 8", {"x", "y"}), env));
}

TEST_CASE("formulas: precedence and grouping") {
  Env env{{"a", 0}, {"b", 1}};
  // || binds looser than &&.
  CHECK(eval_formula(f_parse("a = 0 || b = 0 && b = 2", {"a", "b"}), env));
  CHECK_FALSE(eval_formula(f_parse("(a = 0 || b = 0) && b = 2", {"a", "b"}), env));
  // ! applies to the nearest atom.
  CHECK(eval_formula(f_parse("! a = 1 && b = 1", {"a", "b"}), env));
  // Quantifier body reaches maximally right.
  CHECK(eval_formula(f_parse("exists v <= 3 . v = 2 && v + 1 = 3", {}), env));
  CHECK(eval_formula(f_parse("(exists v <= 3 . v = 9) || b = 1", {"a", "b"}), env));
}

TEST_CASE("formulas: bounded quantifiers match explicit expansion") {
  std::mt19937_64 rng(0xd51);
  for (int round = 0; round < 200; ++round) {
    Nat bound = rng() % 6;
    Nat m = rng() % 5;
    Nat r = rng() % 7;
    // phi(v) := (v * m) - r <= v  with random small parameters
    QFFormula phi = QFFormula::cmp(
        QFFormula::CmpOp::le,
        TermExpr::monus(TermExpr::mul(TermExpr::variable("v"), TermExpr::constant(m)),
                        TermExpr::constant(r)),
        TermExpr::variable("v"));
    QFFormula ex = QFFormula::exists("v", TermExpr::constant(bound), phi);
    QFFormula fa = QFFormula::forall("v", TermExpr::constant(bound), phi);
    bool any = false, all = true;
    for (Nat v = 0; v <= bound; ++v) {
      std::map<std::string, TermExpr> subst{{"v", TermExpr::constant(v)}};
      Env empty;
      bool val = eval_formula(substitute(phi, subst), empty);
      any = any || val;
      all = all && val;
    }
    Env empty;
    CHECK(eval_formula(ex, empty) == any);
    CHECK(eval_formula(fa, empty) == all);
  }
}

TEST_CASE("substitution: capture avoidance") {
  // (exists v <= 3 . !(v = x))[x := v] must not capture the inserted v.
  QFFormula f = f_parse("exists v <= 3 . ! (v = x)", {"x"});
  std::map<std::string, TermExpr> subst{{"x", TermExpr::variable("v")}};
  QFFormula g = substitute(f, subst);
  Env env{{"v", 9}};
  CHECK(eval_formula(g, env));  // naive capture would yield exists v. v != v
  CHECK(free_variables(g) == std::set<std::string>{"v"});
}

TEST_CASE("free variables") {
  QFFormula f = f_parse("exists v <= c . v = x", {"c", "x"});
  CHECK(free_variables(f) == std::set<std::string>{"c", "x"});
  TermExpr t = t_parse("<a, b> + p0(a)", {"a", "b"});
  CHECK(free_variables(t) == std::set<std::string>{"a", "b"});
}

TEST_CASE("render/parse round trip on random ASTs") {
  std::mt19937_64 rng(0x3ad7);
  std::vector<std::string> scope{"x", "y", "c"};

  // Random term generator over the full constructor set.
  auto rand_term = [&](auto&& self, unsigned depth) -> TermExpr {
    if (depth == 0 || rng() % 3 == 0) {
      if (rng() % 2) return TermExpr::constant(rng() % 50);
      return TermExpr::variable(scope[rng() % scope.size()]);
    }
    switch (rng() % 8) {
      case 0: return TermExpr::add(self(self, depth - 1), self(self, depth - 1));
      case 1: return TermExpr::monus(self(self, depth - 1), self(self, depth - 1));
      case 2: return TermExpr::mul(self(self, depth - 1), self(self, depth - 1));
      case 3: return TermExpr::pair(self(self, depth - 1), self(self, depth - 1));
      case 4: return TermExpr::proj0(self(self, depth - 1));
      case 5: return TermExpr::proj1(self(self, depth - 1));
      case 6: {
        std::vector<TermExpr> parts;
        for (int i = 0; i < 3; ++i) parts.push_back(self(self, depth - 1));
        return TermExpr::tuple(3, std::move(parts));
      }
      default:
        return TermExpr::project(2, 1 + rng() % 2, self(self, depth - 1));
    }
  };

  auto rand_formula = [&](auto&& self, unsigned depth) -> QFFormula {
    if (depth == 0 || rng() % 3 == 0) {
      auto op = static_cast<QFFormula::CmpOp>(rng() % 3);
      return QFFormula::cmp(op, rand_term(rand_term, 1), rand_term(rand_term, 1));
    }
    switch (rng() % 5) {
      case 0: return QFFormula::neg(self(self, depth - 1));
      case 1: return QFFormula::conj(self(self, depth - 1), self(self, depth - 1));
      case 2: return QFFormula::disj(self(self, depth - 1), self(self, depth - 1));
      case 3: return QFFormula::impl(self(self, depth - 1), self(self, depth - 1));
      default: {
        std::string v = "q";
        return QFFormula::exists(v, rand_term(rand_term, 1), self(self, depth - 1));
      }
    }
  };

  for (int i = 0; i < 300; ++i) {
    TermExpr t = rand_term(rand_term, 3);
    CHECK(structurally_equal(parse_term(render_term(t), scope), t));
  }
  for (int i = 0; i < 300; ++i) {
    QFFormula f = rand_formula(rand_formula, 3);
    std::vector<std::string> wide = scope;
    wide.push_back("q");  // bound var may leak into scope check harmlessly
    CHECK(structurally_equal(parse_formula(render_formula(f), wide), f));
  }
}

TEST_CASE("documents: declarations, herbrand and sigma2 blocks, comments") {
  const std::string src = R"(
# sample document
A(x, y, c) := y = x + c;
B(z, u, c) := z = c;
phi(x1, x2) := x1 = 4 && x2 = 0;

herbrand {
  r = 1;
  t0 = 0;
  s0 = c + 1;
  t1 = a0;
  s1 = c;
}

sigma2 {
  z0 = c + 1;
  z1 = c;
}
)";
  Document doc = parse_document(src);
  CHECK(doc.decls.size() == 3);
  REQUIRE(doc.find("A") != nullptr);
  REQUIRE(doc.find("phi") != nullptr);
  CHECK(doc.find("nope") == nullptr);
  CHECK(doc.find("A")->params == std::vector<std::string>{"x", "y", "c"});

  REQUIRE(doc.herbrand.has_value());
  CHECK(doc.herbrand->rank == 1);
  REQUIRE(doc.herbrand->t_terms.size() == 2);
  REQUIRE(doc.herbrand->s_terms.size() == 2);
  CHECK(render_term(doc.herbrand->t_terms[1]) == "a0");

  REQUIRE(doc.sigma2.has_value());
  CHECK(doc.sigma2->candidates.size() == 2);

  Delta2Spec spec = spec_from_document(doc);
  Env env{{"x", 3}, {"y", 8}, {"c", 5}};
  CHECK(eval_formula(spec.matrix_a, env));
}

TEST_CASE("documents: parse errors carry positions and reasons") {
  CHECK_THROWS_AS(parse_document("A(x,y,c) := y = ;"), parse_error);
  CHECK_THROWS_AS(parse_document("A(x,y,c) := y = q;"), parse_error);      // unbound
  CHECK_THROWS_AS(parse_document("B(z,u,c) := exists v . v = c;"), parse_error);  // unbounded
  CHECK_THROWS_AS(parse_document("A(x,y,c) = y = x;"), parse_error);       // := missing
  CHECK_THROWS_AS(parse_document("herbrand { r = 1; t0 = 0; s0 = c; }"), parse_error);  // missing t1/s1
  CHECK_THROWS_AS(parse_formula("exists v <= v . v = 0", {}), parse_error);  // bound sees outer scope only

  // The last declaration may omit the trailing semicolon.
  Document d = parse_document("A(x,y,c) := y = x + c;\nB(z,u,c) := z = c");
  CHECK(d.decls.size() == 2);
}

TEST_CASE("spec extraction: parameter discipline") {
  CHECK_THROWS_AS(parse_spec("A(x,y) := y = x; B(z,u,c) := z = c;"), parse_error);
  CHECK_THROWS_AS(parse_spec("A(x,y,c) := y = x;"), parse_error);  // B missing
  CHECK_THROWS_AS(parse_spec("A(a,b,c) := b = a; B(z,u,c) := z = c;"), parse_error);
  Delta2Spec ok = parse_spec("A(x,y,c) := y = x + c; B(z,u,c) := z = c");
  Env env{{"z", 4}, {"u", 0}, {"c", 4}};
  CHECK(eval_formula(ok.matrix_b, env));
}

TEST_CASE("combined matrix p") {
  // B a tautology makes p a tautology.
  Delta2Spec taut = parse_spec("A(x,y,c) := y = x; B(z,u,c) := u = u;");
  QFFormula p1 = combine_to_p(taut);
  std::mt19937_64 rng(0xfab);
  for (int i = 0; i < 50; ++i) {
    Env env{{"x", rng() % 1000}, {"y", rng() % 1000}, {"c", rng() % 50}};
    CHECK(eval_formula(p1, env));
  }

  // A true-matrix and B false-matrix make p identically false.
  Delta2Spec anti = parse_spec("A(x,y,c) := 0 = 0; B(z,u,c) := 0 < 0;");
  QFFormula p2 = combine_to_p(anti);
  for (int i = 0; i < 50; ++i) {
    Env env{{"x", rng() % 1000}, {"y", rng() % 1000}, {"c", rng() % 50}};
    CHECK_FALSE(eval_formula(p2, env));
  }

  // Against direct evaluation of the implication at random points.
  Delta2Spec spec = parse_spec("A(x,y,c) := y = x + c; B(z,u,c) := z = c;");
  QFFormula p = combine_to_p(spec);
  CHECK(free_variables(p) == std::set<std::string>{"c", "x", "y"});
  for (int i = 0; i < 100; ++i) {
    Nat x = rng() % 5000, y = rng() % 5000, c = rng() % 60;
    auto [x0, x1] = cantor_unpair(x);
    auto [y0, y1] = cantor_unpair(y);
    bool a_part = (y0 == x0 + c);
    bool b_part = (x1 == c);
    Env env{{"x", x}, {"y", y}, {"c", c}};
    CHECK(eval_formula(p, env) == (!a_part || b_part));
  }
}

TEST_CASE("brute_truth: frozen verdicts") {
  Delta2Spec s1 = parse_spec("A(x,y,c) := y = x + c; B(z,u,c) := z = c;");
  CHECK(brute_truth(s1, 4, 10) == Truth::yes);

  Delta2Spec s2 = parse_spec("A(x,y,c) := 0 < 0; B(z,u,c) := 0 < 0;");
  CHECK(brute_truth(s2, 0, 10) == Truth::no);
  CHECK(brute_truth(s2, 7, 10) == Truth::no);

  // Least satisfying z is 12: undecided at window 10, decided at 20.
  Delta2Spec s3 = parse_spec("A(x,y,c) := y = x; B(z,u,c) := z = 12;");
  CHECK(brute_truth(s3, 0, 10) == Truth::unknown);
  CHECK(brute_truth(s3, 0, 20) == Truth::yes);

  CHECK(std::string(truth_name(Truth::yes)) == "yes");
  CHECK(std::string(truth_name(Truth::no)) == "no");
  CHECK(std::string(truth_name(Truth::unknown)) == "unknown");
}
