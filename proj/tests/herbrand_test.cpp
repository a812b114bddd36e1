#include <doctest/doctest.h>

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ordlim/dsl.hpp"
#include "ordlim/herbrand.hpp"
#include "ordlim/ordinal.hpp"
#include "ordlim/witness.hpp"
#include "support.hpp"

using namespace ordlim;

namespace {

struct Loaded {
  dsl::Delta2Spec spec;
  HerbrandCertificate cert;
};

Loaded load_cert(const std::string& name) {
  dsl::Document doc = testsupport::load_corpus(name);
  REQUIRE(doc.herbrand.has_value());
  return {dsl::spec_from_document(doc), HerbrandCertificate::from_block(*doc.herbrand)};
}

const std::vector<std::string> kCertCorpus = {
    "add_shift.d2",    "parity_shift.d2", "interval_fallback.d2",
    "delayed_shift.d2", "three_stage.d2",  "ge_window.d2",
};

// Direct transcription of the staged firing condition with explicit nested
// loops; exponential in the rank, usable only for small windows. Shares no
// machinery with build_pair.
Nat naive_f(const HerbrandCertificate& cert, const dsl::Delta2Spec& spec, Nat c, Nat w) {
  std::map<std::string, Nat> chosen;
  auto eval_with = [&](const dsl::TermExpr& t) {
    dsl::Env env{{"c", c}};
    for (const auto& [k, v] : chosen) env.push(k, v);
    return dsl::eval_term(t, env);
  };
  auto holds_a = [&](Nat x, Nat y) {
    return dsl::eval_formula(spec.matrix_a, dsl::Env{{"x", x}, {"y", y}, {"c", c}});
  };
  auto holds_b = [&](Nat z, Nat u) {
    return dsl::eval_formula(spec.matrix_b, dsl::Env{{"z", z}, {"u", u}, {"c", c}});
  };
  std::function<bool(Nat)> fires = [&](Nat stage) -> bool {
    Nat tv = eval_with(cert.t_terms[stage]);
    Nat sv = eval_with(cert.s_terms[stage]);
    if (tv > w || sv > w) return false;
    std::vector<Nat> wits, bads;
    for (Nat a = 0; a <= w; ++a)
      if (holds_a(tv, a)) wits.push_back(a);
    for (Nat b = 0; b <= w; ++b)
      if (!holds_b(sv, b)) bads.push_back(b);
    if (!wits.empty() && bads.empty()) return true;
    if (stage == cert.rank) return false;
    for (Nat a : wits) {
      for (Nat b : bads) {
        chosen["a" + std::to_string(stage)] = a;
        chosen["b" + std::to_string(stage)] = b;
        bool ok = fires(stage + 1);
        chosen.erase("a" + std::to_string(stage));
        chosen.erase("b" + std::to_string(stage));
        if (ok) return true;
      }
    }
    return false;
  };
  return fires(0) ? 0 : 1;
}

WitnessPair flip_pair(std::vector<Nat> fv, Nat k) {
  WitnessPair p;
  p.provenance = Provenance::external;
  p.bound = Ordinal::finite(Coeff(k));
  p.f = [fv](Nat, Nat w) { return fv[std::min<std::size_t>(w, fv.size() - 1)]; };
  p.h = [](Nat, Nat) { return Ordinal(); };
  return p;
}

}  // namespace

TEST_CASE("certificate structure: variable discipline") {
  dsl::Document good = testsupport::load_corpus("interval_fallback.d2");
  CHECK_NOTHROW(HerbrandCertificate::from_block(*good.herbrand));

  // t0 may not mention a0: only strictly earlier stages are in scope.
  dsl::Document bad = dsl::parse_document(
      "A(x,y,c) := y = x; B(z,u,c) := z = c;"
      "herbrand { r = 0; t0 = a0; s0 = c; }");
  CHECK_THROWS_AS(HerbrandCertificate::from_block(*bad.herbrand), std::invalid_argument);

  // s1 may mention a0 and b0 but not b1.
  dsl::Document bad2 = dsl::parse_document(
      "A(x,y,c) := y = x; B(z,u,c) := z = c;"
      "herbrand { r = 1; t0 = 0; s0 = c; t1 = a0; s1 = b1; }");
  CHECK_THROWS_AS(HerbrandCertificate::from_block(*bad2.herbrand), std::invalid_argument);

  dsl::HerbrandBlock truncated;
  truncated.rank = 1;
  truncated.t_terms.push_back(dsl::TermExpr::constant(0));
  truncated.s_terms.push_back(dsl::TermExpr::constant(0));
  CHECK_THROWS_AS(HerbrandCertificate::from_block(truncated), std::invalid_argument);
}

TEST_CASE("check_certificate: corpus passes, wrong locator fails") {
  for (const auto& name : kCertCorpus) {
    Loaded l = load_cert(name);
    CertificateCheck chk = check_certificate(l.cert, l.spec, 0, 10, 30);
    INFO(name, ": ", chk.detail);
    CHECK(chk.ok);
  }

  // Swapping the correct guess for c+1 breaks the rank-0 list: B pins z to c.
  dsl::Document doc = dsl::parse_document(
      "A(x,y,c) := y = x + c; B(z,u,c) := z = c;"
      "herbrand { r = 0; t0 = 0; s0 = c + 1; }");
  Loaded l{dsl::spec_from_document(doc), HerbrandCertificate::from_block(*doc.herbrand)};
  CertificateCheck chk = check_certificate(l.cert, l.spec, 0, 5, 10);
  CHECK_FALSE(chk.ok);
  REQUIRE(chk.c.has_value());
  CHECK(*chk.c == 0);
  CHECK(chk.assignment == std::vector<Nat>{0, 0});
}

TEST_CASE("check_certificate: staged counterexample is lexicographically first") {
  // Stage 0 falsifiable only at (a0, b0) = (c+2, c+3), stage 1 then at the
  // least (a1, b1) continuing the path; here the second conclusion is made
  // falsifiable too.
  dsl::Document doc = dsl::parse_document(
      "A(x,y,c) := y = x + c + 2;"
      "B(z,u,c) := z = c && u <= c + 2;"
      "herbrand { r = 1; t0 = 0; s0 = c; t1 = b0; s1 = c * 2; }");
  Loaded l{dsl::spec_from_document(doc), HerbrandCertificate::from_block(*doc.herbrand)};
  CertificateCheck chk = check_certificate(l.cert, l.spec, 1, 5, 20);
  CHECK_FALSE(chk.ok);
  CHECK(*chk.c == 1);
  // c = 1: stage 0 needs a0 = 3 and b0 > 3; stage 1 reads t1 = b0 = 4, so
  // a1 = 7, and any b1 refutes B(2, b1, 1) since 2 != 1.
  CHECK(chk.assignment == std::vector<Nat>{3, 4, 7, 0});
}

TEST_CASE("staged search: rank-0 frozen schedules") {
  Loaded l = load_cert("add_shift.d2");
  WitnessPair p = build_pair(l.cert, l.spec);
  CHECK(p.provenance == Provenance::herbrand);
  CHECK(render_ordinal(p.bound) == "3");
  for (Nat w = 0; w <= 20; ++w) CHECK(p.f(4, w) == (w >= 4 ? 0 : 1));

  // A locator that evaluates above 0 keeps the stage silent at w = 0.
  dsl::Document doc = dsl::parse_document(
      "A(x,y,c) := y = x + c; B(z,u,c) := z = c;"
      "herbrand { r = 0; t0 = c + 1; s0 = c; }");
  Loaded shifted{dsl::spec_from_document(doc), HerbrandCertificate::from_block(*doc.herbrand)};
  CHECK(check_certificate(shifted.cert, shifted.spec, 0, 8, 20).ok);
  WitnessPair q = build_pair(shifted.cert, shifted.spec);
  CHECK(q.f(4, 0) == 1);
  // t0 = 5, its A-witness is 9: the stage fires from w = 9.
  for (Nat w = 0; w <= 20; ++w) CHECK(q.f(4, w) == (w >= 9 ? 0 : 1));
}

TEST_CASE("staged search: rank-1 engineered hand schedule") {
  // The pair (a0, b0) = (6, 4) is available from w = 6, and the second
  // stage's conclusion z = 9 fires once its locator and witness fit at w = 9.
  dsl::Document doc = dsl::parse_document(
      "A(x,y,c) := y = x;"
      "B(z,u,c) := (z = 5 && u <= 3) || z = 9;"
      "herbrand { r = 1; t0 = 6; s0 = 5; t1 = a0; s1 = 9; }");
  Loaded l{dsl::spec_from_document(doc), HerbrandCertificate::from_block(*doc.herbrand)};
  CHECK(check_certificate(l.cert, l.spec, 0, 3, 15).ok);
  WitnessPair p = build_pair(l.cert, l.spec);
  CHECK(render_ordinal(p.bound) == "5");
  for (Nat w = 0; w <= 25; ++w) CHECK(p.f(0, w) == (w >= 9 ? 0 : 1));
  // h starts at K-1 = 4 and pays the single change at w = 9.
  CHECK(render_ordinal(p.h(0, 0)) == "4");
  CHECK(render_ordinal(p.h(0, 8)) == "4");
  CHECK(render_ordinal(p.h(0, 9)) == "3");
  CHECK(render_ordinal(p.h(0, 25)) == "3");
}

TEST_CASE("staged search: corpus frozen schedules") {
  auto expect = [](const WitnessPair& p, Nat c, const std::vector<std::pair<Nat, Nat>>& runs) {
    // runs: (first w of run, value); last run extends to 40.
    for (std::size_t i = 0; i < runs.size(); ++i) {
      Nat hi = i + 1 < runs.size() ? runs[i + 1].first - 1 : 40;
      for (Nat w = runs[i].first; w <= hi; ++w) {
        INFO("c=", c, " w=", w);
        CHECK(p.f(c, w) == runs[i].second);
      }
    }
  };

  Loaded interval = load_cert("interval_fallback.d2");
  WitnessPair pi = build_pair(interval.cert, interval.spec);
  expect(pi, 7, {{0, 1}, {8, 0}, {12, 1}, {14, 0}});
  expect(pi, 2, {{0, 1}, {3, 0}});

  Loaded delayed = load_cert("delayed_shift.d2");
  WitnessPair pd = build_pair(delayed.cert, delayed.spec);
  expect(pd, 3, {{0, 1}, {5, 0}, {6, 1}, {11, 0}});
  expect(pd, 0, {{0, 1}, {2, 0}});

  Loaded three = load_cert("three_stage.d2");
  WitnessPair pt = build_pair(three.cert, three.spec);
  expect(pt, 5, {{0, 1}, {5, 0}, {6, 1}, {10, 0}, {13, 1}, {15, 0}});
  expect(pt, 3, {{0, 1}, {3, 0}, {4, 1}, {6, 0}});

  Loaded ge = load_cert("ge_window.d2");
  WitnessPair pg = build_pair(ge.cert, ge.spec);
  expect(pg, 3, {{0, 1}, {3, 0}});

  Loaded parity = load_cert("parity_interval.d2");
  WitnessPair pp = build_pair(parity.cert, parity.spec);
  expect(pp, 8, {{0, 1}, {9, 0}, {12, 1}, {16, 0}});
  expect(pp, 7, {{0, 1}});
}

TEST_CASE("staged search agrees with the direct transcription") {
  for (const auto& name : kCertCorpus) {
    Loaded l = load_cert(name);
    WitnessPair p = build_pair(l.cert, l.spec);
    Nat max_w = l.cert.rank >= 2 ? 16 : 24;
    for (Nat c : {0, 1, 2, 3, 5, 7}) {
      for (Nat w = 0; w <= max_w; ++w) {
        INFO(name, " c=", c, " w=", w);
        CHECK(p.f(c, w) == naive_f(l.cert, l.spec, c, w));
      }
    }
  }
}

TEST_CASE("build_f wrapper matches build_pair") {
  Loaded l = load_cert("delayed_shift.d2");
  auto f = build_f(l.cert, l.spec);
  WitnessPair p = build_pair(l.cert, l.spec);
  for (Nat c : {0, 2, 4})
    for (Nat w = 0; w <= 25; ++w) CHECK(f(c, w) == p.f(c, w));
}

TEST_CASE("counter: decrement on change, truncated at zero") {
  Loaded l = load_cert("delayed_shift.d2");
  WitnessPair p = build_pair(l.cert, l.spec);
  // c = 3 makes three changes (at 5, 6, 11): h walks 4, 3, 2, 1.
  CHECK(render_ordinal(p.h(3, 0)) == "4");
  CHECK(render_ordinal(p.h(3, 5)) == "3");
  CHECK(render_ordinal(p.h(3, 6)) == "2");
  CHECK(render_ordinal(p.h(3, 10)) == "2");
  CHECK(render_ordinal(p.h(3, 11)) == "1");
  CHECK(render_ordinal(p.h(3, 40)) == "1");
  // f constant (c = 0 changes once; pick w below the change): h sits at K-1.
  CHECK(render_ordinal(p.h(0, 0)) == "4");
  CHECK(render_ordinal(p.h(0, 1)) == "4");
}

TEST_CASE("pairs satisfy the two windowed contracts") {
  for (const auto& name : kCertCorpus) {
    Loaded l = load_cert(name);
    WitnessPair p = build_pair(l.cert, l.spec);
    for (Nat c = 0; c <= 8; ++c) {
      INFO(name, " c=", c);
      CHECK(check_weakly_descending(p, c, 60).ok);
      CHECK(check_lowering(p, c, 60).ok);
    }
  }
}

TEST_CASE("change bound: corpus within budget, adversary rejected") {
  Loaded interval = load_cert("interval_fallback.d2");
  WitnessPair pi = build_pair(interval.cert, interval.spec);
  ChangeBoundCheck ci = change_bound_check(pi, 0, 20, 60);
  CHECK(ci.ok);
  CHECK(ci.allowed == 3);
  CHECK(ci.worst_changes == 3);

  Loaded shift = load_cert("add_shift.d2");
  WitnessPair ps = build_pair(shift.cert, shift.spec);
  ChangeBoundCheck cs = change_bound_check(ps, 0, 20, 60);
  CHECK(cs.ok);
  CHECK(cs.allowed == 1);
  CHECK(cs.worst_changes == 1);

  Loaded three = load_cert("three_stage.d2");
  WitnessPair pt = build_pair(three.cert, three.spec);
  ChangeBoundCheck ct = change_bound_check(pt, 0, 10, 60);
  CHECK(ct.ok);
  CHECK(ct.allowed == 5);
  CHECK(ct.worst_changes == 5);

  // Four changes against the rank-1 budget of three.
  WitnessPair adv = flip_pair({1, 0, 1, 0, 1, 1}, 5);
  ChangeBoundCheck ca = change_bound_check(adv, 0, 0, 10);
  CHECK_FALSE(ca.ok);
  CHECK(ca.allowed == 3);
  CHECK(ca.worst_changes == 4);
  CHECK(ca.worst_c == 0);
}

TEST_CASE("decomposition: constant schedules") {
  Decomposition d0 = boolean_decomposition(flip_pair({0}, 3), 0);
  CHECK(d0.y(0, 5, 20));
  CHECK_FALSE(d0.n(0, 5, 20));
  CHECK(d0.combined(5, 20));

  Decomposition d1 = boolean_decomposition(flip_pair({1}, 3), 0);
  CHECK_FALSE(d1.y(0, 5, 20));
  CHECK(d1.n(0, 5, 20));
  CHECK_FALSE(d1.combined(5, 20));
}

TEST_CASE("decomposition: windowed reading of a three-change schedule") {
  Loaded delayed = load_cert("delayed_shift.d2");
  WitnessPair p = build_pair(delayed.cert, delayed.spec);
  Decomposition d = boolean_decomposition(p, 1);

  // c = 3 changes at 5 (to 0), 6 (to 1), 11 (to 0).
  CHECK_FALSE(d.y(0, 3, 20));   // f(3,0) = 1
  CHECK(d.n(0, 3, 20));
  CHECK(d.y(1, 3, 5));          // first change lands on value 0
  CHECK_FALSE(d.y(1, 3, 4));    // not yet observed at window 4
  CHECK(d.n(2, 3, 20));         // second change lands on value 1
  CHECK(d.y(3, 3, 20));
  CHECK_FALSE(d.n(3, 3, 20));   // no third change to value 1
  CHECK_FALSE(d.n(4, 3, 200));  // pinned: beyond the change budget

  // Before the last change the combination still reads "limit 1".
  CHECK_FALSE(d.combined(3, 8));
  CHECK(d.combined(3, 11));
  CHECK(d.combined(3, 200));
}

TEST_CASE("decomposition equivalence on the corpus") {
  for (const auto& name : kCertCorpus) {
    Loaded l = load_cert(name);
    WitnessPair p = build_pair(l.cert, l.spec);
    Decomposition d = boolean_decomposition(p, l.cert.rank);
    for (Nat c = 0; c <= 12; ++c) {
      LimitReport r = find_limit(p, c, 100);
      INFO(name, " c=", c);
      CHECK(d.combined(c, 100) == (r.observed_limit == 0));
    }
  }
}

TEST_CASE("observed limits match the windowed ground truth") {
  for (const auto& name : kCertCorpus) {
    Loaded l = load_cert(name);
    WitnessPair p = build_pair(l.cert, l.spec);
    for (Nat c = 0; c <= 10; ++c) {
      dsl::Truth t = dsl::brute_truth(l.spec, c, 60);
      if (t == dsl::Truth::unknown) continue;
      LimitReport r = find_limit(p, c, 60);
      INFO(name, " c=", c);
      CHECK(r.checks_reliable);
      CHECK(r.observed_limit == (t == dsl::Truth::yes ? 0 : 1));
    }
  }
}

TEST_CASE("one-block witness search: frozen runs") {
  dsl::Document doc = testsupport::load_corpus("sigma2_const.d2");
  REQUIRE(doc.sigma2.has_value());
  dsl::Delta2Spec spec = dsl::spec_from_document(doc);
  Sigma2FiniteWitness s = sigma2_witness_finite(doc.sigma2->candidates, spec.matrix_b);
  CHECK(s.pair.provenance == Provenance::herbrand);
  CHECK(render_ordinal(s.pair.bound) == "3");
  CHECK(s.pair.f(5, 0) == 6);  // opening guess is the first candidate
  for (Nat w = 1; w <= 30; ++w) CHECK(s.pair.f(5, w) == 5);
  CHECK(render_ordinal(s.pair.h(5, 0)) == "2");
  CHECK(render_ordinal(s.pair.h(5, 1)) == "1");
  CHECK(render_ordinal(s.pair.h(5, 30)) == "1");
  CHECK_FALSE(s.exhausted_at(5, 50).has_value());
  CHECK(check_weakly_descending(s.pair, 5, 50).ok);
  CHECK(check_lowering(s.pair, 5, 50).ok);

  dsl::Document jump = testsupport::load_corpus("sigma2_shift.d2");
  dsl::Delta2Spec jspec = dsl::spec_from_document(jump);
  Sigma2FiniteWitness j = sigma2_witness_finite(jump.sigma2->candidates, jspec.matrix_b);
  CHECK(render_ordinal(j.pair.bound) == "4");
  CHECK(j.pair.f(4, 0) == 4);
  for (Nat w = 1; w <= 30; ++w) CHECK(j.pair.f(4, w) == 6);  // index jumps 0 -> 2
  CHECK(render_ordinal(j.pair.h(4, 1)) == "2");
  CHECK_FALSE(j.exhausted_at(4, 50).has_value());

  // Single correct candidate: no change at all.
  Sigma2FiniteWitness k = sigma2_witness_finite(
      {dsl::parse_term("c", {"c"})}, dsl::parse_formula("z = c", {"z", "u", "c"}));
  for (Nat w = 0; w <= 20; ++w) CHECK(k.pair.f(9, w) == 9);
  CHECK(render_ordinal(k.pair.h(9, 20)) == "1");
}

TEST_CASE("one-block witness search: exhaustion and rejection") {
  dsl::QFFormula b = dsl::parse_formula("z = c", {"z", "u", "c"});
  Sigma2FiniteWitness s = sigma2_witness_finite(
      {dsl::parse_term("c + 1", {"c"}), dsl::parse_term("c + 2", {"c"})}, b);
  CHECK(s.pair.f(3, 0) == 4);
  // Both candidates die at w = 1; the value sticks at the last one.
  for (Nat w = 1; w <= 15; ++w) CHECK(s.pair.f(3, w) == 5);
  REQUIRE(s.exhausted_at(3, 20).has_value());
  CHECK(*s.exhausted_at(3, 20) == 1);
  CHECK_FALSE(s.exhausted_at(3, 0).has_value());
  CHECK(render_ordinal(s.pair.h(3, 0)) == "2");
  CHECK(render_ordinal(s.pair.h(3, 15)) == "1");

  CHECK_THROWS_AS(sigma2_witness_finite({}, b), std::invalid_argument);
}
