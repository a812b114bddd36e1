#include "ordlim/derivation.hpp"

#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ordlim/tuple_code.hpp"

namespace ordlim {

TreeAddress TreeAddress::child(Nat n) const {
  auto p = path;
  p.push_back(n);
  return TreeAddress{std::move(p)};
}

TreeAddress TreeAddress::parent() const {
  if (path.empty()) throw std::logic_error("the root has no parent");
  auto p = path;
  p.pop_back();
  return TreeAddress{std::move(p)};
}

TreeAddress TreeAddress::bump() const {
  if (path.empty()) return *this;
  auto p = path;
  ++p.back();
  return TreeAddress{std::move(p)};
}

std::string TreeAddress::render() const {
  std::string out = "<";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(path[i]);
  }
  out += '>';
  return out;
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::intro_true: return "Int";
    case Rule::exists: return "Exists";
    case Rule::forall: return "Forall";
    case Rule::repeat: return "Rep";
  }
  return "?";
}

namespace {

// Address lengths cycle through the sweep: an existential introduction, the
// forall it feeds, an instance, and (below a false instance) a repetition
// before the next forall. Free child indices sit at positions 1 mod 3.
enum class Slot { root, forall, instance, repeat_link };

Slot slot_of(Nat len) {
  if (len == 0) return Slot::root;
  switch (len % 3) {
    case 1: return Slot::forall;
    case 2: return Slot::instance;
    default: return Slot::repeat_link;
  }
}

Ordinal omega_times(Nat m) {
  if (m == 0) return Ordinal{};
  return Ordinal::from_terms({Ordinal::Term{Ordinal::finite(1), Coeff(m)}});
}

Ordinal plus_fin(const Ordinal& a, Nat n) { return add(a, Ordinal::finite(n)); }

constexpr const char* kExhausted = "candidate sweep exhausted past the verified bound";

}  // namespace

struct Derivation::Impl {
  Kind kind = Kind::combined;
  dsl::QFFormula matrix;      // instance matrix: combined p(x,y,c) or B(z,u,c)
  dsl::QFFormula wit_matrix;  // combined form only: the raw A matrix
  Nat c = 0;
  Nat x_bound = 0;
  Ordinal k_bound;

  // Walk state, grown on demand; stage w lives at index w.
  mutable std::mutex mu;
  mutable std::vector<TreeAddress> addrs;
  mutable std::vector<Nat> fvals;
  mutable std::vector<Ordinal> hvals;
  mutable bool wit_seen = false;  // an A witness appeared in the current block
  mutable bool side_cur = false;  // instance truth at the current position

  bool instance_true(Nat cand, Nat inst) const {
    if (kind == Kind::combined) {
      return dsl::eval_formula(matrix, dsl::Env{{"x", cand}, {"y", inst}, {"c", c}});
    }
    return dsl::eval_formula(matrix, dsl::Env{{"z", cand}, {"u", inst}, {"c", c}});
  }

  // Whether instance j supplies the A-side witness for this candidate.
  bool wit_true(Nat cand, Nat j) const {
    return dsl::eval_formula(wit_matrix, dsl::Env{{"x", cantor_unpair(cand).first},
                                                  {"y", cantor_unpair(j).first},
                                                  {"c", c}});
  }

  Ordinal ord_at(Nat len) const {
    switch (slot_of(len)) {
      case Slot::root:
        return plus_fin(omega_times(x_bound + 1), 1);
      case Slot::forall: {
        Nat k = (len - 1) / 3;
        if (k > x_bound) throw resource_error(kExhausted);
        return omega_times(x_bound + 1 - k);
      }
      case Slot::instance: {
        Nat k = (len - 2) / 3;
        if (k > x_bound) throw resource_error(kExhausted);
        return plus_fin(omega_times(x_bound - k), 2);
      }
      case Slot::repeat_link: {
        Nat k = len / 3 - 1;
        if (k >= x_bound) throw resource_error(kExhausted);  // continuation needs candidate k+1
        return plus_fin(omega_times(x_bound - k), 1);
      }
    }
    throw std::logic_error("unreachable");
  }

  bool address_in_tree(const TreeAddress& a) const {
    const auto& p = a.path;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i % 3 != 1 && p[i] != 0) return false;
    }
    // Every proper instance prefix must continue: its displayed instance is
    // false and the sweep still has candidates left.
    for (Nat len = 2; len < p.size(); ++len) {
      if (len % 3 != 2) continue;
      Nat k = (len - 2) / 3;
      if (instance_true(k, p[len - 1])) return false;
      if (k >= x_bound) throw resource_error(kExhausted);
    }
    return true;
  }

  std::string render_instance(Nat cand, Nat inst) const {
    std::map<std::string, dsl::TermExpr> s;
    s[kind == Kind::combined ? "x" : "z"] = dsl::TermExpr::constant(cand);
    s[kind == Kind::combined ? "y" : "u"] = dsl::TermExpr::constant(inst);
    s["c"] = dsl::TermExpr::constant(c);
    return dsl::render_formula(dsl::substitute(matrix, s));
  }

  std::string render_block(Nat cand) const {
    std::map<std::string, dsl::TermExpr> s;
    s[kind == Kind::combined ? "x" : "z"] = dsl::TermExpr::constant(cand);
    s["c"] = dsl::TermExpr::constant(c);
    return std::string(kind == Kind::combined ? "forall y . " : "forall u . ") +
           dsl::render_formula(dsl::substitute(matrix, s));
  }

  std::string render_goal() const {
    std::map<std::string, dsl::TermExpr> s;
    s["c"] = dsl::TermExpr::constant(c);
    return std::string(kind == Kind::combined ? "exists x . forall y . "
                                              : "exists z . forall u . ") +
           dsl::render_formula(dsl::substitute(matrix, s));
  }

  void ensure(Nat w) const {
    if (addrs.empty()) {
      addrs.emplace_back();
      side_cur = false;
      if (kind == Kind::combined) {
        fvals.push_back(1);
        hvals.push_back(scale_finite(3, ord_at(0)));
      } else {
        fvals.push_back(0);
        hvals.push_back(ord_at(0));
      }
    }
    while (addrs.size() <= w) step();
  }

  void step() const {
    const TreeAddress& cur = addrs.back();
    bool at_instance = slot_of(cur.length()) == Slot::instance;
    TreeAddress next = (at_instance && side_cur) ? cur.bump() : cur.child(0);
    Nat nlen = next.length();
    Slot ns = slot_of(nlen);
    Nat fp = fvals.back();
    Nat f2 = 0;
    Ordinal h2;
    if (ns == Slot::instance) {
      Nat k = (nlen - 2) / 3;
      Nat n = next.last();
      bool side = instance_true(k, n);
      side_cur = side;
      if (kind == Kind::combined) {
        if (n == 0) wit_seen = false;
        if (!wit_seen && wit_true(k, n)) wit_seen = true;
        f2 = (side && wit_seen) ? 0 : 1;
        // The tripled ordinal leaves offsets 2 -> 1 -> 0 for the at most two
        // value changes a block may see.
        Ordinal base = scale_finite(3, ord_at(nlen));
        if (n == 0) {
          h2 = plus_fin(base, 2);
        } else if (f2 == fp) {
          h2 = hvals.back();
        } else if (fp == 1 && f2 == 0) {
          h2 = plus_fin(base, 1);
        } else {
          h2 = base;
        }
      } else {
        f2 = k;
        h2 = ord_at(nlen);
      }
    } else {
      side_cur = false;
      if (kind == Kind::combined) {
        f2 = fp == 0 ? 1 : 0;
        h2 = scale_finite(3, ord_at(nlen));
      } else {
        f2 = 0;
        h2 = ord_at(nlen);
      }
    }
    addrs.push_back(std::move(next));
    fvals.push_back(f2);
    hvals.push_back(std::move(h2));
  }

  Nat f_at(Nat cq, Nat w) const {
    require_parameter(cq);
    std::lock_guard<std::mutex> lock(mu);
    ensure(w);
    return fvals[w];
  }

  Ordinal h_at(Nat cq, Nat w) const {
    require_parameter(cq);
    std::lock_guard<std::mutex> lock(mu);
    ensure(w);
    return hvals[w];
  }

  void require_parameter(Nat cq) const {
    if (cq != c) {
      throw std::invalid_argument("this tree is fixed at parameter " + std::to_string(c));
    }
  }
};

NodeView Derivation::node(const TreeAddress& a) const {
  const Impl& im = *impl_;
  if (!im.address_in_tree(a)) {
    throw std::invalid_argument("address not in the tree: " + a.render());
  }
  NodeView v;
  v.address = a;
  Nat len = a.length();
  v.ord = im.ord_at(len);
  switch (slot_of(len)) {
    case Slot::root:
      v.rule = Rule::exists;
      v.arity = Arity::one;
      v.block = 0;
      v.main = im.render_goal();
      break;
    case Slot::forall: {
      Nat k = (len - 1) / 3;
      v.rule = Rule::forall;
      v.arity = Arity::omega;
      v.block = k;
      v.main = im.render_block(k);
      break;
    }
    case Slot::instance: {
      Nat k = (len - 2) / 3;
      v.block = k;
      v.index = a.last();
      v.side_true = im.instance_true(k, a.last());
      v.side = im.render_instance(k, a.last());
      if (v.side_true) {
        v.rule = Rule::intro_true;
        v.arity = Arity::leaf;
        v.main = v.side;
      } else {
        v.rule = Rule::exists;  // introduces candidate k+1
        v.arity = Arity::one;
        v.main = im.render_goal();
      }
      break;
    }
    case Slot::repeat_link: {
      Nat k = len / 3 - 1;
      v.rule = Rule::repeat;
      v.arity = Arity::one;
      v.block = k + 1;
      v.main = im.render_block(k + 1);
      break;
    }
  }
  return v;
}

bool Derivation::eval_side(const TreeAddress& a) const {
  if (slot_of(a.length()) != Slot::instance) {
    throw std::invalid_argument("not an instance position: " + a.render());
  }
  return impl_->instance_true((a.length() - 2) / 3, a.last());
}

Ordinal Derivation::bound() const { return impl_->k_bound; }

bool Derivation::contains(const TreeAddress& a) const { return impl_->address_in_tree(a); }

Derivation::Kind Derivation::kind() const { return impl_->kind; }

Nat Derivation::parameter() const { return impl_->c; }

Nat Derivation::candidate_bound() const { return impl_->x_bound; }

namespace {

// Shared factory tail: verify that some candidate survives the audit window
// so the lazy tree never runs off the sweep.
void verify_candidate(const Derivation::Impl& im, Nat check_window) {
  for (Nat k = 0; k <= im.x_bound; ++k) {
    bool all = true;
    for (Nat n = 0; n <= check_window && all; ++n) all = im.instance_true(k, n);
    if (all) return;
  }
  throw std::invalid_argument("no candidate up to " + std::to_string(im.x_bound) +
                              " survives the audit window");
}

}  // namespace

Derivation canonical_derivation(const dsl::Delta2Spec& spec, Nat c, Nat x_bound,
                                Nat check_window) {
  auto impl = std::make_shared<Derivation::Impl>();
  impl->kind = Derivation::Kind::combined;
  impl->matrix = dsl::combine_to_p(spec);
  impl->wit_matrix = spec.matrix_a;
  impl->c = c;
  impl->x_bound = x_bound;
  impl->k_bound = omega_times(x_bound + 2);
  verify_candidate(*impl, check_window);
  return Derivation(std::move(impl));
}

Derivation canonical_sigma2_derivation(const dsl::QFFormula& matrix_b, Nat c, Nat z_bound,
                                       Nat check_window) {
  auto impl = std::make_shared<Derivation::Impl>();
  impl->kind = Derivation::Kind::one_block;
  impl->matrix = matrix_b;
  impl->wit_matrix = dsl::QFFormula::truth();
  impl->c = c;
  impl->x_bound = z_bound;
  impl->k_bound = omega_times(z_bound + 2);
  verify_candidate(*impl, check_window);
  return Derivation(std::move(impl));
}

std::optional<Nat> find_witness_bound(const dsl::Delta2Spec& spec, Nat c, Nat audit_window,
                                      Nat cap) {
  auto p = dsl::combine_to_p(spec);
  for (Nat x = 0; x <= cap; ++x) {
    bool all = true;
    for (Nat n = 0; n <= audit_window && all; ++n) {
      all = dsl::eval_formula(p, dsl::Env{{"x", x}, {"y", n}, {"c", c}});
    }
    if (all) return x;
  }
  return std::nullopt;
}

std::optional<Nat> find_sigma2_witness_bound(const dsl::QFFormula& matrix_b, Nat c,
                                             Nat audit_window, Nat cap) {
  for (Nat z = 0; z <= cap; ++z) {
    bool all = true;
    for (Nat u = 0; u <= audit_window && all; ++u) {
      all = dsl::eval_formula(matrix_b, dsl::Env{{"z", z}, {"u", u}, {"c", c}});
    }
    if (all) return z;
  }
  return std::nullopt;
}

AuditVerdict audit_local_correctness(const NodeSource& d, Nat depth_budget, Nat width_budget) {
  auto fail = [](TreeAddress a, std::string detail) {
    return AuditVerdict{false, std::move(a), std::move(detail)};
  };
  const Ordinal top = d.bound();
  {
    auto root = d.node(TreeAddress{});
    if (!(root.ord < top)) return fail({}, "root ordinal is not below the tree bound");
  }
  std::vector<TreeAddress> stack;
  stack.emplace_back();
  while (!stack.empty()) {
    TreeAddress a = std::move(stack.back());
    stack.pop_back();
    NodeView v = d.node(a);
    switch (v.rule) {
      case Rule::intro_true:
        if (v.arity != Arity::leaf) return fail(a, "closed instances must be leaves");
        break;
      case Rule::exists:
      case Rule::repeat:
        if (v.arity != Arity::one) return fail(a, "introductions carry exactly one premise");
        break;
      case Rule::forall:
        if (v.arity != Arity::omega) return fail(a, "a forall must branch over all instances");
        break;
    }
    if (v.index.has_value()) {
      bool actual = d.eval_side(a);
      if (v.side_true != actual) {
        return fail(a, "reported instance truth disagrees with evaluation");
      }
      if (actual && v.rule != Rule::intro_true) {
        return fail(a, "a true instance must close the branch");
      }
      if (!actual && v.rule != Rule::exists) {
        return fail(a, "a false instance must continue the sweep");
      }
    } else if (v.rule == Rule::intro_true) {
      return fail(a, "only instance positions may close");
    }
    if (a.length() >= depth_budget) continue;
    if (v.arity == Arity::one) {
      TreeAddress ca = a.child(0);
      NodeView ch = d.node(ca);
      if (!(ch.ord < v.ord)) return fail(ca, "child ordinal is not below its parent");
      stack.push_back(std::move(ca));
    } else if (v.arity == Arity::omega) {
      std::optional<Ordinal> shared;
      for (Nat n = 0; n < width_budget; ++n) {
        TreeAddress ca = a.child(n);
        NodeView ch = d.node(ca);
        if (!(ch.ord < v.ord)) return fail(ca, "child ordinal is not below its parent");
        if (shared.has_value() && ch.ord != *shared) {
          return fail(ca, "forall children must share one ordinal");
        }
        if (!shared.has_value()) shared = ch.ord;
        stack.push_back(std::move(ca));
      }
    }
  }
  return {};
}

TreeAddress trace_address(const Derivation& d, Nat w) {
  const auto& im = *d.impl_;
  std::lock_guard<std::mutex> lock(im.mu);
  im.ensure(w);
  return im.addrs[w];
}

WitnessPair extract_pair(const Derivation& d) {
  auto im = d.impl_;
  if (im->kind != Derivation::Kind::combined) {
    throw std::invalid_argument("pair extraction expects the combined form");
  }
  WitnessPair p;
  p.provenance = Provenance::derivation;
  p.bound = scale_finite(3, im->k_bound);
  p.f = [im](Nat c, Nat w) { return im->f_at(c, w); };
  p.h = [im](Nat c, Nat w) { return im->h_at(c, w); };
  return p;
}

WitnessPair sigma2_trace_pair(const Derivation& d) {
  auto im = d.impl_;
  if (im->kind != Derivation::Kind::one_block) {
    throw std::invalid_argument("the trace pair expects the one-block form");
  }
  WitnessPair p;
  p.provenance = Provenance::derivation;
  p.bound = im->k_bound;
  p.f = [im](Nat c, Nat w) { return im->f_at(c, w); };
  p.h = [im](Nat c, Nat w) { return im->h_at(c, w); };
  return p;
}

BlockChangeVerdict analyze_block_run(const std::vector<Nat>& fs, bool ended_by_descent,
                                     bool truncated) {
  BlockChangeVerdict v;
  Nat changes = 0;
  std::optional<Nat> rise;
  for (std::size_t i = 1; i < fs.size(); ++i) {
    if (fs[i] == fs[i - 1]) continue;
    ++changes;
    if (changes > 2) {
      v.ok = false;
      v.at = i;
      v.detail = "more than two value changes within one block";
      return v;
    }
    if (fs[i - 1] == 0) rise = i;
  }
  if (rise.has_value()) {
    if (*rise + 1 != fs.size()) {
      v.ok = false;
      v.at = rise;
      v.detail = "a rise from zero may only happen at the block exit";
    } else if (!ended_by_descent && !truncated) {
      v.ok = false;
      v.at = rise;
      v.detail = "a rise from zero must be followed by a descent";
    }
  }
  return v;
}

BlockChangeVerdict check_forall_block_changes(const Derivation& d, Nat window) {
  const auto& im = *d.impl_;
  std::lock_guard<std::mutex> lock(im.mu);
  im.ensure(window);
  std::vector<Nat> run;
  Nat begin = 0;
  auto flush = [&](bool desc, bool cut) {
    auto v = analyze_block_run(run, desc, cut);
    if (!v.ok && v.at.has_value()) *v.at += begin;
    run.clear();
    return v;
  };
  for (Nat w = 0; w <= window; ++w) {
    if (slot_of(im.addrs[w].length()) != Slot::instance) continue;
    if (run.empty()) begin = w;
    run.push_back(im.fvals[w]);
    bool descends = w < window && im.addrs[w + 1].length() == im.addrs[w].length() + 1;
    if (descends) {
      auto v = flush(true, false);
      if (!v.ok) return v;
    }
  }
  if (!run.empty()) {
    auto v = flush(false, true);
    if (!v.ok) return v;
  }
  return {};
}

SigmaBoundVerdict check_sigma_elementary_bound(const Derivation& d, Nat window) {
  const auto& im = *d.impl_;
  std::lock_guard<std::mutex> lock(im.mu);
  im.ensure(window);
  for (Nat w = 0; w <= window; ++w) {
    const auto& a = im.addrs[w];
    bool ok = a.length() <= w;
    for (Nat comp : a.path) ok = ok && comp <= w;
    if (!ok) return {false, w};
  }
  return {};
}

}  // namespace ordlim
