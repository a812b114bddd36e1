#include "ordlim/limr.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "ordlim/tuple_code.hpp"

namespace ordlim {

Cmp lex_compare(std::span<const Nat> a, std::span<const Nat> b) {
  if (a.empty() || a.size() != b.size()) {
    throw std::invalid_argument(
        "lex_compare needs two tuples of the same nonzero arity");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return Cmp::LT;
    if (a[i] > b[i]) return Cmp::GT;
  }
  return Cmp::EQ;
}

LexChain::LexChain(dsl::QFFormula phi, Nat k) : phi_(std::move(phi)), k_(k) {
  if (k_ == 0) throw std::invalid_argument("chain arity must be at least 1");
  for (Nat i = 1; i <= k_ + 1; ++i) {
    names_.push_back("x" + std::to_string(i));
  }
  for (const auto& v : dsl::free_variables(phi_)) {
    if (std::find(names_.begin(), names_.end(), v) == names_.end()) {
      throw std::invalid_argument("chain formula mentions unknown variable " +
                                  v);
    }
  }
}

LexChainState LexChain::at(Nat n) {
  extend(n);
  return states_[n];
}

bool LexChain::full_witness(const std::vector<Nat>& comps) {
  dsl::Env env;
  for (std::size_t i = 0; i < comps.size(); ++i) env.push(names_[i], comps[i]);
  return dsl::eval_formula(phi_, env);
}

bool LexChain::certified_head(const std::vector<Nat>& comps) {
  // The final component only bounds the certificate search.
  for (Nat u = 0; u <= comps[k_]; ++u) {
    dsl::Env env;
    for (Nat i = 0; i < k_; ++i) env.push(names_[i], comps[i]);
    env.push(names_[k_], u);
    if (dsl::eval_formula(phi_, env)) return true;
  }
  return false;
}

bool LexChain::lex_below(Nat a, Nat b) const {
  auto k = static_cast<std::uint32_t>(k_);
  return lex_compare(decode_tuple(k, a), decode_tuple(k, b)) == Cmp::LT;
}

void LexChain::extend(Nat upto) {
  while (states_.size() <= upto) {
    Nat n = states_.size();
    auto comps = decode_tuple(static_cast<std::uint32_t>(k_ + 1), n);
    if (!least_witness_ && full_witness(comps)) least_witness_ = n;

    Nat g1;
    if (least_witness_) {
      auto wit = decode_tuple(static_cast<std::uint32_t>(k_ + 1),
                              *least_witness_);
      g1 = encode_tuple(std::span<const Nat>(wit.data(), k_));
    } else {
      g1 = n;
    }

    Nat g = certified_head(comps)
                ? encode_tuple(std::span<const Nat>(comps.data(), k_))
                : g1;

    Nat h;
    if (n == 0) {
      h = g;
    } else if (!g_collision_) {
      h = g;  // every earlier value is still distinct
    } else if (seen_g_.count(g) != 0 && lex_below(g, states_[n - 1].h)) {
      h = g;  // a repeat may enter, but only downward
    } else {
      h = states_[n - 1].h;
    }

    if (!seen_g_.insert(g).second) g_collision_ = true;

    Nat hp = least_witness_ ? h : 0;
    states_.push_back(LexChainState{n, g1, g, h, hp});
  }
}

const char* nested_limit_status_name(NestedLimitOutcome::Status s) {
  switch (s) {
    case NestedLimitOutcome::Status::ok:
      return "ok";
    case NestedLimitOutcome::Status::empty:
      return "empty";
    case NestedLimitOutcome::Status::unstable:
      return "unstable";
  }
  return "unknown";
}

NestedLimitOutcome nested_limit(const dsl::QFFormula& phi, Nat k, Nat window) {
  LexChain chain(phi, k);
  NestedLimitOutcome out;

  // Independent sweep for the windowed witness set and its least head.
  std::vector<std::string> names;
  for (Nat i = 1; i <= k + 1; ++i) names.push_back("x" + std::to_string(i));
  bool any = false;
  std::vector<Nat> best;
  for (Nat y = 0; y <= window; ++y) {
    auto comps = decode_tuple(static_cast<std::uint32_t>(k + 1), y);
    dsl::Env env;
    for (std::size_t i = 0; i < comps.size(); ++i)
      env.push(names[i], comps[i]);
    if (!dsl::eval_formula(phi, env)) continue;
    std::vector<Nat> head(comps.begin(), comps.begin() + k);
    if (!any || lex_compare(head, best) == Cmp::LT) best = head;
    any = true;
  }
  if (!any) return out;
  out.brute_minimum = best;

  out.component_settle.assign(k, 0);
  Nat prev = chain.at(0).hprime;
  for (Nat n = 1; n <= window; ++n) {
    Nat cur = chain.at(n).hprime;
    if (cur != prev) {
      out.settled_at = n;
      auto a = decode_tuple(static_cast<std::uint32_t>(k), prev);
      auto b = decode_tuple(static_cast<std::uint32_t>(k), cur);
      std::size_t d = 0;
      while (a[d] == b[d]) ++d;
      for (std::size_t i = d; i < k; ++i) out.component_settle[i] = n;
    }
    prev = cur;
  }

  out.tuple = decode_tuple(static_cast<std::uint32_t>(k), prev);
  out.status = (window > 0 && out.settled_at == window)
                   ? NestedLimitOutcome::Status::unstable
                   : NestedLimitOutcome::Status::ok;
  out.matches_brute = out.tuple == out.brute_minimum;
  return out;
}

const char* stabilization_status_name(StabilizationOutcome::Status s) {
  switch (s) {
    case StabilizationOutcome::Status::ok:
      return "ok";
    case StabilizationOutcome::Status::no_premise_witness:
      return "no_premise_witness";
    case StabilizationOutcome::Status::undetermined:
      return "undetermined";
  }
  return "unknown";
}

namespace {

struct SearchContext {
  const StabilizationInput* in;
  Nat window;
  const std::vector<Nat>* hv;
  const std::vector<Nat>* rises;       // x with h(x) < h(x+1)
  const std::vector<Nat>* suffix_min;  // least h value at or past x
  Nat tail_from;                       // least point past every rise
};

Nat eval_locator(const SearchContext& ctx, std::size_t which,
                 const std::vector<Nat>& xs, Nat b1, Nat b2) {
  dsl::Env env;
  env.push("a1", ctx.in->a1);
  env.push("a2", ctx.in->a2);
  env.push("b1", b1);
  env.push("b2", b2);
  for (std::size_t i = 0; i < xs.size(); ++i)
    env.push("x" + std::to_string(i), xs[i]);
  return dsl::eval_term(ctx.in->locators[which], env);
}

struct LevelScan {
  bool accepted = false;
  Nat b1 = 0;
  Nat b2 = 0;
  Nat best = std::numeric_limits<Nat>::max();
  bool any = false;
};

// Enumerates rise witnesses x{i} >= locator i in ascending order; at the
// level's own locator it feeds the minimization and checks the tail.
void scan_level(const SearchContext& ctx, std::size_t level,
                std::vector<Nat>& xs, Nat b1, Nat b2, LevelScan& scan) {
  if (xs.size() == level) {
    Nat m = eval_locator(ctx, level, xs, b1, b2);
    if (m > ctx.window) return;  // says nothing about the window
    scan.any = true;
    scan.best = std::min(scan.best, (*ctx.suffix_min)[m]);
    if (!scan.accepted && m >= ctx.tail_from) {
      scan.accepted = true;
      scan.b1 = b1;
      scan.b2 = b2;
    }
    return;
  }
  Nat m = eval_locator(ctx, xs.size(), xs, b1, b2);
  for (Nat x : *ctx.rises) {
    if (x < m) continue;
    xs.push_back(x);
    scan_level(ctx, level, xs, b1, b2, scan);
    xs.pop_back();
  }
}

}  // namespace

StabilizationOutcome stabilization_search(const StabilizationInput& in,
                                          Nat window) {
  if (in.locators.empty()) {
    throw std::invalid_argument("stabilization_search needs locator terms");
  }
  if (!in.h) {
    throw std::invalid_argument("stabilization_search needs a chain");
  }

  std::vector<Nat> hv(window + 1);
  for (Nat x = 0; x <= window; ++x) hv[x] = in.h(x);

  std::vector<Nat> rises;
  for (Nat x = 0; x < window; ++x) {
    if (hv[x] < hv[x + 1]) rises.push_back(x);
  }
  Nat tail_from = rises.empty() ? 0 : rises.back() + 1;

  std::vector<Nat> suffix_min(window + 1);
  suffix_min[window] = hv[window];
  for (Nat x = window; x > 0; --x) {
    suffix_min[x - 1] = std::min(hv[x - 1], suffix_min[x]);
  }

  std::vector<std::pair<Nat, Nat>> pairs;
  for (Nat code = 0; code <= window; ++code) {
    auto [b1, b2] = cantor_unpair(code);
    dsl::Env e1{{"x", in.a1}, {"y", b1}};
    dsl::Env e2{{"x", in.a2}, {"y", b2}};
    if (dsl::eval_formula(in.theta1, e1) && dsl::eval_formula(in.theta2, e2)) {
      pairs.emplace_back(b1, b2);
    }
  }

  StabilizationOutcome out;
  if (pairs.empty()) {
    out.status = StabilizationOutcome::Status::no_premise_witness;
    return out;
  }

  SearchContext ctx{&in, window, &hv, &rises, &suffix_min, tail_from};
  for (std::size_t level = 0; level < in.locators.size(); ++level) {
    LevelScan scan;
    for (const auto& [b1, b2] : pairs) {
      std::vector<Nat> xs;
      scan_level(ctx, level, xs, b1, b2, scan);
    }
    if (scan.accepted) {
      out.status = StabilizationOutcome::Status::ok;
      out.level = level;
      out.value = scan.best;
      out.b1 = scan.b1;
      out.b2 = scan.b2;
      out.matches_observed = scan.best == hv[window];
      return out;
    }
  }
  return out;
}

}  // namespace ordlim
