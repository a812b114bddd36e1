#include "ordlim/witness.hpp"

#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace ordlim {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::herbrand: return "herbrand";
    case Provenance::derivation: return "derivation";
    case Provenance::baseline: return "baseline";
    case Provenance::external: return "external";
  }
  return "external";
}

CheckVerdict check_weakly_descending(const WitnessPair& p, Nat c, Nat window) {
  CheckVerdict v;
  Ordinal prev;
  for (Nat w = 0; w <= window; ++w) {
    Ordinal cur = p.h(c, w);
    if (compare(p.bound, cur) != Cmp::GT) {
      v.ok = false;
      v.first_violation = w;
      v.detail = "h(c," + std::to_string(w) + ") = " + render_ordinal(cur) +
                 " not below " + render_ordinal(p.bound);
      return v;
    }
    if (w > 0 && compare(prev, cur) == Cmp::LT) {
      v.ok = false;
      v.first_violation = w;
      v.detail = "h rises from " + render_ordinal(prev) + " to " + render_ordinal(cur) +
                 " at w=" + std::to_string(w);
      return v;
    }
    prev = std::move(cur);
  }
  return v;
}

CheckVerdict check_lowering(const WitnessPair& p, Nat c, Nat window) {
  CheckVerdict v;
  if (window == 0) return v;
  Nat prev_f = p.f(c, 0);
  Ordinal prev_h = p.h(c, 0);
  for (Nat w = 1; w <= window; ++w) {
    Nat cur_f = p.f(c, w);
    Ordinal cur_h = p.h(c, w);
    if (cur_f != prev_f && compare(prev_h, cur_h) != Cmp::GT) {
      v.ok = false;
      v.first_violation = w;
      v.detail = "f changes at w=" + std::to_string(w) + " without an h drop (" +
                 render_ordinal(prev_h) + " -> " + render_ordinal(cur_h) + ")";
      return v;
    }
    prev_f = cur_f;
    prev_h = std::move(cur_h);
  }
  return v;
}

LimitReport find_limit(const WitnessPair& p, Nat c, Nat window) {
  LimitReport r;
  r.c = c;
  r.window = window;

  const bool baseline = p.provenance == Provenance::baseline;
  CheckVerdict desc = check_weakly_descending(p, c, window);
  CheckVerdict low = baseline ? CheckVerdict{} : check_lowering(p, c, window);
  r.checks_reliable = desc.ok && low.ok;

  Nat prev = p.f(c, 0);
  for (Nat w = 1; w <= window; ++w) {
    Nat cur = p.f(c, w);
    if (cur != prev) {
      ++r.change_count;
      r.last_change = w;
      prev = cur;
    }
  }
  r.observed_limit = prev;
  r.h_first = p.h(c, 0);
  r.h_final = p.h(c, window);

  bool budget_spent = false;
  if (p.bound.is_finite() && !p.bound.is_zero()) {
    budget_spent = Coeff(r.change_count) == p.bound.finite_part() - 1;
  }
  r.certified = r.checks_reliable && !baseline && (budget_spent || r.h_final.is_zero());
  r.still_descending =
      window >= 1 && compare(p.h(c, window - 1), p.h(c, window)) == Cmp::GT;
  return r;
}

ChainLimitResult chain_limit(const std::function<Ordinal(Nat)>& chain, Nat window) {
  ChainLimitResult r;
  r.minimum = chain(0);
  Ordinal prev = r.minimum;
  for (Nat w = 1; w <= window; ++w) {
    Ordinal cur = chain(w);
    if (r.descent.ok && compare(prev, cur) == Cmp::LT) {
      r.descent.ok = false;
      r.descent.first_violation = w;
      r.descent.detail = "chain rises at w=" + std::to_string(w);
    }
    if (compare(cur, r.minimum) == Cmp::LT) {
      r.minimum = cur;
      r.first_attained = w;
    }
    prev = std::move(cur);
  }
  return r;
}

namespace {

constexpr Nat kNoRefuter = std::numeric_limits<Nat>::max();

// Incremental dual search state. refuter[i] holds, per candidate, the least
// counterexample index found within the explored horizon, or kNoRefuter.
// Survival at window w is exactly refuter[i] > w, so memoized answers agree
// with a fresh pointwise evaluation.
struct BaselineState {
  struct Side {
    std::vector<Nat> refuter;
  };
  struct PerC {
    Side z_side;  // refuted by u with !B(z,u,c)
    Side x_side;  // refuted by y with A(x,y,c)
    Nat horizon = 0;
    bool started = false;
  };
  std::mutex mu;
  std::map<Nat, PerC> per_c;
};

bool holds_b(const dsl::Delta2Spec& spec, Nat z, Nat u, Nat c) {
  return dsl::eval_formula(spec.matrix_b, dsl::Env{{"z", z}, {"u", u}, {"c", c}});
}

bool holds_a(const dsl::Delta2Spec& spec, Nat x, Nat y, Nat c) {
  return dsl::eval_formula(spec.matrix_a, dsl::Env{{"x", x}, {"y", y}, {"c", c}});
}

void extend(const dsl::Delta2Spec& spec, BaselineState::PerC& st, Nat c, Nat target) {
  Nat from = st.started ? st.horizon + 1 : 0;
  if (st.started && target <= st.horizon) return;
  // New candidates scan the whole target range; surviving old candidates only
  // the fresh tail.
  for (Nat z = from; z <= target; ++z) {
    Nat hit = kNoRefuter;
    for (Nat u = 0; u <= target; ++u) {
      if (!holds_b(spec, z, u, c)) {
        hit = u;
        break;
      }
    }
    st.z_side.refuter.push_back(hit);
  }
  for (Nat z = 0; z < from; ++z) {
    if (st.z_side.refuter[z] != kNoRefuter) continue;
    for (Nat u = from; u <= target; ++u) {
      if (!holds_b(spec, z, u, c)) {
        st.z_side.refuter[z] = u;
        break;
      }
    }
  }
  for (Nat x = from; x <= target; ++x) {
    Nat hit = kNoRefuter;
    for (Nat y = 0; y <= target; ++y) {
      if (holds_a(spec, x, y, c)) {
        hit = y;
        break;
      }
    }
    st.x_side.refuter.push_back(hit);
  }
  for (Nat x = 0; x < from; ++x) {
    if (st.x_side.refuter[x] != kNoRefuter) continue;
    for (Nat y = from; y <= target; ++y) {
      if (holds_a(spec, x, y, c)) {
        st.x_side.refuter[x] = y;
        break;
      }
    }
  }
  st.horizon = target;
  st.started = true;
}

Nat least_survivor(const BaselineState::Side& side, Nat w) {
  for (Nat i = 0; i <= w; ++i) {
    if (side.refuter[i] > w) return i;
  }
  return w + 1;
}

}  // namespace

WitnessPair limit_lemma_witness(const dsl::Delta2Spec& spec) {
  auto state = std::make_shared<BaselineState>();
  WitnessPair p;
  p.provenance = Provenance::baseline;
  p.bound = Ordinal::finite(1);
  p.f = [spec, state](Nat c, Nat w) -> Nat {
    std::lock_guard<std::mutex> lock(state->mu);
    BaselineState::PerC& st = state->per_c[c];
    extend(spec, st, c, w);
    Nat z0 = least_survivor(st.z_side, w);
    Nat x0 = least_survivor(st.x_side, w);
    return z0 <= x0 ? 0 : 1;
  };
  p.h = [](Nat, Nat) { return Ordinal(); };
  return p;
}

std::vector<Nat> f_trace(const WitnessPair& p, Nat c, Nat window) {
  std::vector<Nat> out;
  out.reserve(window + 1);
  for (Nat w = 0; w <= window; ++w) out.push_back(p.f(c, w));
  return out;
}

std::vector<Ordinal> h_trace(const WitnessPair& p, Nat c, Nat window) {
  std::vector<Ordinal> out;
  out.reserve(window + 1);
  for (Nat w = 0; w <= window; ++w) out.push_back(p.h(c, w));
  return out;
}

}  // namespace ordlim
