#include "ordlim/herbrand.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <utility>

namespace ordlim {

namespace {

constexpr Nat kNone = std::numeric_limits<Nat>::max();
constexpr std::size_t kContextBudget = 2'000'000;

// Accepts "c" or a stage variable with index below `stage`.
void require_discipline(const dsl::TermExpr& term, Nat stage, const char* slot) {
  for (const std::string& name : dsl::free_variables(term)) {
    if (name == "c") continue;
    bool shaped = name.size() >= 2 && (name[0] == 'a' || name[0] == 'b') &&
                  name.find_first_not_of("0123456789", 1) == std::string::npos;
    Nat idx = shaped ? static_cast<Nat>(std::stoull(name.substr(1))) : kNone;
    if (!shaped || idx >= stage) {
      throw std::invalid_argument(std::string(slot) + std::to_string(stage) +
                                  " may not mention " + name);
    }
  }
}

std::string stage_var(char kind, Nat i) { return kind + std::to_string(i); }

}  // namespace

HerbrandCertificate HerbrandCertificate::from_block(const dsl::HerbrandBlock& block) {
  HerbrandCertificate cert;
  cert.rank = block.rank;
  cert.t_terms = block.t_terms;
  cert.s_terms = block.s_terms;
  if (cert.t_terms.size() != cert.rank + 1 || cert.s_terms.size() != cert.rank + 1)
    throw std::invalid_argument("certificate term lists do not match the rank");
  for (Nat i = 0; i <= cert.rank; ++i) {
    require_discipline(cert.t_terms[i], i, "t");
    require_discipline(cert.s_terms[i], i, "s");
  }
  return cert;
}

namespace {

bool spec_a(const dsl::Delta2Spec& spec, Nat x, Nat y, Nat c) {
  return dsl::eval_formula(spec.matrix_a, dsl::Env{{"x", x}, {"y", y}, {"c", c}});
}

bool spec_b(const dsl::Delta2Spec& spec, Nat z, Nat u, Nat c) {
  return dsl::eval_formula(spec.matrix_b, dsl::Env{{"z", z}, {"u", u}, {"c", c}});
}

Nat eval_stage_term(const dsl::TermExpr& term, const std::map<std::string, Nat>& chosen,
                    Nat c) {
  dsl::Env env{{"c", c}};
  for (const auto& [name, value] : chosen) env.push(name, value);
  return dsl::eval_term(term, env);
}

}  // namespace

CertificateCheck check_certificate(const HerbrandCertificate& cert, const dsl::Delta2Spec& spec,
                                   Nat c_lo, Nat c_hi, Nat window) {
  for (Nat c = c_lo; c <= c_hi; ++c) {
    std::map<Nat, std::vector<Nat>> wit_memo, bad_memo;
    auto wits_of = [&](Nat tval) -> const std::vector<Nat>& {
      auto it = wit_memo.find(tval);
      if (it == wit_memo.end()) {
        std::vector<Nat> hits;
        for (Nat a = 0; a <= window; ++a)
          if (spec_a(spec, tval, a, c)) hits.push_back(a);
        it = wit_memo.emplace(tval, std::move(hits)).first;
      }
      return it->second;
    };
    auto bads_of = [&](Nat sval) -> const std::vector<Nat>& {
      auto it = bad_memo.find(sval);
      if (it == bad_memo.end()) {
        std::vector<Nat> hits;
        for (Nat b = 0; b <= window; ++b)
          if (!spec_b(spec, sval, b, c)) hits.push_back(b);
        it = bad_memo.emplace(sval, std::move(hits)).first;
      }
      return it->second;
    };

    std::map<std::string, Nat> chosen;
    std::vector<Nat> path;
    // Depth-first search for a full assignment falsifying every disjunct;
    // choices are tried in ascending order, so the first hit is lex-least.
    std::function<bool(Nat)> refute = [&](Nat stage) -> bool {
      Nat tv = eval_stage_term(cert.t_terms[stage], chosen, c);
      Nat sv = eval_stage_term(cert.s_terms[stage], chosen, c);
      const auto& wits = wits_of(tv);
      const auto& bads = bads_of(sv);
      if (wits.empty() || bads.empty()) return false;
      if (stage == cert.rank) {
        path.push_back(wits[0]);
        path.push_back(bads[0]);
        return true;
      }
      for (Nat a : wits) {
        for (Nat b : bads) {
          chosen[stage_var('a', stage)] = a;
          chosen[stage_var('b', stage)] = b;
          path.push_back(a);
          path.push_back(b);
          if (refute(stage + 1)) return true;
          path.pop_back();
          path.pop_back();
        }
      }
      chosen.erase(stage_var('a', stage));
      chosen.erase(stage_var('b', stage));
      return false;
    };

    if (refute(0)) {
      CertificateCheck out;
      out.ok = false;
      out.c = c;
      out.assignment = path;
      out.detail = "disjunction falsified at c=" + std::to_string(c);
      return out;
    }
  }
  return {};
}

namespace {

// Ascending hits of a fixed predicate, grown lazily and shared by locator
// value (the same locator value recurs across contexts).
class HitTable {
 public:
  explicit HitTable(std::function<bool(Nat val, Nat cand)> pred) : pred_(std::move(pred)) {}

  const std::vector<Nat>& upto(Nat val, Nat horizon) {
    Scan& s = scans_[val];
    while (s.next <= horizon) {
      if (pred_(val, s.next)) s.hits.push_back(s.next);
      ++s.next;
    }
    return s.hits;
  }

 private:
  struct Scan {
    std::vector<Nat> hits;
    Nat next = 0;
  };
  std::function<bool(Nat, Nat)> pred_;
  std::map<Nat, Scan> scans_;
};

struct StageCtx {
  Nat req = 0;  // least w admitting the full choice path into this context
  Nat tval = 0;
  Nat sval = 0;
  std::vector<Nat> env_vals;  // parallel to the stage's needed-variable list
  std::size_t wits_done = 0;
  std::size_t bads_done = 0;
};

// Incremental staged search for one parameter value. Contexts are keyed by
// the projection of the choice history onto the variables later locators
// still mention; a context keeps the least requirement among the paths
// reaching it. Extending the horizon by one enumerates only new
// witness/refuter combinations, then reads off f at the new stage.
class CertEngine {
 public:
  CertEngine(const HerbrandCertificate& cert, const dsl::Delta2Spec& spec,
             const std::vector<std::vector<std::string>>& needed, Nat c)
      : cert_(cert),
        spec_(spec),
        needed_(needed),
        c_(c),
        wit_table_([this](Nat t, Nat a) { return spec_a(spec_, t, a, c_); }),
        bad_table_([this](Nat s, Nat b) { return !spec_b(spec_, s, b, c_); }) {
    for (Nat i = 0; i < cert_.rank; ++i) {
      a_rel_.push_back(mentions(needed_[i + 1], stage_var('a', i)));
      b_rel_.push_back(mentions(needed_[i + 1], stage_var('b', i)));
    }
    stages_.resize(cert_.rank + 1);
    StageCtx root;
    root.tval = eval_for_stage(cert_.t_terms[0], 0, {});
    root.sval = eval_for_stage(cert_.s_terms[0], 0, {});
    stages_[0].emplace(std::vector<Nat>{}, std::move(root));
    ++total_contexts_;
    run_pass();
    Nat fv = fires_at(0) ? 0 : 1;
    f_vals_.push_back(fv);
    change_counts_.push_back(0);
  }

  Nat f(Nat w) {
    ensure(w);
    return f_vals_[w];
  }

  Nat changes(Nat w) {
    ensure(w);
    return change_counts_[w];
  }

 private:
  static bool mentions(const std::vector<std::string>& names, const std::string& v) {
    return std::find(names.begin(), names.end(), v) != names.end();
  }

  Nat eval_for_stage(const dsl::TermExpr& term, Nat stage, const std::vector<Nat>& vals) {
    dsl::Env env{{"c", c_}};
    for (std::size_t i = 0; i < needed_[stage].size(); ++i) env.push(needed_[stage][i], vals[i]);
    return dsl::eval_term(term, env);
  }

  void ensure(Nat w) {
    while (horizon_ < w) {
      ++horizon_;
      run_pass();
      Nat fv = fires_at(horizon_) ? 0 : 1;
      change_counts_.push_back(change_counts_.back() + (fv != f_vals_.back() ? 1 : 0));
      f_vals_.push_back(fv);
    }
  }

  void run_pass() {
    for (Nat i = 0; i < cert_.rank; ++i) {
      for (auto& [key, ctx] : stages_[i]) {
        const auto& wits = wit_table_.upto(ctx.tval, horizon_);
        const auto& bads = bad_table_.upto(ctx.sval, horizon_);
        emit_children(i, ctx, wits, bads);
      }
    }
  }

  void emit_children(Nat i, StageCtx& ctx, const std::vector<Nat>& wits,
                     const std::vector<Nat>& bads) {
    bool arel = a_rel_[i];
    bool brel = b_rel_[i];
    auto child = [&](Nat a, Nat b) { insert_child(i, ctx, a, b); };
    if (arel && brel) {
      for (std::size_t x = 0; x < wits.size(); ++x) {
        std::size_t y0 = x < ctx.wits_done ? ctx.bads_done : 0;
        for (std::size_t y = y0; y < bads.size(); ++y) child(wits[x], bads[y]);
      }
      ctx.wits_done = wits.size();
      ctx.bads_done = bads.size();
    } else if (arel) {
      if (!bads.empty()) {
        for (std::size_t x = ctx.wits_done; x < wits.size(); ++x) child(wits[x], bads[0]);
        ctx.wits_done = wits.size();
      }
    } else if (brel) {
      if (!wits.empty()) {
        for (std::size_t y = ctx.bads_done; y < bads.size(); ++y) child(wits[0], bads[y]);
        ctx.bads_done = bads.size();
      }
    } else {
      if (!wits.empty() && !bads.empty() && ctx.wits_done == 0) {
        child(wits[0], bads[0]);
        ctx.wits_done = 1;
      }
    }
  }

  void insert_child(Nat i, const StageCtx& parent, Nat a, Nat b) {
    Nat stage = i + 1;
    Nat req = std::max({parent.req, parent.tval, parent.sval, a, b});
    std::vector<Nat> key;
    key.reserve(needed_[stage].size());
    for (const std::string& name : needed_[stage]) {
      if (name == stage_var('a', i)) {
        key.push_back(a);
      } else if (name == stage_var('b', i)) {
        key.push_back(b);
      } else {
        auto it = std::find(needed_[i].begin(), needed_[i].end(), name);
        key.push_back(parent.env_vals[static_cast<std::size_t>(it - needed_[i].begin())]);
      }
    }
    auto found = stages_[stage].find(key);
    if (found == stages_[stage].end()) {
      if (++total_contexts_ > kContextBudget)
        throw resource_error("staged search exceeded its context budget");
      StageCtx ctx;
      ctx.req = req;
      ctx.env_vals = key;
      ctx.tval = eval_for_stage(cert_.t_terms[stage], stage, key);
      ctx.sval = eval_for_stage(cert_.s_terms[stage], stage, key);
      stages_[stage].emplace(std::move(key), std::move(ctx));
    } else if (req < found->second.req) {
      // A cheaper path to the same projection: take it and re-emit the
      // subtree so descendants inherit the improvement this same pass.
      found->second.req = req;
      found->second.wits_done = 0;
      found->second.bads_done = 0;
    }
  }

  bool fires_at(Nat w) {
    for (Nat i = 0; i <= cert_.rank; ++i) {
      for (auto& [key, ctx] : stages_[i]) {
        if (ctx.req > w || ctx.tval > w || ctx.sval > w) continue;
        const auto& wits = wit_table_.upto(ctx.tval, horizon_);
        if (wits.empty() || wits[0] > w) continue;
        const auto& bads = bad_table_.upto(ctx.sval, horizon_);
        if (!bads.empty() && bads[0] <= w) continue;
        return true;
      }
    }
    return false;
  }

  const HerbrandCertificate& cert_;
  const dsl::Delta2Spec& spec_;
  const std::vector<std::vector<std::string>>& needed_;
  Nat c_;
  HitTable wit_table_;
  HitTable bad_table_;
  std::vector<bool> a_rel_, b_rel_;
  std::vector<std::map<std::vector<Nat>, StageCtx>> stages_;
  std::vector<Nat> f_vals_;
  std::vector<Nat> change_counts_;
  Nat horizon_ = 0;
  std::size_t total_contexts_ = 0;
};

struct EngineSet {
  HerbrandCertificate cert;
  dsl::Delta2Spec spec;
  std::vector<std::vector<std::string>> needed;
  std::mutex mu;
  std::map<Nat, CertEngine> engines;

  CertEngine& for_c(Nat c) {
    auto it = engines.find(c);
    if (it == engines.end())
      it = engines.try_emplace(c, cert, spec, needed, c).first;
    return it->second;
  }
};

std::vector<std::vector<std::string>> needed_vars(const HerbrandCertificate& cert) {
  std::vector<std::vector<std::string>> needed(cert.rank + 1);
  std::set<std::string> acc;
  for (Nat down = 0; down <= cert.rank; ++down) {
    Nat i = cert.rank - down;
    for (const auto* term : {&cert.t_terms[i], &cert.s_terms[i]}) {
      for (const std::string& name : dsl::free_variables(*term))
        if (name != "c") acc.insert(name);
    }
    for (const std::string& name : acc) {
      Nat idx = static_cast<Nat>(std::stoull(name.substr(1)));
      if (idx < i) needed[i].push_back(name);
    }
  }
  return needed;
}

}  // namespace

WitnessPair build_pair(const HerbrandCertificate& cert, const dsl::Delta2Spec& spec) {
  for (Nat i = 0; i <= cert.rank; ++i) {
    require_discipline(cert.t_terms[i], i, "t");
    require_discipline(cert.s_terms[i], i, "s");
  }
  auto st = std::make_shared<EngineSet>();
  st->cert = cert;
  st->spec = spec;
  st->needed = needed_vars(cert);
  const Nat k = 1 + 2 * cert.rank + 2;

  WitnessPair pair;
  pair.provenance = Provenance::herbrand;
  pair.bound = Ordinal::finite(Coeff(k));
  pair.f = [st](Nat c, Nat w) -> Nat {
    std::lock_guard<std::mutex> lock(st->mu);
    return st->for_c(c).f(w);
  };
  pair.h = [st, k](Nat c, Nat w) -> Ordinal {
    std::lock_guard<std::mutex> lock(st->mu);
    Nat changes = st->for_c(c).changes(w);
    Nat level = changes >= k - 1 ? 0 : (k - 1) - changes;
    return Ordinal::finite(Coeff(level));
  };
  return pair;
}

std::function<Nat(Nat, Nat)> build_f(const HerbrandCertificate& cert,
                                     const dsl::Delta2Spec& spec) {
  return build_pair(cert, spec).f;
}

ChangeBoundCheck change_bound_check(const WitnessPair& pair, Nat c_lo, Nat c_hi, Nat window) {
  if (!pair.bound.is_finite())
    throw std::invalid_argument("change bound check needs a finite budget");
  Coeff k = pair.bound.finite_part();
  if (k < 2) throw std::invalid_argument("budget below 2 admits no change bound");
  ChangeBoundCheck out;
  out.allowed = (k - 2).convert_to<Nat>();
  bool first = true;
  for (Nat c = c_lo; c <= c_hi; ++c) {
    Nat prev = pair.f(c, 0);
    Nat changes = 0;
    for (Nat w = 1; w <= window; ++w) {
      Nat cur = pair.f(c, w);
      if (cur != prev) {
        ++changes;
        prev = cur;
      }
    }
    if (first || changes > out.worst_changes) {
      out.worst_changes = changes;
      out.worst_c = c;
      first = false;
    }
  }
  out.ok = out.worst_changes <= out.allowed;
  return out;
}

Decomposition boolean_decomposition(const WitnessPair& pair, Nat rank) {
  auto f = pair.f;
  // First value and the value after each change, within the window.
  auto profile = [f](Nat c, Nat window) {
    std::vector<Nat> after;
    Nat first = f(c, 0);
    Nat prev = first;
    for (Nat w = 1; w <= window; ++w) {
      Nat cur = f(c, w);
      if (cur != prev) {
        after.push_back(cur);
        prev = cur;
      }
    }
    return std::make_pair(first, after);
  };

  Decomposition out;
  out.rank = rank;
  out.y = [profile](Nat k, Nat c, Nat window) {
    auto [first, after] = profile(c, window);
    if (k == 0) return first == 0;
    for (std::size_t j = k; j <= after.size(); ++j)
      if (after[j - 1] == 0) return true;
    return false;
  };
  out.n = [profile, rank](Nat k, Nat c, Nat window) {
    if (k >= 2 * rank + 2) return false;  // beyond the change budget
    auto [first, after] = profile(c, window);
    if (k == 0) return first == 1;
    for (std::size_t j = k; j <= after.size(); ++j)
      if (after[j - 1] == 1) return true;
    return false;
  };
  out.combined = [y = out.y, n = out.n, rank](Nat c, Nat window) {
    for (Nat k = 0; k <= 1 + 2 * rank; ++k)
      if (y(k, c, window) && !n(k + 1, c, window)) return true;
    return false;
  };
  return out;
}

Sigma2FiniteWitness sigma2_witness_finite(const std::vector<dsl::TermExpr>& candidates,
                                          const dsl::QFFormula& matrix_b) {
  if (candidates.empty()) throw std::invalid_argument("candidate list is empty");

  struct PerC {
    std::vector<Nat> values;
    std::vector<Nat> refuter;  // least u with !B, kNone while unrefuted
    Nat scanned = 0;           // refutations below this are known
  };
  struct State {
    std::vector<dsl::TermExpr> cands;
    dsl::QFFormula b;
    std::mutex mu;
    std::map<Nat, PerC> per_c;
  };
  auto st = std::make_shared<State>();
  st->cands = candidates;
  st->b = matrix_b;
  const Nat m = candidates.size();

  auto ensure = [st, m](Nat c, Nat w) -> PerC& {
    PerC& pc = st->per_c[c];
    if (pc.values.empty()) {
      for (Nat i = 0; i < m; ++i)
        pc.values.push_back(dsl::eval_term(st->cands[i], dsl::Env{{"c", c}}));
      pc.refuter.assign(m, kNone);
    }
    while (pc.scanned < w) {
      Nat u = pc.scanned;
      for (Nat i = 0; i < m; ++i) {
        if (pc.refuter[i] != kNone) continue;
        if (!dsl::eval_formula(st->b, dsl::Env{{"z", pc.values[i]}, {"u", u}, {"c", c}}))
          pc.refuter[i] = u;
      }
      ++pc.scanned;
    }
    return pc;
  };
  // Value at stage w: the first candidate with no refutation below w, the
  // last one once every candidate is dead.
  auto value_at = [m](const PerC& pc, Nat w) -> Nat {
    for (Nat i = 0; i < m; ++i)
      if (pc.refuter[i] == kNone || pc.refuter[i] >= w) return pc.values[i];
    return pc.values[m - 1];
  };

  Sigma2FiniteWitness out;
  out.pair.provenance = Provenance::herbrand;
  out.pair.bound = Ordinal::finite(Coeff(m + 1));
  out.pair.f = [st, ensure, value_at](Nat c, Nat w) -> Nat {
    std::lock_guard<std::mutex> lock(st->mu);
    return value_at(ensure(c, w), w);
  };
  out.pair.h = [st, ensure, value_at, m](Nat c, Nat w) -> Ordinal {
    std::lock_guard<std::mutex> lock(st->mu);
    PerC& pc = ensure(c, w);
    Nat changes = 0;
    Nat prev = value_at(pc, 0);
    for (Nat v = 1; v <= w; ++v) {
      Nat cur = value_at(pc, v);
      if (cur != prev) {
        ++changes;
        prev = cur;
      }
    }
    return Ordinal::finite(Coeff(changes >= m ? 0 : m - changes));
  };
  out.exhausted_at = [st, ensure, m](Nat c, Nat window) -> std::optional<Nat> {
    std::lock_guard<std::mutex> lock(st->mu);
    PerC& pc = ensure(c, window);
    Nat worst = 0;
    for (Nat i = 0; i < m; ++i) {
      if (pc.refuter[i] == kNone) return std::nullopt;
      worst = std::max(worst, pc.refuter[i]);
    }
    Nat first = worst + 1;
    if (first > window) return std::nullopt;
    return first;
  };
  return out;
}

}  // namespace ordlim
