#include "report.hpp"

namespace ordlim::cli {

namespace {

Json opt_nat(const std::optional<Nat>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

Json check_json(const CheckVerdict& v) {
  Json j;
  j["ok"] = v.ok;
  j["first_violation"] = opt_nat(v.first_violation);
  j["detail"] = v.detail;
  return j;
}

Json limit_json(const LimitReport& r) {
  Json j;
  j["observed_limit"] = r.observed_limit;
  j["last_change"] = r.last_change;
  j["change_count"] = r.change_count;
  j["h_first"] = render_ordinal(r.h_first);
  j["h_final"] = render_ordinal(r.h_final);
  j["checks_reliable"] = r.checks_reliable;
  j["certified"] = r.certified;
  j["still_descending"] = r.still_descending;
  return j;
}

Json pair_report(Nat c, Nat window, const Ordinal& bound,
                 const CheckVerdict& descending, const CheckVerdict& lowering,
                 const LimitReport& limit) {
  Json j;
  j["c"] = c;
  j["window"] = window;
  j["bound"] = render_ordinal(bound);
  j["weakly_descending"] = check_json(descending);
  j["lowering"] = check_json(lowering);
  j["limit"] = limit_json(limit);
  return j;
}

Json limr_json(const NestedLimitOutcome& out, Nat k, Nat window) {
  Json j;
  j["k"] = k;
  j["window"] = window;
  j["status"] = nested_limit_status_name(out.status);
  j["tuple"] = out.tuple;
  j["stabilization_w"] = out.settled_at;
  j["component_settle"] = out.component_settle;
  j["brute_min"] = out.brute_minimum;
  j["agree"] = out.matches_brute;
  return j;
}

Json audit_json(const AuditVerdict& v) {
  Json j;
  j["ok"] = v.ok;
  j["address"] = v.address ? Json(v.address->render()) : Json(nullptr);
  j["detail"] = v.detail;
  return j;
}

Json block_json(const BlockChangeVerdict& v) {
  Json j;
  j["ok"] = v.ok;
  j["at"] = opt_nat(v.at);
  j["detail"] = v.detail;
  return j;
}

Json sigma_json(const SigmaBoundVerdict& v) {
  Json j;
  j["ok"] = v.ok;
  j["at"] = opt_nat(v.at);
  return j;
}

Json error_json(const std::string& kind, const std::string& message) {
  Json inner;
  inner["kind"] = kind;
  inner["message"] = message;
  Json j;
  j["error"] = inner;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace ordlim::cli
