#pragma once

#include <string>

#include "json.hpp"
#include "ordlim/derivation.hpp"
#include "ordlim/limr.hpp"
#include "ordlim/ordinal.hpp"
#include "ordlim/witness.hpp"

// JSON report shapes shared by the CLI commands. Key order is fixed by
// construction so identical runs serialize byte-identically.
namespace ordlim::cli {

using Json = nlohmann::ordered_json;

Json check_json(const CheckVerdict& v);
Json limit_json(const LimitReport& r);

// The replayable per-parameter verdict: everything here can be recomputed
// from the exported trace plus the claimed bound alone.
Json pair_report(Nat c, Nat window, const Ordinal& bound,
                 const CheckVerdict& descending, const CheckVerdict& lowering,
                 const LimitReport& limit);

Json limr_json(const NestedLimitOutcome& out, Nat k, Nat window);
Json audit_json(const AuditVerdict& v);
Json block_json(const BlockChangeVerdict& v);
Json sigma_json(const SigmaBoundVerdict& v);
Json error_json(const std::string& kind, const std::string& message);

// Two-space indent plus trailing newline; the one serialization everywhere.
std::string dump(const Json& j);

}  // namespace ordlim::cli
