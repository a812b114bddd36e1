#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ordlim/errors.hpp"
#include "ordlim/ordinal.hpp"
#include "ordlim/witness.hpp"

namespace ordlim {

// Rows of a per-parameter approximation trace. h is kept in notation form in
// files so exports round-trip exactly.
struct StoredTrace {
  Nat c = 0;
  std::vector<Nat> f;      // f[w]
  std::vector<Ordinal> h;  // h[w], same length as f
};

// CSV with header "c,w,f,h" and one row per step 0..window.
std::string pair_trace_csv(const WitnessPair& p, Nat c, Nat window);

// Inverse of pair_trace_csv. Rejects a missing or misspelled header, ragged
// rows, non-contiguous steps, and a parameter column that changes mid-file.
StoredTrace parse_trace_csv(std::string_view text);

// Wraps a stored trace as a pair the window checks can consume. Queries past
// the stored rows throw resource_error; a mismatched parameter throws
// eval_error. The bound is the claimed budget the replay should check
// against, not something the trace itself can certify.
WitnessPair table_pair(StoredTrace trace, Ordinal bound,
                       Provenance provenance = Provenance::external);

std::string read_file(const std::filesystem::path& path);

// Write via a sibling temporary file plus rename, so a concurrent reader
// never observes a half-written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace ordlim
