#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ordlim/derivation.hpp"
#include "ordlim/dsl.hpp"
#include "ordlim/errors.hpp"
#include "ordlim/herbrand.hpp"
#include "ordlim/limr.hpp"
#include "ordlim/ordinal.hpp"
#include "ordlim/trace_io.hpp"
#include "ordlim/witness.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using namespace ordlim;
namespace dsl = ordlim::dsl;
using ordlim::cli::Json;

namespace {

Nat parse_nat(std::string_view text, const std::string& what) {
  Nat value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw parse_error(what + ": expected a natural number, got '" +
                          std::string(text) + "'",
                      0);
  }
  return value;
}

struct CRange {
  Nat lo = 0;
  Nat hi = 0;
};

// "lo..hi" or a single value.
CRange parse_c_range(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) {
    Nat v = parse_nat(text, "--c-range");
    return {v, v};
  }
  CRange r;
  r.lo = parse_nat(text.substr(0, dots), "--c-range");
  r.hi = parse_nat(text.substr(dots + 2), "--c-range");
  if (r.hi < r.lo) throw parse_error("--c-range: empty range " + text, 0);
  return r;
}

Provenance parse_provenance(const std::string& name) {
  if (name == "herbrand") return Provenance::herbrand;
  if (name == "derivation") return Provenance::derivation;
  if (name == "baseline") return Provenance::baseline;
  if (name == "external") return Provenance::external;
  throw parse_error("--provenance: unknown value '" + name + "'", 0);
}

// Drops '#' comment lines so formula files can be annotated.
std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    out += line;
    out += '\n';
  }
  return out;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_file_atomic(out_path, content);
  }
}

const char* cmp_label(Cmp c) {
  switch (c) {
    case Cmp::LT:
      return "LT";
    case Cmp::EQ:
      return "EQ";
    case Cmp::GT:
      return "GT";
  }
  return "??";
}

// Shared knobs; each subcommand registers the subset it uses.
struct Config {
  std::string subop;
  std::vector<std::string> args;

  std::string spec_path;
  std::string phi_path;
  std::string pair_path;
  std::string out_path;
  std::string method = "herbrand";
  std::string mode = "combined";
  std::string format = "json";
  std::string c_range_text = "0..10";
  std::string witness_bound = "auto";
  std::string bound_text;
  std::string provenance = "external";

  Nat c = 0;
  Nat k = 1;
  Nat window = 100;
  Nat check_window = 200;
  Nat cert_check_window = 30;
  Nat bound_cap = 5000;
  Nat audit_depth = 12;
  Nat audit_width = 10;
  Nat truth_window = 200;
  Nat seed = 0;
  bool window_set = false;
};

int cmd_ordinal(const Config& cfg) {
  const auto& args = cfg.args;
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw parse_error("ordinal " + cfg.subop + ": expected " +
                            std::to_string(n) + " operand(s), got " +
                            std::to_string(args.size()),
                        0);
    }
  };
  std::string result;
  if (cfg.subop == "cmp") {
    need(2);
    result = cmp_label(compare(parse_ordinal(args[0]), parse_ordinal(args[1])));
  } else if (cfg.subop == "add") {
    need(2);
    result = render_ordinal(add(parse_ordinal(args[0]), parse_ordinal(args[1])));
  } else if (cfg.subop == "scale") {
    need(2);
    if (args[0].empty() ||
        !std::all_of(args[0].begin(), args[0].end(),
                     [](unsigned char ch) { return std::isdigit(ch); })) {
      throw parse_error("ordinal scale: the factor must be a plain number", 0);
    }
    result = render_ordinal(scale_finite(Coeff(args[0]), parse_ordinal(args[1])));
  } else if (cfg.subop == "tower") {
    need(1);
    result = render_ordinal(omega_tower(parse_nat(args[0], "ordinal tower")));
  } else {
    throw parse_error("ordinal: unknown subop '" + cfg.subop +
                          "' (want cmp | add | scale | tower)",
                      0);
  }
  std::cout << result << '\n';
  return 0;
}

// Mirrors find_limit's policy: baseline pairs never claim a change budget,
// so the lowering contract does not apply to them.
CheckVerdict lowering_or_exempt(const WitnessPair& p, Nat c, Nat window) {
  if (p.provenance == Provenance::baseline) {
    CheckVerdict v;
    v.detail = "baseline pair: no change budget claimed";
    return v;
  }
  return check_lowering(p, c, window);
}

// True limit agreement: 0 means the window decided nothing.
Json agree_json(dsl::Truth truth, Nat observed) {
  if (truth == dsl::Truth::unknown) return nullptr;
  return (truth == dsl::Truth::yes) == (observed == 0);
}

int cmd_approximate(const Config& cfg) {
  auto doc = dsl::parse_document(read_file(cfg.spec_path));
  auto spec = dsl::spec_from_document(doc);
  CRange range = parse_c_range(cfg.c_range_text);

  WitnessPair pair;
  if (cfg.method == "herbrand") {
    if (!doc.herbrand) {
      throw parse_error(
          "approximate --method herbrand needs a herbrand { ... } block in " +
              cfg.spec_path,
          0);
    }
    auto cert = HerbrandCertificate::from_block(*doc.herbrand);
    auto cc = check_certificate(cert, spec, range.lo, range.hi,
                                cfg.cert_check_window);
    if (!cc.ok) {
      std::cerr << cli::dump(cli::error_json("certificate", cc.detail));
      return 3;
    }
    pair = build_pair(cert, spec);
  } else {
    pair = limit_lemma_witness(spec);
  }

  if (cfg.out_path.empty()) {
    throw parse_error("approximate: --out DIRECTORY is required", 0);
  }
  fs::create_directories(cfg.out_path);

  Json instances = Json::array();
  bool all_checks = true;
  bool all_agree = true;
  for (Nat c = range.lo; c <= range.hi; ++c) {
    auto desc = check_weakly_descending(pair, c, cfg.window);
    auto low = lowering_or_exempt(pair, c, cfg.window);
    auto limit = find_limit(pair, c, cfg.window);

    std::string trace_name = "trace_c" + std::to_string(c) + ".csv";
    std::string verdict_name = "verdict_c" + std::to_string(c) + ".json";
    write_file_atomic(fs::path(cfg.out_path) / trace_name,
                      pair_trace_csv(pair, c, cfg.window));
    write_file_atomic(
        fs::path(cfg.out_path) / verdict_name,
        cli::dump(cli::pair_report(c, cfg.window, pair.bound, desc, low, limit)));

    auto truth = dsl::brute_truth(spec, c, cfg.window);
    Json agree = agree_json(truth, limit.observed_limit);

    Json row;
    row["c"] = c;
    row["trace"] = trace_name;
    row["verdict"] = verdict_name;
    row["checks_ok"] = desc.ok && low.ok;
    row["observed"] = limit.observed_limit;
    row["brute"] = dsl::truth_name(truth);
    row["agree"] = agree;
    instances.push_back(row);

    all_checks = all_checks && desc.ok && low.ok;
    if (agree.is_boolean()) all_agree = all_agree && agree.get<bool>();
  }

  Json summary;
  summary["command"] = "approximate";
  summary["method"] = cfg.method;
  summary["spec"] = cfg.spec_path;
  summary["c_lo"] = range.lo;
  summary["c_hi"] = range.hi;
  summary["window"] = cfg.window;
  summary["seed"] = cfg.seed;
  summary["bound"] = render_ordinal(pair.bound);
  summary["instances"] = instances;
  summary["all_checks_ok"] = all_checks;
  summary["all_decided_agree"] = all_agree;
  std::string text = cli::dump(summary);
  write_file_atomic(fs::path(cfg.out_path) / "summary.json", text);
  std::cout << text;
  return (all_checks && all_agree) ? 0 : 3;
}

Derivation build_combined(const Config& cfg, const dsl::Delta2Spec& spec,
                          Nat* x_bound_out) {
  Nat x_bound;
  if (cfg.witness_bound == "auto") {
    auto found = find_witness_bound(spec, cfg.c, cfg.check_window, cfg.bound_cap);
    if (!found) {
      throw resource_error("no candidate within --bound-cap " +
                           std::to_string(cfg.bound_cap) +
                           " survives --check-window " +
                           std::to_string(cfg.check_window));
    }
    x_bound = *found;
  } else {
    x_bound = parse_nat(cfg.witness_bound, "--witness-bound");
  }
  if (x_bound_out) *x_bound_out = x_bound;
  return canonical_derivation(spec, cfg.c, x_bound, cfg.check_window);
}

Derivation build_one_block(const Config& cfg, const dsl::Delta2Spec& spec,
                           Nat* z_bound_out) {
  Nat z_bound;
  if (cfg.witness_bound == "auto") {
    auto found = find_sigma2_witness_bound(spec.matrix_b, cfg.c,
                                           cfg.check_window, cfg.bound_cap);
    if (!found) {
      throw resource_error("no candidate within --bound-cap " +
                           std::to_string(cfg.bound_cap) +
                           " survives --check-window " +
                           std::to_string(cfg.check_window));
    }
    z_bound = *found;
  } else {
    z_bound = parse_nat(cfg.witness_bound, "--witness-bound");
  }
  if (z_bound_out) *z_bound_out = z_bound;
  return canonical_sigma2_derivation(spec.matrix_b, cfg.c, z_bound,
                                     cfg.check_window);
}

int cmd_derive(const Config& cfg) {
  auto doc = dsl::parse_document(read_file(cfg.spec_path));
  auto spec = dsl::spec_from_document(doc);
  Nat window = cfg.window_set ? cfg.window : 2000;

  Json report;
  report["command"] = "derive";
  report["mode"] = cfg.mode;
  report["spec"] = cfg.spec_path;
  report["c"] = cfg.c;

  bool ok;
  if (cfg.mode == "combined") {
    Nat x_bound = 0;
    auto d = build_combined(cfg, spec, &x_bound);
    auto audit = audit_local_correctness(d, cfg.audit_depth, cfg.audit_width);
    auto sigma = check_sigma_elementary_bound(d, window);
    auto blocks = check_forall_block_changes(d, window);
    auto pair = extract_pair(d);
    auto desc = check_weakly_descending(pair, cfg.c, window);
    auto low = check_lowering(pair, cfg.c, window);
    auto limit = find_limit(pair, cfg.c, window);
    auto truth = dsl::brute_truth(spec, cfg.c, cfg.truth_window);
    Json agree = agree_json(truth, limit.observed_limit);

    report["x_bound"] = x_bound;
    report["bound"] = render_ordinal(pair.bound);
    report["window"] = window;
    report["audit"] = cli::audit_json(audit);
    report["sigma_bound"] = cli::sigma_json(sigma);
    report["block_changes"] = cli::block_json(blocks);
    report["weakly_descending"] = cli::check_json(desc);
    report["lowering"] = cli::check_json(low);
    report["limit"] = cli::limit_json(limit);
    report["brute"] = dsl::truth_name(truth);
    report["agree"] = agree;
    ok = audit.ok && sigma.ok && blocks.ok && desc.ok && low.ok &&
         (!agree.is_boolean() || agree.get<bool>());
  } else if (cfg.mode == "sigma2") {
    Nat z_bound = 0;
    auto d = build_one_block(cfg, spec, &z_bound);
    auto audit = audit_local_correctness(d, cfg.audit_depth, cfg.audit_width);
    auto sigma = check_sigma_elementary_bound(d, window);
    auto pair = sigma2_trace_pair(d);
    auto desc = check_weakly_descending(pair, cfg.c, window);
    auto low = check_lowering(pair, cfg.c, window);
    auto limit = find_limit(pair, cfg.c, window);

    // The settled candidate must hold up under the direct bounded check.
    bool settled_ok = true;
    for (Nat u = 0; u <= cfg.truth_window; ++u) {
      dsl::Env env{{"z", limit.observed_limit}, {"u", u}, {"c", cfg.c}};
      if (!dsl::eval_formula(spec.matrix_b, env)) {
        settled_ok = false;
        break;
      }
    }

    report["z_bound"] = z_bound;
    report["bound"] = render_ordinal(pair.bound);
    report["window"] = window;
    report["audit"] = cli::audit_json(audit);
    report["sigma_bound"] = cli::sigma_json(sigma);
    report["weakly_descending"] = cli::check_json(desc);
    report["lowering"] = cli::check_json(low);
    report["limit"] = cli::limit_json(limit);
    report["settled_z"] = limit.observed_limit;
    report["settled_check_ok"] = settled_ok;
    ok = audit.ok && sigma.ok && desc.ok && low.ok && settled_ok;
  } else {
    throw parse_error("derive: unknown --mode '" + cfg.mode +
                          "' (want combined | sigma2)",
                      0);
  }

  emit(cfg.out_path, cli::dump(report));
  return ok ? 0 : 3;
}

int cmd_trace(const Config& cfg) {
  auto doc = dsl::parse_document(read_file(cfg.spec_path));
  auto spec = dsl::spec_from_document(doc);
  Nat window = cfg.window_set ? cfg.window : 200;

  Derivation d = (cfg.mode == "sigma2") ? build_one_block(cfg, spec, nullptr)
                                        : build_combined(cfg, spec, nullptr);
  WitnessPair pair =
      (cfg.mode == "sigma2") ? sigma2_trace_pair(d) : extract_pair(d);

  if (cfg.format == "csv") {
    std::ostringstream out;
    out << "w,address,f,h\n";
    for (Nat w = 0; w <= window; ++w) {
      out << w << ',' << trace_address(d, w).render() << ',' << pair.f(cfg.c, w)
          << ',' << render_ordinal(pair.h(cfg.c, w)) << '\n';
    }
    emit(cfg.out_path, out.str());
  } else {
    Json rows = Json::array();
    for (Nat w = 0; w <= window; ++w) {
      Json row;
      row["w"] = w;
      row["address"] = trace_address(d, w).render();
      row["f"] = pair.f(cfg.c, w);
      row["h"] = render_ordinal(pair.h(cfg.c, w));
      rows.push_back(row);
    }
    Json report;
    report["command"] = "trace";
    report["mode"] = cfg.mode;
    report["c"] = cfg.c;
    report["window"] = window;
    report["bound"] = render_ordinal(pair.bound);
    report["rows"] = rows;
    emit(cfg.out_path, cli::dump(report));
  }
  return 0;
}

int cmd_decompose(const Config& cfg) {
  auto doc = dsl::parse_document(read_file(cfg.spec_path));
  auto spec = dsl::spec_from_document(doc);
  if (!doc.herbrand) {
    throw parse_error(
        "decompose needs a herbrand { ... } block in " + cfg.spec_path, 0);
  }
  auto cert = HerbrandCertificate::from_block(*doc.herbrand);
  auto pair = build_pair(cert, spec);
  auto dec = boolean_decomposition(pair, cert.rank);
  CRange range = parse_c_range(cfg.c_range_text);

  Json rows = Json::array();
  bool all_equal = true;
  bool top_clear = true;
  for (Nat c = range.lo; c <= range.hi; ++c) {
    bool combined = dec.combined(c, cfg.window);
    auto limit = find_limit(pair, c, cfg.window);
    bool limit_zero = limit.observed_limit == 0;
    bool top = dec.n(2 * cert.rank + 2, c, cfg.window);
    Json row;
    row["c"] = c;
    row["combined"] = combined;
    row["limit_zero"] = limit_zero;
    row["equal"] = combined == limit_zero;
    rows.push_back(row);
    all_equal = all_equal && (combined == limit_zero);
    top_clear = top_clear && !top;
  }

  Json report;
  report["command"] = "decompose";
  report["spec"] = cfg.spec_path;
  report["rank"] = cert.rank;
  report["window"] = cfg.window;
  report["rows"] = rows;
  report["all_equal"] = all_equal;
  report["top_level_always_false"] = top_clear;
  emit(cfg.out_path, cli::dump(report));
  return (all_equal && top_clear) ? 0 : 3;
}

int cmd_limr(const Config& cfg) {
  std::vector<std::string> scope;
  for (Nat i = 1; i <= cfg.k + 1; ++i) scope.push_back("x" + std::to_string(i));
  auto phi =
      dsl::parse_formula(strip_comments(read_file(cfg.phi_path)), scope);
  Nat window = cfg.window_set ? cfg.window : 500;

  auto out = nested_limit(phi, cfg.k, window);
  Json report;
  report["command"] = "limr";
  report["phi"] = cfg.phi_path;
  Json body = cli::limr_json(out, cfg.k, window);
  for (auto& [key, value] : body.items()) report[key] = value;
  emit(cfg.out_path, cli::dump(report));
  bool ok = out.status == NestedLimitOutcome::Status::ok && out.matches_brute;
  return ok ? 0 : 3;
}

int cmd_verify(const Config& cfg) {
  auto trace = parse_trace_csv(read_file(cfg.pair_path));
  auto bound = parse_ordinal(cfg.bound_text);
  auto prov = parse_provenance(cfg.provenance);
  Nat max_window = trace.f.size() - 1;
  Nat window = cfg.window_set ? cfg.window : max_window;
  if (window > max_window) {
    throw resource_error("trace ends at step " + std::to_string(max_window) +
                         ", cannot verify window " + std::to_string(window));
  }
  Nat c = trace.c;
  auto pair = table_pair(std::move(trace), std::move(bound), prov);
  auto desc = check_weakly_descending(pair, c, window);
  auto low = lowering_or_exempt(pair, c, window);
  auto limit = find_limit(pair, c, window);
  emit(cfg.out_path,
       cli::dump(cli::pair_report(c, window, pair.bound, desc, low, limit)));
  return (desc.ok && low.ok) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"Ordinal-budgeted limit approximations: build, trace, verify."};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--window", cfg.window, "step window")
        ->each([&](const std::string&) { cfg.window_set = true; });
    sub->add_option("--format", cfg.format, "output format (json | csv)")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", cfg.seed, "recorded in summaries");
    sub->add_option("--out", cfg.out_path, "write output here (atomic)");
  };

  auto* sub_ordinal =
      app.add_subcommand("ordinal", "notation arithmetic (cmp|add|scale|tower)");
  sub_ordinal->add_option("subop", cfg.subop, "cmp | add | scale | tower")
      ->required();
  sub_ordinal->add_option("operands", cfg.args, "operands");

  auto* sub_apx = app.add_subcommand(
      "approximate", "run an approximation pair across a parameter range");
  sub_apx->add_option("--spec", cfg.spec_path, "declaration file")->required();
  sub_apx->add_option("--method", cfg.method, "herbrand | baseline")
      ->check(CLI::IsMember({"herbrand", "baseline"}));
  sub_apx->add_option("--c-range", cfg.c_range_text, "lo..hi or single value");
  sub_apx->add_option("--cert-check-window", cfg.cert_check_window,
                      "grid width for the certificate check");
  add_common(sub_apx);

  auto* sub_derive = app.add_subcommand(
      "derive", "generate a canonical tree, audit it, and check its pair");
  sub_derive->add_option("--spec", cfg.spec_path, "declaration file")
      ->required();
  sub_derive->add_option("--c", cfg.c, "parameter value")->required();
  sub_derive->add_option("--mode", cfg.mode, "combined | sigma2");
  sub_derive->add_option("--witness-bound", cfg.witness_bound,
                         "candidate bound, or 'auto' to search");
  sub_derive->add_option("--check-window", cfg.check_window,
                         "instances audited per candidate");
  sub_derive->add_option("--bound-cap", cfg.bound_cap,
                         "candidate search gives up here");
  sub_derive->add_option("--audit-depth", cfg.audit_depth);
  sub_derive->add_option("--audit-width", cfg.audit_width);
  sub_derive->add_option("--truth-window", cfg.truth_window,
                         "window for the independent truth check");
  add_common(sub_derive);

  auto* sub_trace =
      app.add_subcommand("trace", "walk a canonical tree step by step");
  sub_trace->add_option("--spec", cfg.spec_path)->required();
  sub_trace->add_option("--c", cfg.c)->required();
  sub_trace->add_option("--mode", cfg.mode, "combined | sigma2");
  sub_trace->add_option("--witness-bound", cfg.witness_bound);
  sub_trace->add_option("--check-window", cfg.check_window);
  sub_trace->add_option("--bound-cap", cfg.bound_cap);
  add_common(sub_trace);

  auto* sub_dec = app.add_subcommand(
      "decompose", "difference-hierarchy readout of a certificate pair");
  sub_dec->add_option("--spec", cfg.spec_path)->required();
  sub_dec->add_option("--c-range", cfg.c_range_text);
  add_common(sub_dec);

  auto* sub_limr =
      app.add_subcommand("limr", "nested limit of a coded tuple chain");
  sub_limr->add_option("--phi", cfg.phi_path, "formula file over x1..x{k+1}")
      ->required();
  sub_limr->add_option("--k", cfg.k, "tuple arity")->required();
  add_common(sub_limr);

  auto* sub_verify = app.add_subcommand(
      "verify", "replay an exported trace against the pair contracts");
  sub_verify->add_option("--pair", cfg.pair_path, "trace CSV")->required();
  sub_verify->add_option("--K", cfg.bound_text, "claimed bound")->required();
  sub_verify
      ->add_option("--provenance", cfg.provenance,
                   "herbrand | derivation | baseline | external")
      ->check(CLI::IsMember(
          {"herbrand", "derivation", "baseline", "external"}));
  add_common(sub_verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sub_ordinal)) return cmd_ordinal(cfg);
    if (app.got_subcommand(sub_apx)) return cmd_approximate(cfg);
    if (app.got_subcommand(sub_derive)) return cmd_derive(cfg);
    if (app.got_subcommand(sub_trace)) return cmd_trace(cfg);
    if (app.got_subcommand(sub_dec)) return cmd_decompose(cfg);
    if (app.got_subcommand(sub_limr)) return cmd_limr(cfg);
    if (app.got_subcommand(sub_verify)) return cmd_verify(cfg);
  } catch (const parse_error& e) {
    std::cerr << cli::dump(cli::error_json("parse", e.what()));
    return 2;
  } catch (const resource_error& e) {
    std::cerr << cli::dump(cli::error_json("budget", e.what()));
    return 4;
  } catch (const eval_error& e) {
    std::cerr << cli::dump(cli::error_json("eval", e.what()));
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << cli::dump(cli::error_json("invalid_argument", e.what()));
    return 3;
  } catch (const error& e) {
    std::cerr << cli::dump(cli::error_json("error", e.what()));
    return 3;
  } catch (const std::exception& e) {
    std::cerr << cli::dump(cli::error_json("internal", e.what()));
    return 3;
  }
  return 0;
}
