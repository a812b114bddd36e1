#include "ordlim/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>
#include <system_error>
#include <utility>

namespace ordlim {

namespace {

constexpr std::string_view kHeader = "c,w,f,h";

Nat parse_nat_field(std::string_view field, std::size_t offset) {
  Nat value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw parse_error("trace: expected a natural number, got '" +
                          std::string(field) + "'",
                      offset);
  }
  return value;
}

}  // namespace

std::string pair_trace_csv(const WitnessPair& p, Nat c, Nat window) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (Nat w = 0; w <= window; ++w) {
    out << c << ',' << w << ',' << p.f(c, w) << ','
        << render_ordinal(p.h(c, w)) << '\n';
  }
  return out.str();
}

StoredTrace parse_trace_csv(std::string_view text) {
  StoredTrace trace;
  std::size_t pos = 0;
  std::size_t row = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::size_t end = (eol == std::string_view::npos) ? text.size() : eol;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t line_at = pos;
    pos = (eol == std::string_view::npos) ? text.size() : eol + 1;
    if (line.empty()) continue;

    if (!saw_header) {
      if (line != kHeader) {
        throw parse_error("trace: header must be '" + std::string(kHeader) +
                              "'",
                          line_at);
      }
      saw_header = true;
      continue;
    }

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 4) {
      throw parse_error("trace: expected 4 columns, got " +
                            std::to_string(fields.size()),
                        line_at);
    }

    Nat c = parse_nat_field(fields[0], line_at);
    Nat w = parse_nat_field(fields[1], line_at);
    Nat f = parse_nat_field(fields[2], line_at);
    Ordinal h = parse_ordinal(fields[3]);

    if (row == 0) {
      trace.c = c;
    } else if (c != trace.c) {
      throw parse_error("trace: parameter column changed from " +
                            std::to_string(trace.c) + " to " +
                            std::to_string(c),
                        line_at);
    }
    if (w != row) {
      throw parse_error("trace: steps must be contiguous from 0; expected " +
                            std::to_string(row) + ", got " + std::to_string(w),
                        line_at);
    }
    trace.f.push_back(f);
    trace.h.push_back(std::move(h));
    ++row;
  }
  if (!saw_header) throw parse_error("trace: empty input", 0);
  if (trace.f.empty()) throw parse_error("trace: no data rows", text.size());
  return trace;
}

WitnessPair table_pair(StoredTrace trace, Ordinal bound, Provenance provenance) {
  auto shared = std::make_shared<StoredTrace>(std::move(trace));
  WitnessPair pair;
  pair.provenance = provenance;
  pair.bound = std::move(bound);
  pair.f = [shared](Nat c, Nat w) -> Nat {
    if (c != shared->c) {
      throw eval_error("trace stores parameter " + std::to_string(shared->c) +
                       ", not " + std::to_string(c));
    }
    if (w >= shared->f.size()) {
      throw resource_error("trace ends at step " +
                           std::to_string(shared->f.size() - 1));
    }
    return shared->f[w];
  };
  pair.h = [shared](Nat c, Nat w) -> Ordinal {
    if (c != shared->c) {
      throw eval_error("trace stores parameter " + std::to_string(shared->c) +
                       ", not " + std::to_string(c));
    }
    if (w >= shared->h.size()) {
      throw resource_error("trace ends at step " +
                           std::to_string(shared->h.size() - 1));
    }
    return shared->h[w];
  };
  return pair;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot read " + path.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw parse_error("cannot read " + path.string(), 0);
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot write " + tmp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw error("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw error("cannot move " + tmp.string() + " into place");
  }
}

}  // namespace ordlim
