#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ordlim/derivation.hpp"
#include "ordlim/dsl.hpp"
#include "ordlim/herbrand.hpp"
#include "ordlim/limr.hpp"
#include "ordlim/ordinal.hpp"
#include "ordlim/witness.hpp"

using namespace ordlim;
namespace dsl = ordlim::dsl;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string corpus(const std::string& name) {
#ifdef ORDLIM_CORPUS_DIR
  return std::string(ORDLIM_CORPUS_DIR) + "/" + name;
#else
  return "corpus/" + name;
#endif
}

// A fixed bag of mixed-depth notations; index pairs cycle through it.
std::vector<Ordinal> notation_bag() {
  std::vector<Ordinal> bag;
  for (const char* text :
       {"0", "7", "w", "w*3+2", "w^2*5+w*9+1", "w^w", "w^w*2+w^3*4+w+6",
        "w^(w*2+1)*3+w^w*8", "w^(w^w)+w^(w*5)*2+w^2", "w^(w^2+w+1)+w^w+42"}) {
    bag.push_back(parse_ordinal(text));
  }
  return bag;
}

void bm_ordinal_compare(benchmark::State& state) {
  auto bag = notation_bag();
  std::size_t i = 0;
  for (auto _ : state) {
    const Ordinal& a = bag[i % bag.size()];
    const Ordinal& b = bag[(i * 7 + 3) % bag.size()];
    benchmark::DoNotOptimize(compare(a, b));
    ++i;
  }
}
BENCHMARK(bm_ordinal_compare);

void bm_ordinal_add(benchmark::State& state) {
  auto bag = notation_bag();
  std::size_t i = 0;
  for (auto _ : state) {
    const Ordinal& a = bag[i % bag.size()];
    const Ordinal& b = bag[(i * 7 + 3) % bag.size()];
    benchmark::DoNotOptimize(add(a, b));
    ++i;
  }
}
BENCHMARK(bm_ordinal_add);

void bm_ordinal_scale(benchmark::State& state) {
  auto bag = notation_bag();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scale_finite(3, bag[i % bag.size()]));
    ++i;
  }
}
BENCHMARK(bm_ordinal_scale);

void bm_ordinal_parse_render(benchmark::State& state) {
  const std::string text = "w^(w^2+w+1)*4+w^w*2+w*9+13";
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_ordinal(parse_ordinal(text)));
  }
}
BENCHMARK(bm_ordinal_parse_render);

void bm_formula_eval(benchmark::State& state) {
  auto doc = dsl::parse_document(read_file(corpus("three_stage.d2")));
  auto spec = dsl::spec_from_document(doc);
  Nat u = 0;
  for (auto _ : state) {
    dsl::Env env{{"z", u % 23}, {"u", u % 101}, {"c", u % 11}};
    benchmark::DoNotOptimize(dsl::eval_formula(spec.matrix_b, env));
    ++u;
  }
}
BENCHMARK(bm_formula_eval);

// Staged evaluation of a certificate pair out to the window edge. The pair
// caches per parameter, so a fresh engine is built every iteration.
void bm_certificate_sweep(benchmark::State& state) {
  auto doc = dsl::parse_document(read_file(corpus("three_stage.d2")));
  auto spec = dsl::spec_from_document(doc);
  auto cert = HerbrandCertificate::from_block(*doc.herbrand);
  for (auto _ : state) {
    auto pair = build_pair(cert, spec);
    benchmark::DoNotOptimize(pair.f(4, 200));
  }
}
BENCHMARK(bm_certificate_sweep);

// Tree construction plus a bounded walk; the walk is incremental, so a fresh
// tree is built every iteration to keep the measurement honest.
void bm_derivation_walk(benchmark::State& state) {
  auto spec = dsl::spec_from_document(dsl::parse_document(read_file(corpus("add_shift.d2"))));
  const Nat c = 3;
  auto x = find_witness_bound(spec, c, 500, 500);
  for (auto _ : state) {
    auto d = canonical_derivation(spec, c, *x, 500);
    auto pair = extract_pair(d);
    benchmark::DoNotOptimize(pair.f(c, state.range(0)));
  }
}
BENCHMARK(bm_derivation_walk)->Arg(100)->Arg(500);

void bm_nested_limit(benchmark::State& state) {
  auto phi = dsl::parse_formula(
      "(x1 = 2 && x2 = 9) || (x1 = 2 && x2 = 3) || (x1 = 5 && x2 = 0)",
      {"x1", "x2", "x3"});
  for (auto _ : state) {
    benchmark::DoNotOptimize(nested_limit(phi, 2, state.range(0)));
  }
}
BENCHMARK(bm_nested_limit)->Arg(150)->Arg(600);

void bm_baseline_settle(benchmark::State& state) {
  auto spec = dsl::spec_from_document(dsl::parse_document(read_file(corpus("delayed_shift.d2"))));
  for (auto _ : state) {
    auto pair = limit_lemma_witness(spec);  // fresh state: no memo carryover
    benchmark::DoNotOptimize(pair.f(2, 100));
  }
}
BENCHMARK(bm_baseline_settle);

}  // namespace

BENCHMARK_MAIN();
