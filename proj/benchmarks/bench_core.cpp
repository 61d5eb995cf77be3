#include <benchmark/benchmark.h>

#include "nambugeo/brackets.hpp"
#include "nambugeo/classical.hpp"
#include "nambugeo/embedding.hpp"
#include "nambugeo/verify.hpp"

using namespace nambugeo;

static void BM_frame_at(benchmark::State& state) {
    EmbeddingSpec spec = catalog_spec(state.range(0) == 2 ? "torus" : "s3");
    Vec u(spec.n, 0.9);
    for (auto _ : state) {
        PointFrame fr = frame_at(spec, u);
        benchmark::DoNotOptimize(fr.gamma);
    }
}
BENCHMARK(BM_frame_at)->Arg(2)->Arg(3);

static void BM_bracket_value(benchmark::State& state) {
    EmbeddingSpec spec = catalog_spec(state.range(0) == 2 ? "torus" : "s3");
    Vec u(spec.n, 0.9);
    PointFrame fr = frame_at(spec, u);
    BracketContext cx = make_context(fr);
    std::vector<Jet> args(fr.x_jets.begin(), fr.x_jets.begin() + spec.n);
    for (auto _ : state) {
        double v = cx.engine.value(args);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_bracket_value)->Arg(2)->Arg(3);

static void BM_build_tensors(benchmark::State& state) {
    EmbeddingSpec spec = catalog_spec(state.range(0) == 2 ? "clifford" : "graph3");
    Vec u(spec.n, 0.7);
    PointFrame fr = frame_at(spec, u);
    NormalFrame nf = gram_schmidt_normals(fr);
    BracketContext cx = make_context(fr);
    for (auto _ : state) {
        BracketTensors bt = build_tensors(cx, nf);
        benchmark::DoNotOptimize(bt.trP2);
    }
}
BENCHMARK(BM_build_tensors)->Arg(2)->Arg(3);

static void BM_suite_point(benchmark::State& state) {
    EmbeddingSpec spec = catalog_spec("torus");
    std::vector<Vec> pts = {{0.9, 0.7}};
    for (auto _ : state) {
        IdentityReport rep = run_suite(spec, pts);
        benchmark::DoNotOptimize(rep.n_pass);
    }
}
BENCHMARK(BM_suite_point);

BENCHMARK_MAIN();
