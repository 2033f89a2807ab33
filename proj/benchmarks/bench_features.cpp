#include <benchmark/benchmark.h>

#include "labelmeas/features.hpp"

using namespace labelmeas;

namespace {

const char* kPremise =
    "The committee of twelve reviewed 3,400 applications from Northern Europe in "
    "2019, and Chairwoman Elena Marsh never once delayed a ruling.";
const char* kHypothesis =
    "Elena Marsh and her committee handled three thousand applications quickly, "
    "ruling on each one without delays in 2019.";

}  // namespace

static void BM_Tokenize(benchmark::State& state) {
    for (auto _ : state) {
        const auto t = feats::tokenize(kPremise);
        benchmark::DoNotOptimize(t.tokens.size());
    }
}
BENCHMARK(BM_Tokenize);

static void BM_PairFeatures(benchmark::State& state) {
    for (auto _ : state) {
        const auto f = feats::pair_features(kPremise, kHypothesis);
        benchmark::DoNotOptimize(f.lexical_overlap);
    }
}
BENCHMARK(BM_PairFeatures);

static void BM_EntityExtraction(benchmark::State& state) {
    for (auto _ : state) {
        const auto e = feats::extract_entities(kPremise);
        benchmark::DoNotOptimize(e.size());
    }
}
BENCHMARK(BM_EntityExtraction);
