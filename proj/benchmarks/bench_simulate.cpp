#include <benchmark/benchmark.h>

#include "labelmeas/ndjson.hpp"
#include "labelmeas/simulate.hpp"

using namespace labelmeas;

static void BM_SimulateCorrectness(benchmark::State& state) {
    sim::SimDesign d;
    d.n_items = static_cast<int>(state.range(0));
    d.n_annotators = 30;
    d.n_trials = 5;
    d.seed = 1;
    GenerativeParams p;
    p.beta_item_sd = 0.74;
    p.rho_annotator_sd = 0.30;
    p.sigma_trial_sd = 0.22;
    for (auto _ : state) {
        const auto out = sim::simulate_correctness(d, p);
        benchmark::DoNotOptimize(out.records.size());
    }
    state.SetItemsProcessed(state.iterations() * d.n_rows());
}
BENCHMARK(BM_SimulateCorrectness)->Arg(50)->Arg(200);

static void BM_SimulatePairwise(benchmark::State& state) {
    sim::SimDesign d;
    d.n_items = static_cast<int>(state.range(0));
    d.n_annotators = 20;
    d.seed = 1;
    sim::PairwiseSds sds{0.05, 0.05, 1.0, 0.0};
    for (auto _ : state) {
        const auto out = sim::simulate_pairwise(d, 2.2, sds);
        benchmark::DoNotOptimize(out.records.size());
    }
}
BENCHMARK(BM_SimulatePairwise)->Arg(50)->Arg(200);

static void BM_TableSerialization(benchmark::State& state) {
    sim::SimDesign d;
    d.n_items = 100;
    d.n_annotators = 10;
    d.n_trials = 2;
    d.seed = 3;
    GenerativeParams p;
    p.beta_item_sd = 0.5;
    const DataTable t = sim::simulate_correctness(d, p).to_table();
    for (auto _ : state) {
        const std::string s = ndjson::to_string(t);
        benchmark::DoNotOptimize(s.size());
    }
    state.SetBytesProcessed(state.iterations() *
                            static_cast<std::int64_t>(ndjson::to_string(t).size()));
}
BENCHMARK(BM_TableSerialization);
