#include <benchmark/benchmark.h>

#include "labelmeas/glmm.hpp"
#include "labelmeas/simulate.hpp"

using namespace labelmeas;

namespace {

sim::SimOutput correctness_data(int items, int annotators, int trials) {
    sim::SimDesign d;
    d.n_items = items;
    d.n_annotators = annotators;
    d.n_trials = trials;
    d.seed = 12345;
    GenerativeParams p;
    p.mu = 1.0;
    p.beta_item_sd = 0.7;
    p.rho_annotator_sd = 0.3;
    p.sigma_trial_sd = 0.2;
    return sim::simulate_correctness(d, p);
}

glmm::ModelSpec correctness_spec() {
    glmm::ModelSpec spec;
    spec.outcome = "z_error";
    spec.random_factors = {"item", "annotator", "session"};
    return spec;
}

}  // namespace

static void BM_PirlsEvaluation(benchmark::State& state) {
    const auto data = correctness_data(static_cast<int>(state.range(0)), 10, 2);
    glmm::Fitter f(glmm::build_design(data.to_table(), correctness_spec()));
    const std::vector<double> theta = {0.7, 0.3, 0.2};
    for (auto _ : state) benchmark::DoNotOptimize(f.pirls(theta).pdev);
    state.SetItemsProcessed(state.iterations() * data.records.size());
}
BENCHMARK(BM_PirlsEvaluation)->Arg(50)->Arg(200)->Arg(500);

static void BM_LaplaceEvaluation(benchmark::State& state) {
    const auto data = correctness_data(static_cast<int>(state.range(0)), 10, 2);
    glmm::Fitter f(glmm::build_design(data.to_table(), correctness_spec()));
    const std::vector<double> theta = {0.7, 0.3, 0.2};
    for (auto _ : state) benchmark::DoNotOptimize(f.laplace_loglik(theta));
}
BENCHMARK(BM_LaplaceEvaluation)->Arg(50)->Arg(200)->Arg(500);

static void BM_FullFit(benchmark::State& state) {
    const auto data = correctness_data(static_cast<int>(state.range(0)), 8, 2);
    const DataTable table = data.to_table();
    for (auto _ : state) {
        const auto fit = glmm::fit(table, correctness_spec());
        benchmark::DoNotOptimize(fit.loglik);
    }
}
BENCHMARK(BM_FullFit)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);

static void BM_PairwiseFit(benchmark::State& state) {
    sim::SimDesign d;
    d.n_items = static_cast<int>(state.range(0));
    d.n_annotators = 4;
    d.seed = 99;
    sim::PairwiseSds sds{0.13, 1.08, 0.97, 0.48};
    const DataTable table = sim::simulate_pairwise(d, 2.26, sds).to_table();
    glmm::ModelSpec spec;
    spec.outcome = "v";
    spec.random_factors = {"item", "judge", "labeler", "pair"};
    for (auto _ : state) {
        const auto fit = glmm::fit(table, spec);
        benchmark::DoNotOptimize(fit.loglik);
    }
}
BENCHMARK(BM_PairwiseFit)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
