#include <cmath>

#include <doctest.h>

#include "labelmeas/errors.hpp"
#include "labelmeas/ndjson.hpp"
#include "labelmeas/simulate.hpp"

using namespace labelmeas;
using namespace labelmeas::sim;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("identical seed and parameters give bit-identical output") {
    SimDesign d;
    d.n_items = 40;
    d.n_annotators = 7;
    d.n_trials = 3;
    d.seed = 99;
    GenerativeParams p;
    p.mu = 0.5;
    p.beta_item_sd = 0.7;
    p.rho_annotator_sd = 0.3;
    p.sigma_trial_sd = 0.2;

    const SimOutput a = simulate_correctness(d, p);
    const SimOutput b = simulate_correctness(d, p);
    CHECK(ndjson::to_string(a.to_table()) == ndjson::to_string(b.to_table()));
    CHECK(a.truth_json() == b.truth_json());

    d.seed = 100;
    const SimOutput c = simulate_correctness(d, p);
    CHECK(ndjson::to_string(a.to_table()) != ndjson::to_string(c.to_table()));
}

TEST_CASE("HLV with zero interpretive spread reproduces the global stream") {
    SimDesign d;
    d.n_items = 25;
    d.n_annotators = 5;
    d.n_trials = 2;
    d.seed = 4242;
    GenerativeParams p;
    p.beta_item_sd = 0.6;
    p.rho_annotator_sd = 0.2;
    p.sigma_trial_sd = 0.1;

    const SimOutput global = simulate_correctness(d, p);
    d.regime = Regime::Hlv;
    const SimOutput hlv = simulate_correctness(d, p);
    CHECK(ndjson::to_string(global.to_table()) == ndjson::to_string(hlv.to_table()));
}

TEST_CASE("growing the design preserves existing entity draws") {
    SimDesign d;
    d.n_items = 10;
    d.n_annotators = 4;
    d.n_trials = 2;
    d.seed = 7;
    GenerativeParams p;
    p.beta_item_sd = 1.0;
    p.rho_annotator_sd = 0.5;

    const SimOutput small = simulate_correctness(d, p);
    d.n_annotators = 9;
    const SimOutput big = simulate_correctness(d, p);
    for (int j = 0; j < d.n_items; ++j)
        CHECK(small.item_effects[j] == big.item_effects[j]);
    for (int i = 0; i < 4; ++i)
        CHECK(small.annotator_effects[i] == big.annotator_effects[i]);
}

TEST_CASE("null model converges to one half correct") {
    SimDesign d;
    d.n_items = 400;
    d.n_annotators = 25;
    d.n_trials = 10;  // 100k rows
    d.seed = 5;
    GenerativeParams p;  // all spreads zero, mu zero

    const SimOutput out = simulate_correctness(d, p);
    double rate = 0.0;
    for (const auto& r : out.records) rate += r.correct ? 1.0 : 0.0;
    rate /= static_cast<double>(out.records.size());
    const double se = 0.5 / std::sqrt(static_cast<double>(out.records.size()));
    CHECK(std::fabs(rate - 0.5) < 3.0 * se);
}

TEST_CASE("saturated propensity forces every outcome correct") {
    SimDesign d;
    d.n_items = 50;
    d.n_annotators = 5;
    d.n_trials = 2;
    d.seed = 6;
    GenerativeParams p;
    p.mu = 10.0;
    const SimOutput out = simulate_correctness(d, p);
    for (const auto& r : out.records) CHECK(r.correct);
}

TEST_CASE("Monte Carlo mean tracks the mean link probability") {
    SimDesign d;
    d.n_items = 120;
    d.n_annotators = 12;
    d.n_trials = 6;
    d.seed = 31;
    GenerativeParams p;
    p.mu = 0.8;
    p.beta_item_sd = 0.9;
    p.rho_annotator_sd = 0.4;
    p.sigma_trial_sd = 0.3;

    const SimOutput out = simulate_correctness(d, p);
    double mean_y = 0.0, mean_p = 0.0, var = 0.0;
    for (const auto& r : out.records) {
        const double pr = link_apply(p.link, r.propensity);
        mean_y += r.correct ? 1.0 : 0.0;
        mean_p += pr;
        var += pr * (1.0 - pr);
    }
    const double n = static_cast<double>(out.records.size());
    mean_y /= n;
    mean_p /= n;
    const double se = std::sqrt(var) / n;
    CHECK(std::fabs(mean_y - mean_p) < 3.0 * se);
}

TEST_CASE("distinct entity draws are uncorrelated") {
    SimDesign d;
    d.n_items = 10000;
    d.n_annotators = 1;
    d.n_trials = 1;
    d.seed = 17;
    GenerativeParams p;
    p.beta_item_sd = 1.0;

    const SimOutput out = simulate_correctness(d, p);
    std::vector<double> lead(out.item_effects.begin(), out.item_effects.end() - 1);
    std::vector<double> lag(out.item_effects.begin() + 1, out.item_effects.end());
    CHECK(std::fabs(correlation(lead, lag)) < 0.05);
}

TEST_CASE("interpretive spread in the global regime is a configuration error") {
    SimDesign d;
    d.n_items = 2;
    d.n_annotators = 2;
    d.n_trials = 1;
    GenerativeParams p;
    p.delta_interp_sd = 0.5;
    CHECK_THROWS_AS(simulate_correctness(d, p), config_error);
    d.regime = Regime::Hlv;
    CHECK_NOTHROW(simulate_correctness(d, p));
}

TEST_CASE("pairwise generator hits the published base rates") {
    SimDesign d;
    d.n_items = 500;
    d.n_annotators = 4;
    d.seed = 23;
    PairwiseSds sds;  // all zero

    const PairwiseSimOutput at_alpha = simulate_pairwise(d, 2.259, sds);
    double rate = 0.0;
    for (const auto& r : at_alpha.records) rate += r.validated ? 1.0 : 0.0;
    rate /= static_cast<double>(at_alpha.records.size());
    CHECK(std::fabs(rate - 0.9054) < 0.010);  // 3 binomial SEs at 8000 rows

    const PairwiseSimOutput at_zero = simulate_pairwise(d, 0.0, sds);
    rate = 0.0;
    for (const auto& r : at_zero.records) rate += r.validated ? 1.0 : 0.0;
    rate /= static_cast<double>(at_zero.records.size());
    CHECK(std::fabs(rate - 0.5) < 0.017);

    // Self-pairs are part of the grid.
    bool any_self = false;
    for (const auto& r : at_alpha.records) any_self |= r.labeler == r.judge;
    CHECK(any_self);
    CHECK(at_alpha.records.size() == 500u * 4u * 4u);
}

TEST_CASE("presets pin one dominant component") {
    const Preset inst = preset("instance_error");
    CHECK(inst.params.beta_item_sd == 1.0);
    CHECK(inst.params.rho_annotator_sd == 0.05);
    CHECK(inst.params.sigma_trial_sd == 0.05);
    CHECK(inst.params.delta_interp_sd == 0.0);
    CHECK(inst.design.regime == Regime::Global);
    CHECK(inst.pairwise_sds.item == 1.0);

    const Preset interp = preset("interpretive");
    CHECK(interp.params.delta_interp_sd == 1.0);
    CHECK(interp.design.regime == Regime::Hlv);
    CHECK(interp.pairwise_sds.interaction == 1.0);

    CHECK(preset("between_person").params.rho_annotator_sd == 1.0);
    CHECK(preset("within_person").params.sigma_trial_sd == 1.0);
    CHECK_THROWS_AS(preset("nope"), config_error);
}

TEST_CASE("situational structures key the draws differently") {
    SimDesign d;
    d.n_items = 6;
    d.n_annotators = 3;
    d.n_trials = 4;
    d.seed = 77;
    GenerativeParams p;
    p.sigma_trial_sd = 1.0;

    d.situational = SituationalStructure::PerSession;
    CHECK(simulate_correctness(d, p).situational_effects.size() == 12);
    d.situational = SituationalStructure::PerTrialShared;
    CHECK(simulate_correctness(d, p).situational_effects.size() == 4);
    d.situational = SituationalStructure::PerCell;
    CHECK(simulate_correctness(d, p).situational_effects.size() == 72);
}
