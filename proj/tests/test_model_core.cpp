#include <cmath>
#include <random>

#include <doctest.h>

#include "labelmeas/errors.hpp"
#include "labelmeas/model.hpp"
#include "labelmeas/stats.hpp"

using namespace labelmeas;

TEST_CASE("link_apply at zero is one half for both links") {
    CHECK(link_apply(LinkKind::Logit, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(link_apply(LinkKind::Probit, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("logistic link matches the closed form") {
    CHECK(std::fabs(link_apply(LinkKind::Logit, 2.203) - 0.9005) < 1e-4);
    CHECK(link_apply(LinkKind::Logit, 2.203) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-2.203))).epsilon(1e-14));
}

TEST_CASE("link symmetry and monotonicity") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(-25.0, 25.0);
    for (LinkKind k : {LinkKind::Logit, LinkKind::Probit}) {
        double prev = 0.0;
        for (int i = 0; i < 500; ++i) {
            const double eta = unif(gen);
            CHECK(std::fabs(link_apply(k, eta) + link_apply(k, -eta) - 1.0) <= 1e-12);
        }
        prev = -1.0;
        for (double eta = -8.0; eta <= 8.0; eta += 0.25) {
            const double p = link_apply(k, eta);
            CHECK(p > prev);
            CHECK(p > 0.0);
            CHECK(p < 1.0);
            prev = p;
        }
    }
}

TEST_CASE("non-finite eta is a domain error") {
    CHECK_THROWS_AS(link_apply(LinkKind::Logit, std::nan("")), numeric_error);
    CHECK_THROWS_AS(link_apply(LinkKind::Probit, INFINITY), numeric_error);
}

TEST_CASE("normal quantile inverts the normal CDF") {
    CHECK(std::fabs(stats::norm_quantile(0.975) - 1.959963984540054) < 1e-9);
    CHECK(std::fabs(stats::norm_quantile(0.5)) < 1e-15);
    for (double p = 0.0005; p < 1.0; p += 0.0137) {
        CHECK(stats::norm_cdf(stats::norm_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
    }
}

TEST_CASE("odds ratio for a zero coefficient is symmetric about one") {
    const auto orr = stats::odds_ratio(0.0, 0.5, 0.95);
    CHECK(orr.or_value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(orr.lo * orr.hi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(orr.lo <= orr.or_value);
    CHECK(orr.or_value <= orr.hi);
}

TEST_CASE("odds ratios reproduce published Wald intervals") {
    const auto a = stats::odds_ratio(2.203, 0.109, 0.95);
    CHECK(std::fabs(a.or_value - 9.05) < 0.01);
    CHECK(std::fabs(a.lo - 7.31) < 0.01);
    CHECK(std::fabs(a.hi - 11.20) < 0.02);

    const auto b = stats::odds_ratio(2.259, 0.559, 0.95);
    CHECK(std::fabs(b.or_value - 9.57) < 0.01);
    CHECK(std::fabs(b.lo - 3.20) < 0.01);
    CHECK(std::fabs(b.hi - 28.6) < 0.1);
}

TEST_CASE("odds ratio is strictly increasing in the coefficient") {
    double prev_or = 0.0, prev_lo = 0.0, prev_hi = 0.0;
    for (double coef = -2.0; coef <= 2.0; coef += 0.1) {
        const auto orr = stats::odds_ratio(coef, 0.3, 0.95);
        if (coef > -2.0) {
            CHECK(orr.or_value > prev_or);
            CHECK(orr.lo > prev_lo);
            CHECK(orr.hi > prev_hi);
        }
        prev_or = orr.or_value;
        prev_lo = orr.lo;
        prev_hi = orr.hi;
    }
}

TEST_CASE("latent propensity is the additive composition of its parts") {
    GenerativeParams params;
    EffectDraws d;
    CHECK(latent_propensity(params, d, Regime::Global) == 0.0);

    params.mu = 1.0;
    d.beta_item = -0.5;
    d.rho_annotator = 0.3;
    d.sigma_situational = 0.1;
    CHECK(latent_propensity(params, d, Regime::Global) == doctest::Approx(0.9).epsilon(1e-14));

    d.delta_interp = -1.0;
    CHECK(latent_propensity(params, d, Regime::Hlv) == doctest::Approx(-0.1).epsilon(1e-12));
    // Ignored outside the HLV regime.
    CHECK(latent_propensity(params, d, Regime::Global) == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("propensity is invariant to summation order") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> norm(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        GenerativeParams p;
        p.mu = norm(gen);
        EffectDraws d{norm(gen), norm(gen), norm(gen), norm(gen)};
        const double got = latent_propensity(p, d, Regime::Hlv);
        const double alt1 = d.delta_interp + d.sigma_situational + d.rho_annotator +
                            d.beta_item + p.mu;
        const double alt2 = (p.mu + d.delta_interp) + (d.rho_annotator + d.beta_item) +
                            d.sigma_situational;
        CHECK(got == doctest::Approx(alt1).epsilon(1e-12));
        CHECK(got == doctest::Approx(alt2).epsilon(1e-12));
    }
}

TEST_CASE("zero interpretive spread collapses HLV onto the global model") {
    GenerativeParams p;
    p.mu = 0.4;
    std::mt19937_64 gen(13);
    std::normal_distribution<double> norm(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        EffectDraws d{norm(gen), norm(gen), norm(gen), 0.0};
        CHECK(latent_propensity(p, d, Regime::Hlv) ==
              latent_propensity(p, d, Regime::Global));
    }
}

TEST_CASE("generative parameters reject negative spreads") {
    GenerativeParams p;
    p.beta_item_sd = -0.1;
    CHECK_THROWS_AS(p.validate(), config_error);
}

TEST_CASE("label set enforces membership and rejects the sentinel") {
    const LabelSet set({"entailment", "neutral", "contradiction"});
    CHECK(set.contains("neutral"));
    CHECK_FALSE(set.contains("maybe"));
    CHECK(set.index_of("entailment") == 0);
    CHECK_FALSE(set.index_of("idk").has_value());
    CHECK(Label{"idk"}.is_idk());
    CHECK_THROWS_AS(LabelSet({"a", "idk"}), config_error);
    CHECK_THROWS_AS(LabelSet({"a", "a"}), config_error);
}
