#include <cmath>

#include <doctest.h>

#include "labelmeas/errors.hpp"
#include "labelmeas/glmm.hpp"
#include "labelmeas/quadrature.hpp"
#include "labelmeas/stats.hpp"
#include "support/irls_oracle.hpp"
#include "support/synth.hpp"

using namespace labelmeas;
using namespace labelmeas::glmm;

TEST_CASE("design build: one-hot blocks and level order") {
    DataTable t;
    t.add_column("y", ColumnType::Num);
    t.add_column("g", ColumnType::Str);
    const char* levels[] = {"a", "b", "a", "b"};
    const double ys[] = {1, 0, 0, 1};
    for (int i = 0; i < 4; ++i) {
        const std::size_t r = t.add_row();
        t.set_num(r, "y", ys[i]);
        t.set_str(r, "g", levels[i]);
    }
    ModelSpec spec;
    spec.outcome = "y";
    spec.random_factors = {"g"};
    const DesignMatrices dm = build_design(t, spec);
    CHECK(dm.q() == 2);
    CHECK(dm.factors[0].levels == std::vector<std::string>{"a", "b"});

    const auto z = dm.z_matrix();
    CHECK(z.rows() == 4);
    CHECK(z.cols() == 2);
    for (int r = 0; r < 4; ++r) {
        double row_sum = 0.0;
        for (int c = 0; c < 2; ++c) row_sum += z.coeff(r, c);
        CHECK(row_sum == 1.0);
    }
}

TEST_CASE("design build: standardization is an exact z-score") {
    auto data = test_synth::make_logistic(60, 2, 101);
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = {"x1", "x2"};
    spec.standardize = {"x1"};
    const DesignMatrices dm = build_design(data.table, spec);
    const auto col = dm.X.col(1);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() /
                                static_cast<double>(col.size() - 1));
    CHECK(std::fabs(mean) < 1e-12);
    CHECK(std::fabs(sd - 1.0) < 1e-12);
    CHECK(dm.standardized.size() == 1);
}

TEST_CASE("design build: degenerate inputs are rejected") {
    DataTable t;
    t.add_column("y", ColumnType::Num);
    t.add_column("g", ColumnType::Str);
    for (int i = 0; i < 5; ++i) {
        const std::size_t r = t.add_row();
        t.set_num(r, "y", 1.0);  // constant outcome
        t.set_str(r, "g", i % 2 ? "a" : "b");
    }
    ModelSpec spec;
    spec.outcome = "y";
    spec.random_factors = {"g"};
    CHECK_THROWS_AS(build_design(t, spec), data_error);

    DataTable t2;
    t2.add_column("y", ColumnType::Num);
    t2.add_column("g", ColumnType::Str);
    for (int i = 0; i < 5; ++i) {
        const std::size_t r = t2.add_row();
        t2.set_num(r, "y", i % 2);
        t2.set_str(r, "g", "only");  // single level
    }
    CHECK_THROWS_AS(build_design(t2, spec), config_error);

    ModelSpec bad;
    bad.outcome = "y";
    bad.fixed = {"y"};
    CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("design build: rows with missing modeled cells are dropped and counted") {
    DataTable t;
    t.add_column("y", ColumnType::Num);
    t.add_column("x", ColumnType::Num);
    t.add_column("g", ColumnType::Str);
    for (int i = 0; i < 10; ++i) {
        const std::size_t r = t.add_row();
        t.set_num(r, "y", i % 2);
        if (i != 3) t.set_num(r, "x", 0.1 * i);
        t.set_str(r, "g", i % 2 ? "a" : "b");
    }
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = {"x"};
    spec.random_factors = {"g"};
    const DesignMatrices dm = build_design(t, spec);
    CHECK(dm.n() == 9);
    CHECK(dm.n_dropped_missing == 1);
}

TEST_CASE("pirls at theta zero: intercept-only closed form") {
    DataTable t;
    t.add_column("y", ColumnType::Num);
    t.add_column("g", ColumnType::Str);
    for (int i = 0; i < 10; ++i) {
        const std::size_t r = t.add_row();
        t.set_num(r, "y", i < 3 ? 1.0 : 0.0);
        t.set_str(r, "g", i % 2 ? "g1" : "g2");
    }
    ModelSpec spec;
    spec.outcome = "y";
    spec.random_factors = {"g"};
    Fitter f(build_design(t, spec));
    const PirlsResult r = f.pirls({0.0});
    CHECK(r.converged);
    CHECK(std::fabs(r.beta[0] - std::log(0.3 / 0.7)) < 1e-7);
    CHECK(r.u.norm() == 0.0);  // zero-theta block pinned exactly
}

TEST_CASE("pirls at theta zero matches the independent IRLS oracle") {
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
        auto data = test_synth::make_logistic(200, 3, seed);
        ModelSpec spec;
        spec.outcome = "y";
        spec.fixed = data.covariates;
        Fitter f(build_design(data.table, spec));
        const PirlsResult r = f.pirls({});
        const auto oracle = test_oracle::fit_logistic(data.x, data.y);
        REQUIRE(oracle.converged);
        for (std::size_t j = 0; j < oracle.beta.size(); ++j)
            CHECK(std::fabs(r.beta[static_cast<Eigen::Index>(j)] - oracle.beta[j]) < 1e-6);
    }
}

TEST_CASE("Wald covariance at theta zero equals the plain logistic information inverse") {
    auto data = test_synth::make_logistic(180, 3, 555);
    glmm::ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = data.covariates;
    Fitter f(build_design(data.table, spec));
    const PirlsResult r = f.pirls({});
    const Eigen::MatrixXd cov = f.beta_covariance({});

    const auto& dm = f.dm();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dm.X.cols(), dm.X.cols());
    for (Eigen::Index i = 0; i < dm.X.rows(); ++i) {
        const double mu = 1.0 / (1.0 + std::exp(-dm.X.row(i).dot(r.beta)));
        info += mu * (1.0 - mu) * dm.X.row(i).transpose() * dm.X.row(i);
    }
    const Eigen::MatrixXd expected = info.inverse();
    CHECK((cov - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("balanced outcomes within every group leave the modes at zero") {
    DataTable t;
    t.add_column("y", ColumnType::Num);
    t.add_column("g", ColumnType::Str);
    for (int g = 0; g < 3; ++g) {
        for (int i = 0; i < 4; ++i) {
            const std::size_t r = t.add_row();
            t.set_num(r, "y", i % 2);
            t.set_str(r, "g", "g" + std::to_string(g));
        }
    }
    ModelSpec spec;
    spec.outcome = "y";
    spec.random_factors = {"g"};
    Fitter f(build_design(t, spec));
    const PirlsResult r = f.pirls({0.7});
    for (const auto& mode : r.modes[0]) CHECK(std::fabs(mode) < 1e-9);
}

TEST_CASE("laplace at theta zero equals the plain logistic log-likelihood") {
    auto data = test_synth::make_logistic(150, 2, 42);
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = data.covariates;
    spec.random_factors = {};
    Fitter f(build_design(data.table, spec));
    const double lap = f.laplace_loglik({});
    const auto oracle = test_oracle::fit_logistic(data.x, data.y);
    CHECK(std::fabs(lap - oracle.loglik) < 1e-8);
}

TEST_CASE("laplace tracks adaptive quadrature on a small single-factor design") {
    const DataTable t = test_synth::make_grouped(3, 5, 0.8, 2024);
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = {"x"};
    spec.random_factors = {"g"};
    Fitter f(build_design(t, spec));
    const std::vector<double> theta = {0.8};
    const double lap = f.laplace_loglik(theta);
    const PirlsResult st = f.pirls(theta);
    const auto q = quadrature_oracle(f.dm(), theta, st.beta, 64);
    CHECK(std::fabs(lap - q.loglik) <= 0.05);
}

TEST_CASE("laplace error shrinks as groups grow") {
    double prev_gap = 1e9;
    for (std::size_t per : {6, 24, 96}) {
        const DataTable t = test_synth::make_grouped(6, per, 0.8, 606);
        ModelSpec spec;
        spec.outcome = "y";
        spec.fixed = {"x"};
        spec.random_factors = {"g"};
        Fitter f(build_design(t, spec));
        const double lap = f.laplace_loglik({0.8});
        const PirlsResult st = f.pirls({0.8});
        const auto q = quadrature_oracle(f.dm(), {0.8}, st.beta, 32);
        const double gap = std::fabs(lap - q.loglik);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("laplace tracks exact tensor integration on a crossed design") {
    const DataTable t = test_synth::make_crossed(16, 0.6, 0.9, 77);
    ModelSpec spec;
    spec.outcome = "y";
    spec.random_factors = {"fa", "fb"};
    Fitter f(build_design(t, spec));
    const std::vector<double> theta = {0.6, 0.9};
    const double lap = f.laplace_loglik(theta);
    const PirlsResult st = f.pirls(theta);
    const auto q = quadrature_oracle(f.dm(), theta, st.beta, 8);
    CHECK(std::fabs(lap - q.loglik) <= 0.05);
}

TEST_CASE("penalized-deviance gradient vanishes at the PIRLS solution") {
    const DataTable t = test_synth::make_grouped(8, 12, 0.6, 99);
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = {"x"};
    spec.random_factors = {"g"};
    Fitter f(build_design(t, spec));
    const std::vector<double> theta = {0.6};
    const PirlsResult r = f.pirls(theta);
    REQUIRE(r.converged);

    const double f0 = f.penalized_deviance(theta, r.beta, r.u);
    const double h = 1e-5;
    double max_grad = 0.0;
    for (Eigen::Index j = 0; j < r.beta.size(); ++j) {
        Eigen::VectorXd bp = r.beta, bm = r.beta;
        bp[j] += h;
        bm[j] -= h;
        max_grad = std::max(max_grad,
                            std::fabs(f.penalized_deviance(theta, bp, r.u) -
                                      f.penalized_deviance(theta, bm, r.u)) /
                                (2 * h));
    }
    for (Eigen::Index j = 0; j < r.u.size(); ++j) {
        Eigen::VectorXd up = r.u, um = r.u;
        up[j] += h;
        um[j] -= h;
        max_grad = std::max(max_grad,
                            std::fabs(f.penalized_deviance(theta, r.beta, up) -
                                      f.penalized_deviance(theta, r.beta, um)) /
                                (2 * h));
    }
    CHECK(max_grad / (1.0 + std::fabs(f0)) < 1e-5);
}

TEST_CASE("probit PIRLS reaches a stationary point and matches quadrature") {
    const DataTable t = test_synth::make_grouped(5, 9, 0.7, 1234);
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = {"x"};
    spec.random_factors = {"g"};
    spec.link = LinkKind::Probit;
    Fitter f(build_design(t, spec));
    const std::vector<double> theta = {0.7};
    const PirlsResult r = f.pirls(theta);
    REQUIRE(r.converged);

    // Stationarity of the penalized deviance (probit uses Fisher scoring, the
    // fixed point still zeroes the exact gradient).
    const double f0 = f.penalized_deviance(theta, r.beta, r.u);
    const double h = 1e-5;
    double max_grad = 0.0;
    for (Eigen::Index j = 0; j < r.beta.size(); ++j) {
        Eigen::VectorXd bp = r.beta, bm = r.beta;
        bp[j] += h;
        bm[j] -= h;
        max_grad = std::max(max_grad,
                            std::fabs(f.penalized_deviance(theta, bp, r.u) -
                                      f.penalized_deviance(theta, bm, r.u)) /
                                (2 * h));
    }
    CHECK(max_grad / (1.0 + std::fabs(f0)) < 1e-5);

    const double lap = f.laplace_loglik(theta);
    const auto q = quadrature_oracle(f.dm(), theta, r.beta, 32);
    CHECK(std::fabs(lap - q.loglik) <= 0.05);
}

TEST_CASE("fit recovers a plain logistic model when the factor carries no signal") {
    auto data = test_synth::make_logistic(300, 2, 7);
    // Attach a noise factor unrelated to the outcome.
    data.table.add_column("g", ColumnType::Str);
    for (std::size_t r = 0; r < data.table.n_rows(); ++r)
        data.table.set_str(r, "g", "g" + std::to_string(r % 5));
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = data.covariates;
    spec.random_factors = {"g"};

    const FitResult fit = glmm::fit(data.table, spec);
    const auto oracle = test_oracle::fit_logistic(data.x, data.y);
    if (fit.variance_components[0].boundary) {
        for (std::size_t j = 0; j < oracle.beta.size(); ++j)
            CHECK(std::fabs(fit.coefficients[j].estimate - oracle.beta[j]) < 1e-6);
        CHECK(std::fabs(fit.loglik - oracle.loglik) < 1e-6);
    } else {
        // Small spurious variance; estimates must still sit close to the oracle.
        CHECK(fit.variance_components[0].sd < 0.3);
        for (std::size_t j = 0; j < oracle.beta.size(); ++j)
            CHECK(std::fabs(fit.coefficients[j].estimate - oracle.beta[j]) < 0.05);
    }
}

TEST_CASE("fit results are internally consistent") {
    const DataTable t = test_synth::make_grouped(12, 15, 0.8, 314);
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = {"x"};
    spec.random_factors = {"g"};
    const FitResult fit = glmm::fit(t, spec);

    CHECK(fit.aic == doctest::Approx(-2.0 * fit.loglik + 2.0 * (2 + 1)).epsilon(1e-12));
    for (const auto& vc : fit.variance_components)
        CHECK(vc.variance == doctest::Approx(vc.sd * vc.sd).epsilon(1e-12));
    for (const auto& c : fit.coefficients) {
        const auto orr = stats::odds_ratio(c.estimate, c.se, fit.ci_level);
        CHECK(c.odds == doctest::Approx(orr.or_value).epsilon(1e-12));
        CHECK(c.ci_lo == doctest::Approx(orr.lo).epsilon(1e-12));
        CHECK(c.ci_hi == doctest::Approx(orr.hi).epsilon(1e-12));
    }
    CHECK(fit.n_obs == t.n_rows());

    // Monotone outer search: the incumbent never regresses.
    for (std::size_t i = 1; i < fit.best_trace.size(); ++i)
        CHECK(fit.best_trace[i] >= fit.best_trace[i - 1]);
}

TEST_CASE("standardized coefficients are invariant to predictor rescaling") {
    const DataTable t = test_synth::make_grouped(10, 12, 0.5, 2718);
    DataTable scaled = t;
    {
        Column& c = scaled.col("x");
        for (auto& v : c.num) v *= 7.5;
    }
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = {"x"};
    spec.standardize = {"x"};
    spec.random_factors = {"g"};

    const FitResult a = glmm::fit(t, spec);
    const FitResult b = glmm::fit(scaled, spec);
    for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
        CHECK(std::fabs(a.coefficients[j].estimate - b.coefficients[j].estimate) < 1e-8);
        CHECK(std::fabs(a.coefficients[j].odds - b.coefficients[j].odds) < 1e-8);
        CHECK(std::fabs(a.coefficients[j].ci_lo - b.coefficients[j].ci_lo) < 1e-8);
    }
}

TEST_CASE("separation is flagged, not fatal") {
    DataTable t;
    t.add_column("y", ColumnType::Num);
    t.add_column("x", ColumnType::Num);
    t.add_column("g", ColumnType::Str);
    for (int i = 0; i < 40; ++i) {
        const std::size_t r = t.add_row();
        const double x = i < 20 ? -1.0 - 0.01 * i : 1.0 + 0.01 * i;
        t.set_num(r, "x", x);
        t.set_num(r, "y", x > 0 ? 1.0 : 0.0);
        t.set_str(r, "g", i % 2 ? "a" : "b");
    }
    ModelSpec spec;
    spec.outcome = "y";
    spec.fixed = {"x"};
    spec.random_factors = {"g"};
    const FitResult fit = glmm::fit(t, spec);
    bool flagged = false;
    for (const auto& w : fit.warnings) flagged |= w.find("separation") != std::string::npos;
    CHECK(flagged);
}
