#include <doctest.h>

#include "labelmeas/config.hpp"
#include "labelmeas/errors.hpp"

using namespace labelmeas;
using namespace labelmeas::cli;

TEST_CASE("the generated example config parses and validates") {
    const RunConfig cfg = RunConfig::from_string(example_config(), "example");
    CHECK(cfg.inputs.has_value());
    CHECK_FALSE(cfg.simulate.has_value());
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.seed == 42);
    CHECK(cfg.labels.size() == 3);
    CHECK(cfg.models.size() == 7);  // default real-data suite
    REQUIRE(cfg.diagnose.has_value());
    CHECK(cfg.diagnose->model == "pairwise");
    CHECK(cfg.diagnose->dominance == 2.0);
}

TEST_CASE("simulate blocks honor presets with key overrides") {
    const RunConfig cfg = RunConfig::from_string(R"(
[run]
seed = 9
[simulate]
preset = "interpretive"
n_items = 50
)");
    REQUIRE(cfg.simulate.has_value());
    CHECK(cfg.simulate->preset == "interpretive");
    CHECK(cfg.simulate->design.n_items == 50);           // overridden
    CHECK(cfg.simulate->design.n_annotators == 20);      // preset default
    CHECK(cfg.simulate->design.regime == Regime::Hlv);
    CHECK(cfg.simulate->params.delta_interp_sd == 1.0);
    CHECK(cfg.simulate->design.seed == 9);
    CHECK(cfg.models.size() == 2);  // default simulation suite
    CHECK(cfg.models[0].name == "correctness");
}

TEST_CASE("explicit model blocks replace the default suite") {
    const RunConfig cfg = RunConfig::from_string(R"(
[simulate]
n_items = 10
n_annotators = 3

[models.custom]
table = "sim_outcomes"
outcome = "z_error"
fixed = []
random = ["item", "annotator"]
link = "probit"
)");
    REQUIRE(cfg.models.size() == 1);
    CHECK(cfg.models[0].name == "custom");
    CHECK(cfg.models[0].spec.link == LinkKind::Probit);
    CHECK(cfg.models[0].spec.random_factors ==
          std::vector<std::string>{"item", "annotator"});
    CHECK_FALSE(cfg.diagnose.has_value());  // no pairwise model, no diagnose block
}

TEST_CASE("config errors name the offending field") {
    CHECK_THROWS_WITH_AS(RunConfig::from_string("[inputs]\nitems = \"a\"\n"),
                         doctest::Contains("inputs.annotations"), config_error);
    CHECK_THROWS_WITH_AS(RunConfig::from_string(R"(
[labels]
set = ["a", "b"]
[inputs]
items = "x"
annotations = "y"
validations = "z"
[simulate]
n_items = 5
)"),
                         doctest::Contains("exactly one"), config_error);
    CHECK_THROWS_AS(RunConfig::from_string("[run]\nformats = [\"pdf\"]\n[simulate]\nn_items = 2\n"),
                    config_error);
    // Inputs without labels.
    CHECK_THROWS_WITH_AS(RunConfig::from_string(R"(
[inputs]
items = "x"
annotations = "y"
validations = "z"
)"),
                         doctest::Contains("labels.set"), config_error);
}

TEST_CASE("the TOML subset reports parse loci") {
    CHECK_THROWS_WITH_AS(Toml::parse_string("key value\n", "cfg"),
                         doctest::Contains("cfg:1"), config_error);
    CHECK_THROWS_WITH_AS(Toml::parse_string("a = 1\na = 2\n", "cfg"),
                         doctest::Contains("duplicate key"), config_error);
    CHECK_THROWS_WITH_AS(Toml::parse_string("s = \"unterminated\n", "cfg"),
                         doctest::Contains("unterminated"), config_error);

    const Toml t = Toml::parse_string(R"(
top = 3.5
flag = true
[a.b]
name = "x"     # comment after value
arr = [1, 2, 3]
roles = { item = "doc", judge = "rater" }
)", "cfg");
    CHECK(t.get_num("top") == 3.5);
    CHECK(t.get_bool("flag"));
    CHECK(t.get_str("a.b.name") == "x");
    CHECK(t.find("a.b.arr")->array.size() == 3);
    CHECK(t.find("a.b.roles")->table.at("item").str == "doc");
    CHECK(t.sections_under("a") == std::vector<std::string>{"b"});
}

TEST_CASE("duplicate model names are rejected") {
    RunConfig cfg = RunConfig::from_string("[simulate]\nn_items = 4\n");
    cfg.models.push_back(cfg.models[0]);
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("duplicate model"),
                         config_error);
}
