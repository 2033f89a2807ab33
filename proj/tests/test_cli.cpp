#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <doctest.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("labelmeas_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(LABELMEAS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

const char* kSimConfig = R"(
[run]
seed = 11
[simulate]
preset = "instance_error"
n_items = 60
n_annotators = 6
)";

}  // namespace

TEST_CASE("end-to-end run on a simulation preset produces every artifact") {
    TempDir tmp;
    write(tmp.path / "run.toml", kSimConfig);
    const int rc = run_cli("all --config " + (tmp.path / "run.toml").string() + " --out " +
                           (tmp.path / "out").string());
    REQUIRE(rc == 0);

    for (const char* artifact :
         {"sim_outcomes.ndjson", "sim_pairwise.ndjson", "truth.json",
          "fit_correctness.json", "fit_pairwise.json", "diagnosis.json", "report.md",
          "report.json", "manifest.json"})
        CHECK(fs::exists(tmp.path / "out" / artifact));

    const auto diagnosis =
        nlohmann::json::parse(slurp(tmp.path / "out" / "diagnosis.json"));
    CHECK(diagnosis.at("regime").get<std::string>() == "global");

    // Manifest references every artifact with a content hash.
    const auto manifest =
        nlohmann::json::parse(slurp(tmp.path / "out" / "manifest.json"));
    std::set<std::string> referenced;
    for (const auto& [stage, entry] : manifest.at("stages").items()) {
        if (!entry.contains("outputs")) continue;
        for (const auto& [name, hash] : entry.at("outputs").items()) {
            CHECK(hash.get<std::string>().size() == 64);
            CHECK(referenced.insert(name).second);  // exactly one referencing entry
        }
    }
    for (const char* artifact :
         {"sim_outcomes.ndjson", "fit_pairwise.json", "diagnosis.json", "report.md"})
        CHECK(referenced.count(artifact) == 1);
}

TEST_CASE("reruns are byte-identical apart from manifest timestamps") {
    TempDir tmp;
    write(tmp.path / "run.toml", kSimConfig);
    REQUIRE(run_cli("all --config " + (tmp.path / "run.toml").string() + " --out " +
                    (tmp.path / "o1").string()) == 0);
    REQUIRE(run_cli("all --config " + (tmp.path / "run.toml").string() + " --out " +
                    (tmp.path / "o2").string()) == 0);

    for (const auto& entry : fs::directory_iterator(tmp.path / "o1")) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        CHECK(slurp(entry.path()) == slurp(tmp.path / "o2" / name));
    }
    auto strip_times = [](nlohmann::json j) {
        for (auto& [stage, e] : j.at("stages").items()) e.erase("completed_unix");
        return j;
    };
    CHECK(strip_times(nlohmann::json::parse(slurp(tmp.path / "o1" / "manifest.json"))) ==
          strip_times(nlohmann::json::parse(slurp(tmp.path / "o2" / "manifest.json"))));
}

TEST_CASE("seed flag overrides the config seed") {
    TempDir tmp;
    write(tmp.path / "run.toml", kSimConfig);
    REQUIRE(run_cli("simulate --config " + (tmp.path / "run.toml").string() + " --out " +
                    (tmp.path / "a").string()) == 0);
    REQUIRE(run_cli("simulate --config " + (tmp.path / "run.toml").string() +
                    " --seed 12 --out " + (tmp.path / "b").string()) == 0);
    CHECK(slurp(tmp.path / "a" / "sim_outcomes.ndjson") !=
          slurp(tmp.path / "b" / "sim_outcomes.ndjson"));
}

TEST_CASE("fit without its dependency exits with the data error code") {
    TempDir tmp;
    write(tmp.path / "run.toml", kSimConfig);
    CHECK(run_cli("fit --config " + (tmp.path / "run.toml").string() + " --out " +
                  (tmp.path / "out").string()) == 3);
    // The failure is recorded in the manifest.
    const auto manifest =
        nlohmann::json::parse(slurp(tmp.path / "out" / "manifest.json"));
    CHECK(manifest.at("stages").at("fit").at("status").get<std::string>() == "failed");
    CHECK(manifest.at("stages").at("fit").at("error").get<std::string>().find(
              "sim_outcomes.ndjson") != std::string::npos);
}

TEST_CASE("configuration problems exit with the config error code") {
    TempDir tmp;
    write(tmp.path / "bad.toml", "[simulate]\nn_items = 0\n");
    CHECK(run_cli("all --config " + (tmp.path / "bad.toml").string()) == 2);
    CHECK(run_cli("all --config " + (tmp.path / "missing.toml").string()) == 2);
}

TEST_CASE("a boundary item variance still produces a diagnosis and report") {
    // Interpretive data with few items often pins the item component to zero,
    // which makes the dominance ratio unbounded; the artifacts must still
    // round-trip (JSON carries the ratio as null).
    TempDir tmp;
    write(tmp.path / "run.toml",
          "[run]\nseed = 5\n[simulate]\npreset = \"interpretive\"\nn_items = 40\n"
          "n_annotators = 5\n");
    REQUIRE(run_cli("all --config " + (tmp.path / "run.toml").string() + " --out " +
                    (tmp.path / "out").string()) == 0);
    const auto diagnosis =
        nlohmann::json::parse(slurp(tmp.path / "out" / "diagnosis.json"));
    CHECK(diagnosis.at("regime").get<std::string>() == "individual");
    CHECK(fs::exists(tmp.path / "out" / "report.md"));
}

TEST_CASE("real-data run over the bundled fixture") {
    TempDir tmp;
    const std::string fixture = std::string(LABELMEAS_TEST_DATA) + "/fixture";
    std::ostringstream cfg;
    cfg << "[run]\nseed = 1\n[labels]\nset = [\"entailment\", \"neutral\", \"contradiction\"]\n"
        << "[inputs]\nitems = \"" << fixture << "/items.ndjson\"\n"
        << "annotations = \"" << fixture << "/annotations.ndjson\"\n"
        << "validations = \"" << fixture << "/validations.ndjson\"\n"
        << "[models.global_random_only]\n"
        << "table = \"outcomes_global\"\noutcome = \"z\"\nrandom = [\"item\", \"annotator\", \"trial\"]\n";
    write(tmp.path / "run.toml", cfg.str());

    REQUIRE(run_cli("features --config " + (tmp.path / "run.toml").string() + " --out " +
                    (tmp.path / "out").string()) == 0);
    REQUIRE(run_cli("outcomes --config " + (tmp.path / "run.toml").string() + " --out " +
                    (tmp.path / "out").string()) == 0);
    CHECK(fs::exists(tmp.path / "out" / "outcomes_global.ndjson"));
    CHECK(fs::exists(tmp.path / "out" / "consensus.json"));

    // Feature columns join onto the outcome rows.
    const std::string global = slurp(tmp.path / "out" / "outcomes_global.ndjson");
    CHECK(global.find("\"ambiguity\"") != std::string::npos);
    CHECK(global.find("\"lexical_overlap\"") != std::string::npos);

    REQUIRE(run_cli("fit --config " + (tmp.path / "run.toml").string() + " --out " +
                    (tmp.path / "out").string()) == 0);
    REQUIRE(run_cli("report --config " + (tmp.path / "run.toml").string() + " --out " +
                    (tmp.path / "out").string()) == 0);
    CHECK(fs::exists(tmp.path / "out" / "fit_global_random_only.json"));
    const std::string report = slurp(tmp.path / "out" / "report.md");
    CHECK(report.find("Random Effects (Var / SD)") != std::string::npos);
    CHECK(report.find("Exclusion ledger") != std::string::npos);
    CHECK(report.find("consensus_undefined_items") != std::string::npos);
}
