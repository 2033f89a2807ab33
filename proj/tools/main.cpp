#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "labelmeas/config.hpp"
#include "labelmeas/errors.hpp"
#include "labelmeas/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int run(const std::string& stage, const std::string& config_path,
        const std::string& out_override, long long seed_override, bool have_seed,
        const std::string& format_override) {
    labelmeas::cli::RunConfig cfg = labelmeas::cli::RunConfig::from_file(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (have_seed) {
        cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (cfg.simulate) cfg.simulate->design.seed = cfg.seed;
    }
    if (!format_override.empty()) {
        if (format_override != "json" && format_override != "markdown")
            throw labelmeas::config_error("--format must be json or markdown");
        cfg.formats = {format_override};
    }

    labelmeas::cli::Runner runner(std::move(cfg));
    if (stage == "all") runner.run_all();
    else runner.run_stage(stage);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "labelmeas: variance-decomposition analysis of human labeling data\n"
        "Stages: simulate -> features -> outcomes -> fit -> diagnose -> report"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_override;
    std::string format_override;
    long long seed_override = 0;
    bool example = false;

    app.add_flag("--example-config", example,
                 "Print an annotated example configuration and exit");

    std::vector<CLI::App*> subs;
    for (const char* name : {"simulate", "features", "outcomes", "fit", "diagnose",
                             "report", "all"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("Run the ") + name +
                                                     (std::string(name) == "all"
                                                          ? " stages in order"
                                                          : " stage"));
        sub->add_option("--config", config_path, "Run configuration (TOML)")
            ->required();
        sub->add_option("--out", out_override, "Override [run].out_dir");
        sub->add_option("--seed", seed_override, "Override [run].seed");
        sub->add_option("--format", format_override,
                        "Restrict report formats: json|markdown");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    if (example) {
        std::fputs(labelmeas::cli::example_config().c_str(), stdout);
        return kExitOk;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help() << std::endl;
        return kExitConfig;
    }

    const CLI::App* sub = app.get_subcommands().front();
    const bool have_seed = sub->count("--seed") > 0;
    try {
        return run(sub->get_name(), config_path, out_override, seed_override, have_seed,
                   format_override);
    } catch (const labelmeas::config_error& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return kExitConfig;
    } catch (const labelmeas::data_error& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return kExitData;
    } catch (const labelmeas::numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << std::endl;
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitNumeric;
    }
}
