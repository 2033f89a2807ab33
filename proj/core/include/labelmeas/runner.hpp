#pragma once

#include <string>
#include <vector>

#include "labelmeas/config.hpp"

namespace labelmeas::cli {

/// Stage names in dependency order.
extern const std::vector<std::string> kStages;

/// Executes the pipeline stages of a RunConfig against its out_dir. Each
/// stage writes its artifacts plus a manifest entry carrying input/output
/// content hashes, the seed, and a completion timestamp (timestamps live only
/// in the manifest, so artifact bytes are reproducible). A failing stage
/// records its error in the manifest, keeps partial outputs, and rethrows.
class Runner {
  public:
    explicit Runner(RunConfig cfg);

    /// simulate | features | outcomes | fit | diagnose | report.
    void run_stage(const std::string& stage);

    /// Applicable stages in dependency order.
    void run_all();

    const RunConfig& config() const { return cfg_; }
    std::string artifact_path(const std::string& basename) const;

  private:
    RunConfig cfg_;

    void do_simulate();
    void do_features();
    void do_outcomes();
    void do_fit();
    void do_diagnose();
    void do_report();
};

}  // namespace labelmeas::cli
