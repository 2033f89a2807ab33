#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "labelmeas/model.hpp"
#include "labelmeas/table.hpp"

namespace labelmeas::sim {

/// How the situational (within-person) effect is keyed.
enum class SituationalStructure {
    PerSession,      // one draw per (annotator, trial): the default
    PerTrialShared,  // one draw per trial index, shared by all annotators/items
    PerCell,         // one draw per (item, annotator, trial)
};

/// Fully crossed simulation grid: every annotator labels every item on every
/// trial. Total rows = n_items * n_annotators * n_trials.
struct SimDesign {
    int n_items = 1;
    int n_annotators = 1;
    int n_trials = 1;
    Regime regime = Regime::Global;
    std::uint64_t seed = 0;
    SituationalStructure situational = SituationalStructure::PerSession;

    void validate() const;
    std::size_t n_rows() const;
};

struct SimRecord {
    std::int32_t item = 0;
    std::int32_t annotator = 0;
    std::int32_t trial = 0;  // 1-based
    double propensity = 0.0;
    bool correct = false;
};

/// Simulated correctness outcomes plus every realized effect draw, retained
/// so estimates can be checked against what was actually generated.
struct SimOutput {
    SimDesign design;
    GenerativeParams params;
    std::vector<SimRecord> records;
    std::vector<double> item_effects;        // n_items
    std::vector<double> annotator_effects;   // n_annotators
    std::vector<double> situational_effects; // keyed by `situational`
    std::vector<double> interp_effects;      // n_items*n_annotators (HLV only)

    std::string item_id(std::int32_t j) const;
    std::string annotator_id(std::int32_t i) const;
    std::string session_id(std::int32_t i, std::int32_t t) const;

    /// Long table: item, annotator, trial, session, y_correct, z_error.
    DataTable to_table() const;
    /// Realized effects and parameters as a JSON document (the truth sidecar).
    std::string truth_json() const;
};

/// Draws every effect and outcome deterministically from (design.seed, params).
/// Effects are independent zero-mean normals with the configured SDs; outcomes
/// are Bernoulli(link_apply(link, propensity)).
SimOutput simulate_correctness(const SimDesign& design, const GenerativeParams& params);

/// SDs for the pairwise validation generator, one per crossed component.
struct PairwiseSds {
    double labeler = 0.0;
    double judge = 0.0;
    double item = 0.0;
    double interaction = 0.0;
};

struct PairwiseRecord {
    std::int32_t item = 0;
    std::int32_t labeler = 0;
    std::int32_t judge = 0;
    bool validated = false;
};

struct PairwiseSimOutput {
    SimDesign design;
    double alpha = 0.0;
    PairwiseSds sds;
    std::vector<PairwiseRecord> records;  // one per (item, labeler, judge), self-pairs included
    std::vector<double> labeler_effects;
    std::vector<double> judge_effects;
    std::vector<double> item_effects;
    std::vector<double> interaction_effects;  // labeler-major

    /// Long table: item, labeler, judge, pair, v.
    DataTable to_table() const;
    std::string truth_json() const;
};

/// Validation events V ~ Bernoulli(logit^-1(alpha + u_labeler + u_judge +
/// u_item + u_pair)) over the full (item x labeler x judge) grid.
PairwiseSimOutput simulate_pairwise(const SimDesign& design, double alpha,
                                    const PairwiseSds& sds);

/// A canned configuration in which one variance component dominates
/// (dominant SD 1.0, the others 0.05).
struct Preset {
    std::string name;
    SimDesign design;
    GenerativeParams params;
    double pairwise_alpha = 2.2;
    PairwiseSds pairwise_sds;  // derived component mapping for validation data
};

/// Names: instance_error, between_person, within_person, interpretive.
/// Unknown names raise config_error.
Preset preset(const std::string& name);

}  // namespace labelmeas::sim
