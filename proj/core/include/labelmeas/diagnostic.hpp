#pragma once

#include <string>
#include <vector>

#include "labelmeas/glmm.hpp"

namespace labelmeas::diag {

struct ComponentShare {
    std::string factor;
    double variance = 0.0;
    double share = 0.0;  // of the random-effect total
};

/// Random-effect variances and their shares of the random-effect total.
/// Degenerate when every variance is zero (shares undefined).
struct VarianceProfile {
    std::string source;  // fit name/id
    std::vector<ComponentShare> components;
    double total = 0.0;
    bool degenerate = false;
};

VarianceProfile variance_profile(const glmm::FitResult& fit,
                                 const std::string& source = "");

/// Maps profile factor names onto the diagnostic roles.
struct FactorRoles {
    std::string item = "item";
    std::string labeler = "labeler";
    std::string judge = "judge";
    std::string interaction = "pair";
};

enum class Regime { Global, Individual, Hybrid };

std::string regime_name(Regime r);

/// Full audit trail of the classification: every inequality with its values.
struct RegimeDiagnosis {
    Regime regime = Regime::Hybrid;
    std::string leaning;      // for Hybrid: "global" or "individual"
    double dominance = 2.0;   // threshold used
    double item_var = 0.0;
    double labeler_var = 0.0;
    double judge_var = 0.0;
    double interaction_var = 0.0;
    // Global rule:     item_var >= dominance * (labeler + judge + interaction)
    // Individual rule: labeler + interaction >= dominance * item_var
    double global_lhs = 0.0, global_rhs = 0.0;
    double individual_lhs = 0.0, individual_rhs = 0.0;
    bool global_rule = false, individual_rule = false;
    double dominance_ratio = 0.0;  // annotator-side total / item variance

    std::string to_json() const;
    std::string to_markdown() const;
};

/// The dominance threshold is artifact policy (the qualitative profiles give
/// no number); it is configurable and echoed in the output.
RegimeDiagnosis classify_regime(const VarianceProfile& profile, double dominance = 2.0,
                                const FactorRoles& roles = {});

struct AicRow {
    std::string name;
    double loglik = 0.0;
    double aic = 0.0;
    double delta = 0.0;  // against the best (lowest) AIC
};

/// Delta-AIC table over fits of the same rows; refuses mismatched N.
std::vector<AicRow> compare_models(
    const std::vector<std::pair<std::string, const glmm::FitResult*>>& fits);

}  // namespace labelmeas::diag
