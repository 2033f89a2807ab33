#include "labelmeas/diagnostic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "labelmeas/errors.hpp"

namespace labelmeas::diag {

VarianceProfile variance_profile(const glmm::FitResult& fit, const std::string& source) {
    if (fit.variance_components.empty())
        throw data_error("variance_profile: fit has no variance components");
    VarianceProfile p;
    p.source = source;
    for (const auto& vc : fit.variance_components) {
        p.components.push_back({vc.factor, vc.variance, 0.0});
        p.total += vc.variance;
    }
    if (p.total > 0.0) {
        for (auto& c : p.components) c.share = c.variance / p.total;
    } else {
        p.degenerate = true;
    }
    return p;
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Global: return "global";
        case Regime::Individual: return "individual";
        case Regime::Hybrid: return "hybrid";
    }
    return "hybrid";
}

RegimeDiagnosis classify_regime(const VarianceProfile& profile, double dominance,
                                const FactorRoles& roles) {
    if (profile.degenerate)
        throw data_error("classify_regime: degenerate profile (all variances zero)");
    if (!(dominance > 0.0))
        throw config_error("classify_regime: dominance threshold must be > 0");

    RegimeDiagnosis d;
    d.dominance = dominance;
    bool have_item = false;
    for (const auto& c : profile.components) {
        if (c.factor == roles.item) {
            d.item_var = c.variance;
            have_item = true;
        } else if (c.factor == roles.labeler) {
            d.labeler_var = c.variance;
        } else if (c.factor == roles.judge) {
            d.judge_var = c.variance;
        } else if (c.factor == roles.interaction) {
            d.interaction_var = c.variance;
        }
    }
    if (!have_item)
        throw data_error("classify_regime: no component maps to the item role ('" +
                         roles.item + "')");

    d.global_lhs = d.item_var;
    d.global_rhs = dominance * (d.labeler_var + d.judge_var + d.interaction_var);
    d.global_rule = d.global_lhs >= d.global_rhs;

    // Judge variance is reported but sits in neither numerator by default:
    // the individual-side signature is labeler plus pair alignment.
    d.individual_lhs = d.labeler_var + d.interaction_var;
    d.individual_rhs = dominance * d.item_var;
    d.individual_rule = d.individual_lhs >= d.individual_rhs;

    const double annotator_side = d.labeler_var + d.judge_var + d.interaction_var;
    d.dominance_ratio = d.item_var > 0.0
                            ? annotator_side / d.item_var
                            : std::numeric_limits<double>::infinity();

    if (d.global_rule && !d.individual_rule) {
        d.regime = Regime::Global;
    } else if (d.individual_rule && !d.global_rule) {
        d.regime = Regime::Individual;
    } else {
        d.regime = Regime::Hybrid;
        d.leaning = annotator_side > d.item_var ? "individual" : "global";
    }
    return d;
}

std::string RegimeDiagnosis::to_json() const {
    nlohmann::ordered_json j;
    j["regime"] = regime_name(regime);
    if (!leaning.empty()) j["leaning"] = leaning;
    j["dominance_threshold"] = dominance;
    // Null when the item variance is exactly zero (the ratio is unbounded).
    if (std::isfinite(dominance_ratio)) j["dominance_ratio"] = dominance_ratio;
    else j["dominance_ratio"] = nullptr;
    j["note"] = "threshold is artifact policy, not an estimated quantity";
    j["variances"] = {{"item", item_var},
                      {"labeler", labeler_var},
                      {"judge", judge_var},
                      {"interaction", interaction_var}};
    j["evidence"] = {
        {"global_rule",
         {{"holds", global_rule}, {"lhs_item_var", global_lhs}, {"rhs", global_rhs}}},
        {"individual_rule",
         {{"holds", individual_rule},
          {"lhs_labeler_plus_interaction", individual_lhs},
          {"rhs", individual_rhs}}}};
    return j.dump(2) + "\n";
}

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}
}  // namespace

std::string RegimeDiagnosis::to_markdown() const {
    const double total = item_var + labeler_var + judge_var + interaction_var;
    auto bar = [&](double v) {
        const int width = total > 0.0 ? static_cast<int>(std::lround(24.0 * v / total)) : 0;
        return std::string(static_cast<std::size_t>(width), '#');
    };
    auto row = [&](const char* name, double v) {
        return std::string("| ") + name + " | " + fmt(v) + " | " +
               fmt(total > 0.0 ? v / total : 0.0) + " | " + bar(v) + " |\n";
    };
    std::string s;
    s += "## Measurement regime diagnosis\n\n";
    s += "**Regime: " + regime_name(regime) + "**";
    if (!leaning.empty()) s += " (leaning " + leaning + ")";
    s += "\n\n";
    s += "| Component | Variance | Share | Profile |\n|---|---|---|---|\n";
    s += row("item", item_var);
    s += row("labeler", labeler_var);
    s += row("judge", judge_var);
    s += row("labeler-judge interaction", interaction_var);
    s += "\n";
    s += "Evidence (dominance threshold " + fmt(dominance) + ", artifact policy):\n\n";
    s += "- global rule: item = " + fmt(global_lhs) +
         (global_rule ? " >= " : " < ") + fmt(global_rhs) +
         " = threshold x (labeler + judge + interaction)\n";
    s += "- individual rule: labeler + interaction = " + fmt(individual_lhs) +
         (individual_rule ? " >= " : " < ") + fmt(individual_rhs) +
         " = threshold x item\n";
    s += "- annotator-side / item variance ratio: " + fmt(dominance_ratio) + "\n";
    return s;
}

std::vector<AicRow> compare_models(
    const std::vector<std::pair<std::string, const glmm::FitResult*>>& fits) {
    if (fits.size() < 2) throw data_error("compare_models: need at least two fits");
    const std::size_t n = fits.front().second->n_obs;
    for (const auto& [name, f] : fits)
        if (f->n_obs != n)
            throw data_error("compare_models: fits are not on the same rows (N " +
                             std::to_string(f->n_obs) + " vs " + std::to_string(n) + ")");
    double best = fits.front().second->aic;
    for (const auto& [_, f] : fits) best = std::min(best, f->aic);
    std::vector<AicRow> rows;
    for (const auto& [name, f] : fits)
        rows.push_back({name, f->loglik, f->aic, f->aic - best});
    return rows;
}

}  // namespace labelmeas::diag
