#include "labelmeas/report.hpp"

#include <cstdio>

#include <json.hpp>

#include "labelmeas/errors.hpp"

namespace labelmeas::report {

namespace {

std::string num(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    if (p < 0.10) return "†";  // dagger
    return "";
}

std::string or_cell(const glmm::Coefficient& c) {
    return num(c.odds, 2) + " [" + num(c.ci_lo, 2) + ", " + num(c.ci_hi, 2) + "]" +
           significance_stars(c.p);
}

std::string fit_to_json(const glmm::FitResult& fit, const std::string& name) {
    nlohmann::ordered_json j;
    j["model"] = name;
    j["converged"] = fit.converged;
    j["n_obs"] = fit.n_obs;
    j["loglik"] = fit.loglik;
    j["aic"] = fit.aic;
    j["ci_level"] = fit.ci_level;
    j["coefficients"] = nlohmann::ordered_json::array();
    for (const auto& c : fit.coefficients) {
        j["coefficients"].push_back({{"name", c.name},
                                     {"estimate", c.estimate},
                                     {"se", c.se},
                                     {"z", c.z},
                                     {"p", c.p},
                                     {"or", c.odds},
                                     {"ci_lo", c.ci_lo},
                                     {"ci_hi", c.ci_hi}});
    }
    j["variance_components"] = nlohmann::ordered_json::array();
    for (const auto& v : fit.variance_components) {
        j["variance_components"].push_back({{"factor", v.factor},
                                            {"variance", v.variance},
                                            {"sd", v.sd},
                                            {"n_levels", v.n_levels},
                                            {"boundary", v.boundary}});
    }
    j["theta"] = fit.theta;
    j["n_outer_evals"] = fit.n_outer_evals;
    j["warnings"] = fit.warnings;
    return j.dump(2) + "\n";
}

std::string summarize(const glmm::FitResult& fit, Style style, const std::string& name) {
    if (style == Style::Json) return fit_to_json(fit, name);

    std::string s;
    s += "### Model: " + name + "\n\n";
    s += "**Fixed Effects (OR [95% CI])**\n\n";
    s += "| Term | Estimate |\n|---|---|\n";
    for (const auto& c : fit.coefficients)
        s += "| " + c.name + " | " + or_cell(c) + " |\n";
    s += "\n**Random Effects (Var / SD)**\n\n";
    s += "| Group | Var / SD |\n|---|---|\n";
    for (const auto& v : fit.variance_components) {
        s += "| " + v.factor + " (Intercept) | " + num(v.variance, 2) + " / " +
             num(v.sd, 2) + (v.boundary ? " (boundary)" : "") + " |\n";
    }
    s += "\n**Model Fit**\n\n";
    s += "| | |\n|---|---|\n";
    s += "| Log-Likelihood | " + num(fit.loglik, 2) + " |\n";
    s += "| AIC | " + num(fit.aic, 1) + " |\n";
    s += "| N | " + std::to_string(fit.n_obs) + " |\n";
    std::string groups;
    for (const auto& v : fit.variance_components) {
        if (!groups.empty()) groups += "; ";
        groups += v.factor + " = " + std::to_string(v.n_levels);
    }
    if (!groups.empty()) s += "| Groups | " + groups + " |\n";
    if (!fit.converged) s += "| Converged | no |\n";
    s += "\nSignificance: *** p<.001, ** p<.01, * p<.05, † p<.10.\n";
    return s;
}

std::string render_report(
    const std::vector<std::pair<std::string, const glmm::FitResult*>>& fits,
    const diag::RegimeDiagnosis* diagnosis, const pipe::ExclusionLedger* ledger) {
    if (fits.empty()) throw data_error("render_report: need at least one fit");

    std::string s = "# Labeling measurement report\n\n";
    for (const auto& [name, f] : fits) s += summarize(*f, Style::Markdown, name) + "\n";

    // Delta-AIC block for each group of fits sharing the same N.
    std::map<std::size_t, std::vector<std::pair<std::string, const glmm::FitResult*>>>
        by_n;
    for (const auto& f : fits) by_n[f.second->n_obs].push_back(f);
    for (const auto& [n, group] : by_n) {
        if (group.size() < 2) continue;
        s += "## Model comparison (N = " + std::to_string(n) + ")\n\n";
        s += "| Model | Log-Likelihood | AIC | dAIC |\n|---|---|---|---|\n";
        for (const auto& row : diag::compare_models(group)) {
            char lbuf[64], abuf[64], dbuf[64];
            std::snprintf(lbuf, sizeof lbuf, "%.2f", row.loglik);
            std::snprintf(abuf, sizeof abuf, "%.1f", row.aic);
            std::snprintf(dbuf, sizeof dbuf, "%.1f", row.delta);
            s += "| " + row.name + " | " + lbuf + " | " + abuf + " | " + dbuf + " |\n";
        }
        s += "\n";
    }

    if (diagnosis) s += diagnosis->to_markdown() + "\n";

    if (ledger && !ledger->counts.empty()) {
        s += "## Exclusion ledger\n\n| Reason | Rows |\n|---|---|\n";
        for (const auto& [reason, count] : ledger->counts)
            s += "| " + reason + " | " + std::to_string(count) + " |\n";
        s += "\n";
    }
    return s;
}

}  // namespace labelmeas::report
