#pragma once

#include <string>
#include <vector>

#include "labelmeas/dataset.hpp"
#include "labelmeas/diagnostic.hpp"
#include "labelmeas/glmm.hpp"

namespace labelmeas::report {

enum class Style { Json, Markdown };

/// Significance marker: *** p<.001, ** p<.01, * p<.05, dagger p<.10.
std::string significance_stars(double p);

/// "OR [lo, hi]stars" cell, two decimals, matching the table convention.
std::string or_cell(const glmm::Coefficient& c);

/// FitResult as a stable-schema JSON document (see README for the schema).
std::string fit_to_json(const glmm::FitResult& fit, const std::string& name);

/// Coefficient table (OR [95% CI] with stars), variance components
/// (Var / SD), and the fit block (logLik, AIC, N, groups).
std::string summarize(const glmm::FitResult& fit, Style style,
                      const std::string& name = "model");

/// One document: every model summary, the delta-AIC comparison (when >= 2
/// fits share rows), the regime diagnosis, and the exclusion ledger.
std::string render_report(
    const std::vector<std::pair<std::string, const glmm::FitResult*>>& fits,
    const diag::RegimeDiagnosis* diagnosis, const pipe::ExclusionLedger* ledger);

}  // namespace labelmeas::report
