#include "labelmeas/simulate.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "labelmeas/errors.hpp"
#include "labelmeas/rng.hpp"

namespace labelmeas::sim {

namespace {

std::string padded_id(char prefix, std::int32_t index, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*d", prefix, std::min(width, 12), index + 1);
    return buf;
}

int width_for(int count) {
    int w = 1;
    for (int c = count; c >= 10; c /= 10) ++w;
    return w;
}

}  // namespace

void SimDesign::validate() const {
    if (n_items < 1 || n_annotators < 1 || n_trials < 1)
        throw config_error("SimDesign: n_items, n_annotators, n_trials must all be >= 1");
}

std::size_t SimDesign::n_rows() const {
    return static_cast<std::size_t>(n_items) * static_cast<std::size_t>(n_annotators) *
           static_cast<std::size_t>(n_trials);
}

std::string SimOutput::item_id(std::int32_t j) const {
    return padded_id('i', j, width_for(design.n_items));
}
std::string SimOutput::annotator_id(std::int32_t i) const {
    return padded_id('a', i, width_for(design.n_annotators));
}
std::string SimOutput::session_id(std::int32_t i, std::int32_t t) const {
    return annotator_id(i) + ":t" + std::to_string(t);
}

SimOutput simulate_correctness(const SimDesign& design, const GenerativeParams& params) {
    design.validate();
    params.validate();
    if (params.delta_interp_sd > 0.0 && design.regime == Regime::Global)
        throw config_error(
            "simulate_correctness: delta_interp_sd > 0 requires the HLV regime");

    SimOutput out;
    out.design = design;
    out.params = params;
    const std::uint64_t seed = design.seed;
    const auto ni = static_cast<std::size_t>(design.n_items);
    const auto na = static_cast<std::size_t>(design.n_annotators);
    const auto nt = static_cast<std::size_t>(design.n_trials);

    out.item_effects.resize(ni);
    for (std::size_t j = 0; j < ni; ++j)
        out.item_effects[j] = params.beta_item_sd * rng::normal(seed, rng::Kind::Item, j);
    out.annotator_effects.resize(na);
    for (std::size_t i = 0; i < na; ++i)
        out.annotator_effects[i] =
            params.rho_annotator_sd * rng::normal(seed, rng::Kind::Annotator, i);

    switch (design.situational) {
        case SituationalStructure::PerSession:
            out.situational_effects.resize(na * nt);
            for (std::size_t i = 0; i < na; ++i)
                for (std::size_t t = 0; t < nt; ++t)
                    out.situational_effects[i * nt + t] =
                        params.sigma_trial_sd * rng::normal(seed, rng::Kind::Session, i, t);
            break;
        case SituationalStructure::PerTrialShared:
            out.situational_effects.resize(nt);
            for (std::size_t t = 0; t < nt; ++t)
                out.situational_effects[t] =
                    params.sigma_trial_sd * rng::normal(seed, rng::Kind::TrialShared, t);
            break;
        case SituationalStructure::PerCell:
            out.situational_effects.resize(ni * na * nt);
            for (std::size_t j = 0; j < ni; ++j)
                for (std::size_t i = 0; i < na; ++i)
                    for (std::size_t t = 0; t < nt; ++t)
                        out.situational_effects[(j * na + i) * nt + t] =
                            params.sigma_trial_sd *
                            rng::normal(seed, rng::Kind::CellNoise, j, i, t);
            break;
    }

    if (design.regime == Regime::Hlv) {
        out.interp_effects.resize(ni * na);
        for (std::size_t j = 0; j < ni; ++j)
            for (std::size_t i = 0; i < na; ++i)
                out.interp_effects[j * na + i] =
                    params.delta_interp_sd * rng::normal(seed, rng::Kind::Interp, j, i);
    }

    out.records.reserve(design.n_rows());
    for (std::size_t j = 0; j < ni; ++j) {
        for (std::size_t i = 0; i < na; ++i) {
            for (std::size_t t = 0; t < nt; ++t) {
                EffectDraws draws;
                draws.beta_item = out.item_effects[j];
                draws.rho_annotator = out.annotator_effects[i];
                switch (design.situational) {
                    case SituationalStructure::PerSession:
                        draws.sigma_situational = out.situational_effects[i * nt + t];
                        break;
                    case SituationalStructure::PerTrialShared:
                        draws.sigma_situational = out.situational_effects[t];
                        break;
                    case SituationalStructure::PerCell:
                        draws.sigma_situational =
                            out.situational_effects[(j * na + i) * nt + t];
                        break;
                }
                if (design.regime == Regime::Hlv)
                    draws.delta_interp = out.interp_effects[j * na + i];

                SimRecord rec;
                rec.item = static_cast<std::int32_t>(j);
                rec.annotator = static_cast<std::int32_t>(i);
                rec.trial = static_cast<std::int32_t>(t) + 1;
                rec.propensity = latent_propensity(params, draws, design.regime);
                const double pr = link_apply(params.link, rec.propensity);
                rec.correct = rng::bernoulli(pr, seed, rng::Kind::Outcome, j, i, t);
                out.records.push_back(rec);
            }
        }
    }
    return out;
}

DataTable SimOutput::to_table() const {
    DataTable t;
    t.add_column("item", ColumnType::Str);
    t.add_column("annotator", ColumnType::Str);
    t.add_column("trial", ColumnType::Num);
    t.add_column("session", ColumnType::Str);
    t.add_column("y_correct", ColumnType::Num);
    t.add_column("z_error", ColumnType::Num);
    for (const auto& r : records) {
        const std::size_t row = t.add_row();
        t.set_str(row, "item", item_id(r.item));
        t.set_str(row, "annotator", annotator_id(r.annotator));
        t.set_num(row, "trial", r.trial);
        t.set_str(row, "session", session_id(r.annotator, r.trial));
        t.set_num(row, "y_correct", r.correct ? 1.0 : 0.0);
        t.set_num(row, "z_error", r.correct ? 0.0 : 1.0);
    }
    return t;
}

std::string SimOutput::truth_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "correctness";
    j["seed"] = design.seed;
    j["design"] = {{"n_items", design.n_items},
                   {"n_annotators", design.n_annotators},
                   {"n_trials", design.n_trials},
                   {"regime", design.regime == Regime::Hlv ? "hlv" : "global"},
                   {"situational",
                    design.situational == SituationalStructure::PerSession
                        ? "per_session"
                        : (design.situational == SituationalStructure::PerTrialShared
                               ? "per_trial_shared"
                               : "per_cell")}};
    j["params"] = {{"mu", params.mu},
                   {"beta_item_sd", params.beta_item_sd},
                   {"rho_annotator_sd", params.rho_annotator_sd},
                   {"sigma_trial_sd", params.sigma_trial_sd},
                   {"delta_interp_sd", params.delta_interp_sd},
                   {"link", params.link == LinkKind::Logit ? "logit" : "probit"}};
    j["effects"] = {{"item", item_effects},
                    {"annotator", annotator_effects},
                    {"situational", situational_effects},
                    {"interpretive", interp_effects}};
    return j.dump(2) + "\n";
}

PairwiseSimOutput simulate_pairwise(const SimDesign& design, double alpha,
                                    const PairwiseSds& sds) {
    design.validate();
    if (design.n_annotators < 2)
        throw config_error("simulate_pairwise: needs at least 2 annotators");
    const double all[] = {sds.labeler, sds.judge, sds.item, sds.interaction};
    for (double s : all)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw config_error("simulate_pairwise: SDs must be finite and >= 0");
    if (!std::isfinite(alpha)) throw config_error("simulate_pairwise: alpha must be finite");

    PairwiseSimOutput out;
    out.design = design;
    out.alpha = alpha;
    out.sds = sds;
    const std::uint64_t seed = design.seed;
    const auto ni = static_cast<std::size_t>(design.n_items);
    const auto na = static_cast<std::size_t>(design.n_annotators);

    out.labeler_effects.resize(na);
    out.judge_effects.resize(na);
    for (std::size_t i = 0; i < na; ++i) {
        out.labeler_effects[i] = sds.labeler * rng::normal(seed, rng::Kind::PairLabeler, i);
        out.judge_effects[i] = sds.judge * rng::normal(seed, rng::Kind::PairJudge, i);
    }
    out.item_effects.resize(ni);
    for (std::size_t j = 0; j < ni; ++j)
        out.item_effects[j] = sds.item * rng::normal(seed, rng::Kind::PairItem, j);
    out.interaction_effects.resize(na * na);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t k = 0; k < na; ++k)
            out.interaction_effects[i * na + k] =
                sds.interaction * rng::normal(seed, rng::Kind::PairInteraction, i, k);

    out.records.reserve(ni * na * na);
    for (std::size_t j = 0; j < ni; ++j) {
        for (std::size_t i = 0; i < na; ++i) {
            for (std::size_t k = 0; k < na; ++k) {
                const double eta = alpha + out.labeler_effects[i] + out.judge_effects[k] +
                                   out.item_effects[j] + out.interaction_effects[i * na + k];
                PairwiseRecord rec;
                rec.item = static_cast<std::int32_t>(j);
                rec.labeler = static_cast<std::int32_t>(i);
                rec.judge = static_cast<std::int32_t>(k);
                rec.validated = rng::bernoulli(link_apply(LinkKind::Logit, eta), seed,
                                               rng::Kind::PairOutcome, j, i, k);
                out.records.push_back(rec);
            }
        }
    }
    return out;
}

DataTable PairwiseSimOutput::to_table() const {
    const int wi = width_for(design.n_items);
    const int wa = width_for(design.n_annotators);
    DataTable t;
    t.add_column("item", ColumnType::Str);
    t.add_column("labeler", ColumnType::Str);
    t.add_column("judge", ColumnType::Str);
    t.add_column("pair", ColumnType::Str);
    t.add_column("v", ColumnType::Num);
    for (const auto& r : records) {
        const std::size_t row = t.add_row();
        const std::string lab = padded_id('a', r.labeler, wa);
        const std::string jud = padded_id('a', r.judge, wa);
        t.set_str(row, "item", padded_id('i', r.item, wi));
        t.set_str(row, "labeler", lab);
        t.set_str(row, "judge", jud);
        t.set_str(row, "pair", lab + "|" + jud);
        t.set_num(row, "v", r.validated ? 1.0 : 0.0);
    }
    return t;
}

std::string PairwiseSimOutput::truth_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "pairwise";
    j["seed"] = design.seed;
    j["design"] = {{"n_items", design.n_items}, {"n_annotators", design.n_annotators}};
    j["alpha"] = alpha;
    j["sds"] = {{"labeler", sds.labeler},
                {"judge", sds.judge},
                {"item", sds.item},
                {"interaction", sds.interaction}};
    j["effects"] = {{"labeler", labeler_effects},
                    {"judge", judge_effects},
                    {"item", item_effects},
                    {"interaction", interaction_effects}};
    return j.dump(2) + "\n";
}

Preset preset(const std::string& name) {
    Preset p;
    p.name = name;
    p.design.n_items = 200;
    p.design.n_annotators = 20;
    p.design.n_trials = 2;
    p.design.regime = Regime::Global;
    p.params.mu = 1.0;  // mostly-correct baseline, mirroring real labeling tasks
    p.params.beta_item_sd = 0.05;
    p.params.rho_annotator_sd = 0.05;
    p.params.sigma_trial_sd = 0.05;
    p.params.delta_interp_sd = 0.0;
    p.pairwise_alpha = 2.2;

    if (name == "instance_error") {
        p.params.beta_item_sd = 1.0;
    } else if (name == "between_person") {
        p.params.rho_annotator_sd = 1.0;
    } else if (name == "within_person") {
        p.params.sigma_trial_sd = 1.0;
    } else if (name == "interpretive") {
        p.design.regime = Regime::Hlv;
        p.params.delta_interp_sd = 1.0;
    } else {
        throw config_error("unknown preset: " + name +
                           " (expected instance_error, between_person, within_person, "
                           "or interpretive)");
    }

    // Validation-table components mirror the correctness components: shared
    // item difficulty surfaces as item variance, stable annotator tendencies
    // as labeler/judge variance, interpretive deviation as pair alignment.
    p.pairwise_sds.item = p.params.beta_item_sd;
    p.pairwise_sds.labeler = p.params.rho_annotator_sd;
    p.pairwise_sds.judge = p.params.rho_annotator_sd;
    p.pairwise_sds.interaction = p.params.delta_interp_sd;
    return p;
}

}  // namespace labelmeas::sim
