#include "labelmeas/runner.hpp"

#include <algorithm>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "labelmeas/dataset.hpp"
#include "labelmeas/errors.hpp"
#include "labelmeas/features.hpp"
#include "labelmeas/ndjson.hpp"
#include "labelmeas/report.hpp"
#include "labelmeas/sha256.hpp"

namespace labelmeas::cli {

namespace fs = std::filesystem;

const std::vector<std::string> kStages = {"simulate", "features", "outcomes",
                                          "fit",      "diagnose", "report"};

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << text;
    if (!out) throw data_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Non-finite values round-trip through JSON as nulls.
double num_or_nan(const nlohmann::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::numeric_limits<double>::quiet_NaN();
    return it->get<double>();
}

// Rebuilds the fields render_report needs from a fit artifact.
glmm::FitResult fit_from_json(const std::string& text, std::string* name) {
    nlohmann::json j = nlohmann::json::parse(text);
    glmm::FitResult fit;
    if (name) *name = j.value("model", "model");
    fit.converged = j.value("converged", true);
    fit.n_obs = j.at("n_obs").get<std::size_t>();
    fit.loglik = num_or_nan(j, "loglik");
    fit.aic = num_or_nan(j, "aic");
    fit.ci_level = j.value("ci_level", 0.95);
    for (const auto& c : j.at("coefficients")) {
        glmm::Coefficient co;
        co.name = c.at("name").get<std::string>();
        co.estimate = num_or_nan(c, "estimate");
        co.se = num_or_nan(c, "se");
        co.z = num_or_nan(c, "z");
        co.p = num_or_nan(c, "p");
        co.odds = num_or_nan(c, "or");
        co.ci_lo = num_or_nan(c, "ci_lo");
        co.ci_hi = num_or_nan(c, "ci_hi");
        fit.coefficients.push_back(co);
    }
    for (const auto& v : j.at("variance_components")) {
        glmm::VarianceComponent vc;
        vc.factor = v.at("factor").get<std::string>();
        vc.variance = num_or_nan(v, "variance");
        vc.sd = num_or_nan(v, "sd");
        vc.n_levels = v.at("n_levels").get<std::size_t>();
        vc.boundary = v.at("boundary").get<bool>();
        fit.variance_components.push_back(vc);
    }
    if (j.contains("theta")) fit.theta = j.at("theta").get<std::vector<double>>();
    if (j.contains("warnings"))
        fit.warnings = j.at("warnings").get<std::vector<std::string>>();
    return fit;
}

class ManifestWriter {
  public:
    ManifestWriter(const std::string& out_dir, const RunConfig& cfg)
        : out_dir_(out_dir), path_(out_dir + "/manifest.json"), cfg_(cfg) {
        if (fs::exists(path_))
            doc_ = nlohmann::ordered_json::parse(read_text(path_));
        if (!doc_.contains("stages")) {
            doc_ = nlohmann::ordered_json::object();
            doc_["tool"] = "labelmeas";
            doc_["version"] = "0.1.0";
            doc_["stages"] = nlohmann::ordered_json::object();
        }
    }

    // Inputs inside out_dir are keyed by basename so manifests from runs in
    // different directories stay comparable.
    void record_input(const std::string& path) {
        std::string key = path;
        const std::string prefix = out_dir_ + "/";
        if (key.rfind(prefix, 0) == 0) key = key.substr(prefix.size());
        inputs_[key] = sha256_file(path);
    }
    void record_output(const std::string& path) {
        outputs_[fs::path(path).filename().string()] = sha256_file(path);
    }
    void skip(const std::string& stage, const std::string& reason) {
        nlohmann::ordered_json e;
        e["status"] = "skipped";
        e["reason"] = reason;
        e["completed_unix"] = static_cast<long long>(std::time(nullptr));
        doc_["stages"][stage] = e;
        save();
    }
    void done(const std::string& stage) { finish(stage, "ok", ""); }
    void failed(const std::string& stage, const std::string& error) {
        finish(stage, "failed", error);
    }

  private:
    void finish(const std::string& stage, const std::string& status,
                const std::string& error) {
        nlohmann::ordered_json e;
        e["status"] = status;
        if (!error.empty()) e["error"] = error;
        e["seed"] = cfg_.seed;
        e["inputs"] = inputs_;
        e["outputs"] = outputs_;
        e["completed_unix"] = static_cast<long long>(std::time(nullptr));
        doc_["stages"][stage] = e;
        save();
    }
    void save() { write_text(path_, doc_.dump(2) + "\n"); }

    std::string out_dir_;
    std::string path_;
    const RunConfig& cfg_;
    nlohmann::ordered_json doc_;
    nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json outputs_ = nlohmann::ordered_json::object();
};

}  // namespace

Runner::Runner(RunConfig cfg) : cfg_(std::move(cfg)) {
    fs::create_directories(cfg_.out_dir);
}

std::string Runner::artifact_path(const std::string& basename) const {
    return cfg_.out_dir + "/" + basename;
}

void Runner::run_stage(const std::string& stage) {
    ManifestWriter manifest(cfg_.out_dir, cfg_);
    try {
        if (stage == "simulate") {
            if (!cfg_.simulate) {
                manifest.skip(stage, "config has no [simulate] block");
                return;
            }
            do_simulate();
        } else if (stage == "features") {
            if (!cfg_.inputs) {
                manifest.skip(stage, "simulation runs carry no item text");
                return;
            }
            do_features();
        } else if (stage == "outcomes") {
            if (!cfg_.inputs) {
                manifest.skip(stage, "simulation already emits modeled outcome tables");
                return;
            }
            do_outcomes();
        } else if (stage == "fit") {
            do_fit();
        } else if (stage == "diagnose") {
            if (!cfg_.diagnose) {
                manifest.skip(stage, "config has no [diagnose] block");
                return;
            }
            do_diagnose();
        } else if (stage == "report") {
            do_report();
        } else {
            throw config_error("unknown stage: " + stage);
        }
    } catch (const std::exception& e) {
        ManifestWriter fail_manifest(cfg_.out_dir, cfg_);
        fail_manifest.failed(stage, e.what());
        throw;
    }

    // Re-scan the stage's artifacts for the manifest entry.
    ManifestWriter ok(cfg_.out_dir, cfg_);
    auto note_outputs = [&](const std::vector<std::string>& names) {
        for (const auto& nm : names) {
            const std::string p = artifact_path(nm);
            if (fs::exists(p)) ok.record_output(p);
        }
    };
    if (stage == "simulate") {
        note_outputs({"sim_outcomes.ndjson", "sim_pairwise.ndjson", "truth.json"});
    } else if (stage == "features") {
        ok.record_input(cfg_.inputs->items);
        ok.record_input(cfg_.inputs->validations);
        note_outputs({"features.ndjson", "features_exclusions.json"});
    } else if (stage == "outcomes") {
        ok.record_input(cfg_.inputs->items);
        ok.record_input(cfg_.inputs->annotations);
        ok.record_input(cfg_.inputs->validations);
        note_outputs({"outcomes_global.ndjson", "outcomes_individual.ndjson",
                      "pairwise.ndjson", "consensus.json", "outcomes_exclusions.json"});
    } else if (stage == "fit") {
        std::vector<std::string> names;
        for (const auto& m : cfg_.models) {
            const std::string t = artifact_path(m.table + ".ndjson");
            if (fs::exists(t)) ok.record_input(t);
            names.push_back("fit_" + m.name + ".json");
            names.push_back("fit_" + m.name + ".md");
        }
        note_outputs(names);
    } else if (stage == "diagnose") {
        const std::string f = artifact_path("fit_" + cfg_.diagnose->model + ".json");
        if (fs::exists(f)) ok.record_input(f);
        note_outputs({"diagnosis.json", "diagnosis.md"});
    } else if (stage == "report") {
        for (const auto& m : cfg_.models) {
            const std::string f = artifact_path("fit_" + m.name + ".json");
            if (fs::exists(f)) ok.record_input(f);
        }
        note_outputs({"report.md", "report.json"});
    }
    ok.done(stage);
}

void Runner::run_all() {
    for (const auto& s : kStages) run_stage(s);
}

void Runner::do_simulate() {
    const SimulateBlock& sb = *cfg_.simulate;
    sim::SimDesign design = sb.design;
    design.seed = cfg_.seed;

    const sim::SimOutput out = sim::simulate_correctness(design, sb.params);
    ndjson::write_file(out.to_table(), artifact_path("sim_outcomes.ndjson"));

    const sim::PairwiseSimOutput pw =
        sim::simulate_pairwise(design, sb.pairwise_alpha, sb.pairwise_sds);
    ndjson::write_file(pw.to_table(), artifact_path("sim_pairwise.ndjson"));

    nlohmann::ordered_json truth;
    truth["correctness"] = nlohmann::ordered_json::parse(out.truth_json());
    truth["pairwise"] = nlohmann::ordered_json::parse(pw.truth_json());
    write_text(artifact_path("truth.json"), truth.dump(2) + "\n");
}

void Runner::do_features() {
    const LabelSet labels(cfg_.labels);
    const pipe::Dataset ds = pipe::parse_inputs(
        cfg_.inputs->items, cfg_.inputs->annotations, cfg_.inputs->validations, labels);
    pipe::ExclusionLedger ledger;
    const DataTable features =
        feats::build_feature_table(ds.items, ds.validations, ledger);
    ndjson::write_file(features, artifact_path("features.ndjson"));
    write_text(artifact_path("features_exclusions.json"), ledger.to_json());
}

void Runner::do_outcomes() {
    const LabelSet labels(cfg_.labels);
    const pipe::Dataset ds = pipe::parse_inputs(
        cfg_.inputs->items, cfg_.inputs->annotations, cfg_.inputs->validations, labels);
    pipe::ExclusionLedger ledger;

    const pipe::ConsensusMap consensus = pipe::infer_consensus(ds.validations, ds.labels);
    ledger.bump("consensus_undefined_items",
                static_cast<long long>(consensus.undefined_items.size()));

    DataTable global =
        pipe::build_global_outcomes(ds.annotations, consensus, ds.validations, ledger);
    DataTable individual = pipe::build_individual_outcomes(ds.validations, ledger);
    const DataTable pairwise = pipe::build_pairwise_table(ds.validations, ledger);

    // Attach instance features when the features stage already ran.
    const std::string feat_path = artifact_path("features.ndjson");
    if (fs::exists(feat_path)) {
        const DataTable features = ndjson::read_file(feat_path);
        global = global.left_join(features, "item");
        individual = individual.left_join(features, "item");
    }

    ndjson::write_file(global, artifact_path("outcomes_global.ndjson"));
    ndjson::write_file(individual, artifact_path("outcomes_individual.ndjson"));
    ndjson::write_file(pairwise, artifact_path("pairwise.ndjson"));

    nlohmann::ordered_json cj = nlohmann::ordered_json::object();
    for (const auto& [item, entry] : consensus.by_item) {
        cj[item] = {{"mu_label", entry.mu_label},
                    {"valid_counts", entry.valid_counts},
                    {"tie", entry.tie}};
    }
    nlohmann::ordered_json cdoc;
    cdoc["consensus"] = cj;
    cdoc["undefined_items"] = consensus.undefined_items;
    write_text(artifact_path("consensus.json"), cdoc.dump(2) + "\n");
    write_text(artifact_path("outcomes_exclusions.json"), ledger.to_json());
}

void Runner::do_fit() {
    for (const auto& m : cfg_.models) {
        const std::string table_path = artifact_path(m.table + ".ndjson");
        if (!fs::exists(table_path))
            throw data_error("fit: missing dependency " + table_path +
                             " for model '" + m.name +
                             "'; run the producing stage first");
        const DataTable data = ndjson::read_file(table_path);
        const glmm::FitResult fit = glmm::fit(data, m.spec);
        write_text(artifact_path("fit_" + m.name + ".json"),
                   report::fit_to_json(fit, m.name));
        if (cfg_.formats.count("markdown"))
            write_text(artifact_path("fit_" + m.name + ".md"),
                       report::summarize(fit, report::Style::Markdown, m.name));
    }
}

void Runner::do_diagnose() {
    const DiagnoseBlock& d = *cfg_.diagnose;
    const std::string fit_path = artifact_path("fit_" + d.model + ".json");
    if (!fs::exists(fit_path))
        throw data_error("diagnose: missing dependency " + fit_path +
                         "; run 'fit' first");
    std::string name;
    const glmm::FitResult fit = fit_from_json(read_text(fit_path), &name);
    const diag::VarianceProfile profile = diag::variance_profile(fit, name);
    const diag::RegimeDiagnosis diagnosis =
        diag::classify_regime(profile, d.dominance, d.roles);
    write_text(artifact_path("diagnosis.json"), diagnosis.to_json());
    if (cfg_.formats.count("markdown"))
        write_text(artifact_path("diagnosis.md"), diagnosis.to_markdown());
}

void Runner::do_report() {
    std::vector<std::pair<std::string, glmm::FitResult>> fits;
    for (const auto& m : cfg_.models) {
        const std::string p = artifact_path("fit_" + m.name + ".json");
        if (!fs::exists(p))
            throw data_error("report: missing dependency " + p + "; run 'fit' first");
        std::string name;
        fits.emplace_back(m.name, fit_from_json(read_text(p), &name));
    }
    std::vector<std::pair<std::string, const glmm::FitResult*>> views;
    views.reserve(fits.size());
    for (const auto& [n, f] : fits) views.emplace_back(n, &f);

    diag::RegimeDiagnosis diagnosis;
    bool have_diag = false;
    const std::string diag_path = artifact_path("diagnosis.json");
    if (fs::exists(diag_path)) {
        const nlohmann::json dj = nlohmann::json::parse(read_text(diag_path));
        const std::string r = dj.at("regime").get<std::string>();
        diagnosis.regime = r == "global" ? diag::Regime::Global
                           : r == "individual" ? diag::Regime::Individual
                                               : diag::Regime::Hybrid;
        diagnosis.leaning = dj.value("leaning", "");
        diagnosis.dominance = dj.at("dominance_threshold").get<double>();
        diagnosis.dominance_ratio = dj.at("dominance_ratio").is_null()
                                        ? std::numeric_limits<double>::infinity()
                                        : dj.at("dominance_ratio").get<double>();
        diagnosis.item_var = num_or_nan(dj.at("variances"), "item");
        diagnosis.labeler_var = num_or_nan(dj.at("variances"), "labeler");
        diagnosis.judge_var = num_or_nan(dj.at("variances"), "judge");
        diagnosis.interaction_var = num_or_nan(dj.at("variances"), "interaction");
        const auto& ev = dj.at("evidence");
        diagnosis.global_rule = ev.at("global_rule").at("holds").get<bool>();
        diagnosis.global_lhs = num_or_nan(ev.at("global_rule"), "lhs_item_var");
        diagnosis.global_rhs = num_or_nan(ev.at("global_rule"), "rhs");
        diagnosis.individual_rule = ev.at("individual_rule").at("holds").get<bool>();
        diagnosis.individual_lhs =
            num_or_nan(ev.at("individual_rule"), "lhs_labeler_plus_interaction");
        diagnosis.individual_rhs = num_or_nan(ev.at("individual_rule"), "rhs");
        have_diag = true;
    }

    pipe::ExclusionLedger ledger;
    bool have_ledger = false;
    for (const char* base : {"outcomes_exclusions.json", "features_exclusions.json"}) {
        const std::string p = artifact_path(base);
        if (!fs::exists(p)) continue;
        const nlohmann::json ej = nlohmann::json::parse(read_text(p));
        for (auto it = ej.begin(); it != ej.end(); ++it)
            ledger.bump(it.key(), it.value().get<long long>());
        have_ledger = true;
    }

    if (cfg_.formats.count("markdown") || !cfg_.formats.count("json"))
        write_text(artifact_path("report.md"),
                   report::render_report(views, have_diag ? &diagnosis : nullptr,
                                         have_ledger ? &ledger : nullptr));
    if (cfg_.formats.count("json")) {
        nlohmann::ordered_json j;
        j["models"] = nlohmann::ordered_json::array();
        for (const auto& [n, f] : fits)
            j["models"].push_back(nlohmann::ordered_json::parse(report::fit_to_json(f, n)));
        if (have_diag)
            j["diagnosis"] = nlohmann::ordered_json::parse(diagnosis.to_json());
        if (have_ledger)
            j["exclusions"] = nlohmann::ordered_json::parse(ledger.to_json());
        write_text(artifact_path("report.json"), j.dump(2) + "\n");
    }
}

}  // namespace labelmeas::cli
