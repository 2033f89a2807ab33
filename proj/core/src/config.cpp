#include "labelmeas/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "labelmeas/errors.hpp"

namespace labelmeas::cli {

namespace {

struct Cursor {
    const std::string& s;
    std::size_t i = 0;
    std::size_t line = 1;
    const std::string& origin;

    [[noreturn]] void fail(const std::string& msg) const {
        throw config_error(origin + ":" + std::to_string(line) + ": " + msg);
    }
    bool done() const { return i >= s.size(); }
    char peek() const { return done() ? '\0' : s[i]; }
    void skip_inline_ws() {
        while (!done() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_bare_key(Cursor& c) {
    c.skip_inline_ws();
    std::string k;
    while (!c.done() && is_bare_key_char(c.peek())) k += c.s[c.i++];
    if (k.empty()) c.fail("expected a key");
    return k;
}

TomlValue parse_value(Cursor& c);

TomlValue parse_string_value(Cursor& c) {
    ++c.i;  // opening quote
    TomlValue v;
    v.kind = TomlValue::Kind::Str;
    while (!c.done() && c.peek() != '"') {
        char ch = c.s[c.i++];
        if (ch == '\n') c.fail("unterminated string");
        if (ch == '\\') {
            if (c.done()) c.fail("dangling escape");
            const char e = c.s[c.i++];
            switch (e) {
                case 'n': ch = '\n'; break;
                case 't': ch = '\t'; break;
                case '"': ch = '"'; break;
                case '\\': ch = '\\'; break;
                default: c.fail(std::string("unsupported escape \\") + e);
            }
        }
        v.str += ch;
    }
    if (c.done()) c.fail("unterminated string");
    ++c.i;  // closing quote
    return v;
}

TomlValue parse_value(Cursor& c) {
    c.skip_inline_ws();
    if (c.done()) c.fail("expected a value");
    const char ch = c.peek();
    if (ch == '"') return parse_string_value(c);
    if (ch == '[') {
        ++c.i;
        TomlValue v;
        v.kind = TomlValue::Kind::Array;
        c.skip_inline_ws();
        if (c.peek() == ']') {
            ++c.i;
            return v;
        }
        for (;;) {
            v.array.push_back(parse_value(c));
            c.skip_inline_ws();
            if (c.peek() == ',') {
                ++c.i;
                c.skip_inline_ws();
                if (c.peek() == ']') { ++c.i; break; }  // trailing comma
                continue;
            }
            if (c.peek() == ']') {
                ++c.i;
                break;
            }
            c.fail("expected ',' or ']' in array");
        }
        return v;
    }
    if (ch == '{') {
        ++c.i;
        TomlValue v;
        v.kind = TomlValue::Kind::Table;
        c.skip_inline_ws();
        if (c.peek() == '}') {
            ++c.i;
            return v;
        }
        for (;;) {
            const std::string k = parse_bare_key(c);
            c.skip_inline_ws();
            if (c.peek() != '=') c.fail("expected '=' in inline table");
            ++c.i;
            v.table[k] = parse_value(c);
            c.skip_inline_ws();
            if (c.peek() == ',') {
                ++c.i;
                continue;
            }
            if (c.peek() == '}') {
                ++c.i;
                break;
            }
            c.fail("expected ',' or '}' in inline table");
        }
        return v;
    }
    // bare token: bool or number
    std::string tok;
    while (!c.done() && c.peek() != ',' && c.peek() != ']' && c.peek() != '}' &&
           c.peek() != '#' && c.peek() != '\n' && c.peek() != ' ' && c.peek() != '\t')
        tok += c.s[c.i++];
    if (tok == "true" || tok == "false") {
        TomlValue v;
        v.kind = TomlValue::Kind::Bool;
        v.boolean = tok == "true";
        return v;
    }
    char* end = nullptr;
    const double num = std::strtod(tok.c_str(), &end);
    if (end == nullptr || *end != '\0' || tok.empty())
        c.fail("cannot parse value '" + tok + "'");
    TomlValue v;
    v.kind = TomlValue::Kind::Num;
    v.num = num;
    return v;
}

}  // namespace

Toml Toml::parse_string(const std::string& text, const std::string& origin) {
    Toml doc;
    doc.origin_ = origin;
    Cursor c{text, 0, 1, doc.origin_};
    std::string section;

    while (!c.done()) {
        c.skip_inline_ws();
        if (c.done()) break;
        const char ch = c.peek();
        if (ch == '\n') {
            ++c.i;
            ++c.line;
            continue;
        }
        if (ch == '\r') { ++c.i; continue; }
        if (ch == '#') {
            while (!c.done() && c.peek() != '\n') ++c.i;
            continue;
        }
        if (ch == '[') {
            ++c.i;
            std::string name;
            while (!c.done() && c.peek() != ']' && c.peek() != '\n') name += c.s[c.i++];
            if (c.peek() != ']') c.fail("unterminated section header");
            ++c.i;
            name.erase(std::remove_if(name.begin(), name.end(),
                                      [](char x) { return x == ' ' || x == '\t'; }),
                       name.end());
            if (name.empty()) c.fail("empty section name");
            for (char nc : name)
                if (!is_bare_key_char(nc) && nc != '.')
                    c.fail("bad character in section name: " + name);
            section = name;
            if (std::find(doc.section_order_.begin(), doc.section_order_.end(), section) ==
                doc.section_order_.end())
                doc.section_order_.push_back(section);
            continue;
        }
        // key = value
        const std::string key = parse_bare_key(c);
        c.skip_inline_ws();
        if (c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
        ++c.i;
        const TomlValue v = parse_value(c);
        c.skip_inline_ws();
        if (!c.done() && c.peek() == '#')
            while (!c.done() && c.peek() != '\n') ++c.i;
        if (!c.done() && c.peek() != '\n') c.fail("trailing characters after value");
        const std::string dotted = section.empty() ? key : section + "." + key;
        if (doc.values_.count(dotted)) c.fail("duplicate key: " + dotted);
        doc.values_[dotted] = v;
        doc.key_order_.push_back(dotted);
    }
    return doc;
}

Toml Toml::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

bool Toml::has(const std::string& k) const { return values_.count(k) > 0; }

const TomlValue* Toml::find(const std::string& k) const {
    auto it = values_.find(k);
    return it == values_.end() ? nullptr : &it->second;
}

std::string Toml::get_str(const std::string& key) const {
    const TomlValue* v = find(key);
    if (!v) throw config_error("missing config field: " + key);
    if (v->kind != TomlValue::Kind::Str)
        throw config_error("config field must be a string: " + key);
    return v->str;
}

double Toml::get_num(const std::string& key) const {
    const TomlValue* v = find(key);
    if (!v) throw config_error("missing config field: " + key);
    if (v->kind != TomlValue::Kind::Num)
        throw config_error("config field must be a number: " + key);
    return v->num;
}

bool Toml::get_bool(const std::string& key) const {
    const TomlValue* v = find(key);
    if (!v) throw config_error("missing config field: " + key);
    if (v->kind != TomlValue::Kind::Bool)
        throw config_error("config field must be a boolean: " + key);
    return v->boolean;
}

std::vector<std::string> Toml::get_str_array(const std::string& key) const {
    const TomlValue* v = find(key);
    if (!v) throw config_error("missing config field: " + key);
    if (v->kind != TomlValue::Kind::Array)
        throw config_error("config field must be an array: " + key);
    std::vector<std::string> out;
    for (const auto& e : v->array) {
        if (e.kind != TomlValue::Kind::Str)
            throw config_error("config field must be an array of strings: " + key);
        out.push_back(e.str);
    }
    return out;
}

std::string Toml::get_str_or(const std::string& key, const std::string& dflt) const {
    return has(key) ? get_str(key) : dflt;
}

double Toml::get_num_or(const std::string& key, double dflt) const {
    return has(key) ? get_num(key) : dflt;
}

std::vector<std::string> Toml::sections_under(const std::string& prefix) const {
    std::vector<std::string> out;
    const std::string want = prefix + ".";
    for (const auto& s : section_order_) {
        if (s.rfind(want, 0) != 0) continue;
        const std::string rest = s.substr(want.size());
        if (rest.empty() || rest.find('.') != std::string::npos) continue;
        out.push_back(rest);
    }
    return out;
}

namespace {

LinkKind parse_link(const std::string& s) {
    if (s == "logit") return LinkKind::Logit;
    if (s == "probit") return LinkKind::Probit;
    throw config_error("link must be 'logit' or 'probit', got '" + s + "'");
}

SimulateBlock parse_simulate(const Toml& t) {
    SimulateBlock sb;
    if (t.has("simulate.preset")) {
        const sim::Preset p = sim::preset(t.get_str("simulate.preset"));
        sb.preset = p.name;
        sb.design = p.design;
        sb.params = p.params;
        sb.pairwise_alpha = p.pairwise_alpha;
        sb.pairwise_sds = p.pairwise_sds;
    }
    auto& d = sb.design;
    d.n_items = static_cast<int>(t.get_num_or("simulate.n_items", d.n_items));
    d.n_annotators =
        static_cast<int>(t.get_num_or("simulate.n_annotators", d.n_annotators));
    d.n_trials = static_cast<int>(t.get_num_or("simulate.n_trials", d.n_trials));
    if (t.has("simulate.regime")) {
        const std::string r = t.get_str("simulate.regime");
        if (r == "global") d.regime = Regime::Global;
        else if (r == "hlv") d.regime = Regime::Hlv;
        else throw config_error("simulate.regime must be 'global' or 'hlv'");
    }
    if (t.has("simulate.situational")) {
        const std::string s = t.get_str("simulate.situational");
        if (s == "per_session") d.situational = sim::SituationalStructure::PerSession;
        else if (s == "per_trial_shared")
            d.situational = sim::SituationalStructure::PerTrialShared;
        else if (s == "per_cell") d.situational = sim::SituationalStructure::PerCell;
        else
            throw config_error(
                "simulate.situational must be per_session, per_trial_shared, or per_cell");
    }
    auto& p = sb.params;
    p.mu = t.get_num_or("simulate.mu", p.mu);
    p.beta_item_sd = t.get_num_or("simulate.beta_item_sd", p.beta_item_sd);
    p.rho_annotator_sd = t.get_num_or("simulate.rho_annotator_sd", p.rho_annotator_sd);
    p.sigma_trial_sd = t.get_num_or("simulate.sigma_trial_sd", p.sigma_trial_sd);
    p.delta_interp_sd = t.get_num_or("simulate.delta_interp_sd", p.delta_interp_sd);
    if (t.has("simulate.link")) p.link = parse_link(t.get_str("simulate.link"));
    sb.pairwise_alpha = t.get_num_or("simulate.pairwise_alpha", sb.pairwise_alpha);
    sb.pairwise_sds.labeler =
        t.get_num_or("simulate.pairwise_labeler_sd", sb.pairwise_sds.labeler);
    sb.pairwise_sds.judge =
        t.get_num_or("simulate.pairwise_judge_sd", sb.pairwise_sds.judge);
    sb.pairwise_sds.item = t.get_num_or("simulate.pairwise_item_sd", sb.pairwise_sds.item);
    sb.pairwise_sds.interaction =
        t.get_num_or("simulate.pairwise_interaction_sd", sb.pairwise_sds.interaction);
    return sb;
}

ModelBlock parse_model(const Toml& t, const std::string& name) {
    const std::string base = "models." + name + ".";
    ModelBlock m;
    m.name = name;
    m.table = t.get_str(base + "table");
    m.spec.outcome = t.get_str(base + "outcome");
    if (t.has(base + "fixed")) m.spec.fixed = t.get_str_array(base + "fixed");
    if (t.has(base + "random")) m.spec.random_factors = t.get_str_array(base + "random");
    if (t.has(base + "standardize"))
        m.spec.standardize = t.get_str_array(base + "standardize");
    m.spec.link = parse_link(t.get_str_or(base + "link", "logit"));
    m.spec.validate();
    return m;
}

const std::vector<std::string> kStandardFeatures = {
    "lexical_overlap", "avg_toks_per_sent", "neg_presence_flip", "entity_jaccard",
    "num_norm_overlap"};
const std::vector<std::string> kStandardizedFeatures = {
    "lexical_overlap", "avg_toks_per_sent", "entity_jaccard", "num_norm_overlap"};

ModelBlock make_model(std::string name, std::string table, std::string outcome,
                      std::vector<std::string> fixed, std::vector<std::string> random,
                      std::vector<std::string> standardize) {
    ModelBlock m;
    m.name = std::move(name);
    m.table = std::move(table);
    m.spec.outcome = std::move(outcome);
    m.spec.fixed = std::move(fixed);
    m.spec.random_factors = std::move(random);
    m.spec.standardize = std::move(standardize);
    return m;
}

std::vector<ModelBlock> default_sim_models() {
    std::vector<ModelBlock> out;
    out.push_back(make_model("correctness", "sim_outcomes", "z_error", {},
                             {"item", "annotator", "session"}, {}));
    out.push_back(make_model("pairwise", "sim_pairwise", "v", {},
                             {"item", "judge", "labeler", "pair"}, {}));
    return out;
}

std::vector<ModelBlock> default_input_models() {
    std::vector<ModelBlock> out;
    out.push_back(make_model("global_random_only", "outcomes_global", "z", {},
                             {"item", "annotator", "trial"}, {}));
    std::vector<std::string> with_amb = {"ambiguity"};
    with_amb.insert(with_amb.end(), kStandardFeatures.begin(), kStandardFeatures.end());
    out.push_back(make_model("global_baseline", "outcomes_global", "z", kStandardFeatures,
                             {"annotator", "trial"}, kStandardizedFeatures));
    out.push_back(make_model("global_ambiguity", "outcomes_global", "z", with_amb,
                             {"annotator", "trial"}, kStandardizedFeatures));
    out.push_back(make_model("individual_random_only", "outcomes_individual", "z", {},
                             {"item", "annotator"}, {}));
    out.push_back(make_model("individual_baseline", "outcomes_individual", "z",
                             kStandardFeatures, {"annotator"}, kStandardizedFeatures));
    out.push_back(make_model("individual_ambiguity", "outcomes_individual", "z", with_amb,
                             {"annotator"}, kStandardizedFeatures));
    out.push_back(make_model("pairwise", "pairwise", "v", {},
                             {"item", "judge", "labeler", "pair"}, {}));
    return out;
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text, const std::string& origin) {
    const Toml t = Toml::parse_string(text, origin);
    RunConfig cfg;

    cfg.out_dir = t.get_str_or("run.out_dir", cfg.out_dir);
    if (t.has("run.seed")) cfg.seed = static_cast<std::uint64_t>(t.get_num("run.seed"));
    if (t.has("run.formats")) {
        cfg.formats.clear();
        for (const auto& f : t.get_str_array("run.formats")) {
            if (f != "json" && f != "markdown")
                throw config_error("run.formats entries must be 'json' or 'markdown'");
            cfg.formats.insert(f);
        }
    }
    if (t.has("labels.set")) cfg.labels = t.get_str_array("labels.set");

    const bool has_inputs = t.has("inputs.items") || t.has("inputs.annotations") ||
                            t.has("inputs.validations");
    bool has_sim = false;
    for (const auto& k : t.keys())
        if (k.rfind("simulate.", 0) == 0) has_sim = true;

    if (has_inputs) {
        InputsBlock in;
        in.items = t.get_str("inputs.items");
        in.annotations = t.get_str("inputs.annotations");
        in.validations = t.get_str("inputs.validations");
        cfg.inputs = in;
    }
    if (has_sim) {
        cfg.simulate = parse_simulate(t);
        cfg.simulate->design.seed = cfg.seed;
    }

    for (const auto& name : t.sections_under("models"))
        cfg.models.push_back(parse_model(t, name));
    if (cfg.models.empty())
        cfg.models = cfg.simulate ? default_sim_models() : default_input_models();

    const bool any_pairwise_model =
        std::any_of(cfg.models.begin(), cfg.models.end(),
                    [](const ModelBlock& m) { return m.name == "pairwise"; });
    if (t.has("diagnose.model") || t.has("diagnose.dominance") ||
        t.has("diagnose.roles") || any_pairwise_model) {
        DiagnoseBlock d;
        d.model = t.get_str_or("diagnose.model", d.model);
        d.dominance = t.get_num_or("diagnose.dominance", d.dominance);
        if (const TomlValue* roles = t.find("diagnose.roles")) {
            if (roles->kind != TomlValue::Kind::Table)
                throw config_error("diagnose.roles must be an inline table");
            auto pick = [&](const char* k, std::string& dst) {
                auto it = roles->table.find(k);
                if (it != roles->table.end()) {
                    if (it->second.kind != TomlValue::Kind::Str)
                        throw config_error(std::string("diagnose.roles.") + k +
                                           " must be a string");
                    dst = it->second.str;
                }
            };
            pick("item", d.roles.item);
            pick("labeler", d.roles.labeler);
            pick("judge", d.roles.judge);
            pick("interaction", d.roles.interaction);
        }
        cfg.diagnose = d;
    }

    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path);
}

void RunConfig::validate() const {
    if (inputs.has_value() == simulate.has_value())
        throw config_error(
            "config must declare exactly one of [inputs] and [simulate]");
    if (inputs && labels.empty())
        throw config_error("labels.set is required when [inputs] is used");
    std::set<std::string> names;
    for (const auto& m : models)
        if (!names.insert(m.name).second)
            throw config_error("duplicate model name: " + m.name);
    if (diagnose && !names.count(diagnose->model))
        throw config_error("diagnose.model references unknown model: " + diagnose->model);
    if (simulate) {
        simulate->design.validate();
        simulate->params.validate();
    }
}

std::string example_config() {
    return R"(# labelmeas run configuration (TOML subset: sections, key = value,
# strings, numbers, booleans, single-line arrays, inline tables, # comments)

[run]
out_dir = "out"        # where stage artifacts and the manifest are written
seed = 42              # drives every simulation draw; --seed overrides
formats = ["json", "markdown"]

# ---------------------------------------------------------------------------
# Exactly one of [inputs] (real annotation data) or [simulate] must appear.
# ---------------------------------------------------------------------------

[labels]               # required with [inputs]; order breaks consensus ties
set = ["entailment", "neutral", "contradiction"]

[inputs]
items = "items.ndjson"              # {item_id, premise, hypothesis, similarity?}
annotations = "annotations.ndjson"  # {item_id, annotator_id, label, explanation?}
validations = "validations.ndjson"  # {item_id, labeler_id, judge_id, label, verdict}

# [simulate]
# preset = "instance_error"   # instance_error | between_person | within_person | interpretive
# n_items = 200               # every key below overrides the preset
# n_annotators = 20
# n_trials = 2
# regime = "global"           # global | hlv
# situational = "per_session" # per_session | per_trial_shared | per_cell
# mu = 1.0
# beta_item_sd = 0.05
# rho_annotator_sd = 0.05
# sigma_trial_sd = 0.05
# delta_interp_sd = 0.0       # > 0 requires regime = "hlv"
# link = "logit"              # logit | probit
# pairwise_alpha = 2.2
# pairwise_labeler_sd = 0.05
# pairwise_judge_sd = 0.05
# pairwise_item_sd = 0.05
# pairwise_interaction_sd = 0.0

# ---------------------------------------------------------------------------
# Model blocks. Without any, a standard suite is fitted:
#   inputs:   global_random_only/baseline/ambiguity, individual_*, pairwise
#   simulate: correctness (item+annotator+session), pairwise
# ---------------------------------------------------------------------------

# [models.global_ambiguity]
# table = "outcomes_global"   # artifact the model reads (out_dir/<table>.ndjson)
# outcome = "z"
# fixed = ["ambiguity", "lexical_overlap", "avg_toks_per_sent",
#          "neg_presence_flip", "entity_jaccard", "num_norm_overlap"]
# standardize = ["lexical_overlap", "avg_toks_per_sent",
#                "entity_jaccard", "num_norm_overlap"]
# random = ["annotator", "trial"]
# link = "logit"

[diagnose]
model = "pairwise"     # fit whose variance profile is classified
dominance = 2.0        # ratio threshold; artifact policy, echoed in output
roles = { item = "item", labeler = "labeler", judge = "judge", interaction = "pair" }
)";
}

}  // namespace labelmeas::cli
