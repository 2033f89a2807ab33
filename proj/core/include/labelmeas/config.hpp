#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "labelmeas/diagnostic.hpp"
#include "labelmeas/glmm.hpp"
#include "labelmeas/simulate.hpp"

namespace labelmeas::cli {

/// Minimal TOML-style document: [section.sub] headers, key = value pairs,
/// strings, numbers, booleans, single-line arrays and inline tables,
/// # comments. Enough to express a RunConfig; anything else is rejected
/// with a line-numbered config_error.
struct TomlValue {
    enum class Kind { Str, Num, Bool, Array, Table };
    Kind kind = Kind::Str;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<TomlValue> array;
    std::map<std::string, TomlValue> table;
};

class Toml {
  public:
    static Toml parse_string(const std::string& text, const std::string& origin);
    static Toml parse_file(const std::string& path);

    bool has(const std::string& dotted_key) const;
    const TomlValue* find(const std::string& dotted_key) const;

    std::string get_str(const std::string& key) const;
    double get_num(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::string> get_str_array(const std::string& key) const;

    std::string get_str_or(const std::string& key, const std::string& dflt) const;
    double get_num_or(const std::string& key, double dflt) const;

    /// Immediate child section names under `prefix` (e.g. "models" ->
    /// declaration-ordered names of every [models.NAME] section).
    std::vector<std::string> sections_under(const std::string& prefix) const;

    /// Every dotted key in the document (for unknown-key validation).
    const std::vector<std::string>& keys() const { return key_order_; }

  private:
    std::map<std::string, TomlValue> values_;
    std::vector<std::string> key_order_;
    std::vector<std::string> section_order_;
    std::string origin_;
};

struct InputsBlock {
    std::string items;
    std::string annotations;
    std::string validations;
};

struct SimulateBlock {
    std::optional<std::string> preset;
    sim::SimDesign design;
    GenerativeParams params;
    double pairwise_alpha = 2.2;
    sim::PairwiseSds pairwise_sds;
};

struct ModelBlock {
    std::string name;
    std::string table;  // artifact basename the model fits, e.g. "outcomes_global"
    glmm::ModelSpec spec;
};

struct DiagnoseBlock {
    std::string model = "pairwise";
    double dominance = 2.0;
    diag::FactorRoles roles;
};

/// A complete batch run: exactly one of {inputs, simulate}, model blocks,
/// and output settings. Model blocks default to the standard suite for the
/// chosen mode when none are declared.
struct RunConfig {
    std::optional<InputsBlock> inputs;
    std::optional<SimulateBlock> simulate;
    std::vector<std::string> labels;
    std::vector<ModelBlock> models;
    std::optional<DiagnoseBlock> diagnose;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::set<std::string> formats = {"json", "markdown"};

    static RunConfig from_file(const std::string& path);
    static RunConfig from_string(const std::string& text,
                                 const std::string& origin = "<config>");

    void validate() const;  // throws config_error naming the offending field
};

/// Annotated example covering every recognized key with its default.
std::string example_config();

}  // namespace labelmeas::cli
