#include "labelmeas/dataset.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "labelmeas/errors.hpp"
#include "labelmeas/ndjson.hpp"

namespace labelmeas::pipe {

long long ExclusionLedger::total() const {
    long long t = 0;
    for (const auto& [_, v] : counts) t += v;
    return t;
}

std::string ExclusionLedger::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : counts) j[k] = v;
    return j.dump(2) + "\n";
}

const ConsensusEntry* ConsensusMap::find(const std::string& item_id) const {
    auto it = by_item.find(item_id);
    return it == by_item.end() ? nullptr : &it->second;
}

namespace {

Verdict parse_verdict(const std::string& v, const std::string& where) {
    if (v == "yes") return Verdict::MakesSense;
    if (v == "no") return Verdict::DoesNotMakeSense;
    if (v == kIdk) return Verdict::Idk;
    throw data_error(where + ": verdict must be yes, no, or idk (got '" + v + "')");
}

void require_columns(const DataTable& t, const std::vector<std::string>& cols,
                     const std::string& file) {
    for (const auto& c : cols)
        if (!t.has_column(c)) throw data_error(file + ": missing required field '" + c + "'");
}

}  // namespace

Dataset parse_inputs(const std::string& items_path, const std::string& annotations_path,
                     const std::string& validations_path, const LabelSet& labels) {
    Dataset ds;
    ds.labels = labels;

    ds.items = ndjson::read_file(items_path);
    if (ds.items.n_rows() == 0) throw data_error(items_path + ": no records");
    require_columns(ds.items, {"item_id"}, items_path);
    std::unordered_set<std::string> known_items;
    for (std::size_t r = 0; r < ds.items.n_rows(); ++r) {
        if (ds.items.is_missing(r, "item_id"))
            throw data_error(items_path + ": record " + std::to_string(r + 1) +
                             " lacks item_id");
        const std::string id = ds.items.get_str(r, "item_id");
        if (!known_items.insert(id).second)
            throw data_error(items_path + ": duplicate item_id '" + id + "'");
        ds.item_order.push_back(id);
    }

    const DataTable ann = ndjson::read_file(annotations_path);
    if (ann.n_rows() == 0) throw data_error(annotations_path + ": no records");
    require_columns(ann, {"item_id", "annotator_id", "label"}, annotations_path);
    const bool has_trial = ann.has_column("trial");
    const bool has_expl = ann.has_column("explanation");
    std::set<std::tuple<std::string, std::string, int, std::string>> ann_keys;
    for (std::size_t r = 0; r < ann.n_rows(); ++r) {
        AnnotationRecord rec;
        rec.item_id = ann.get_str(r, "item_id");
        rec.annotator_id = ann.get_str(r, "annotator_id");
        rec.label.value = ann.get_str(r, "label");
        rec.trial = (has_trial && !ann.is_missing(r, "trial"))
                        ? static_cast<int>(ann.get_num(r, "trial"))
                        : 1;
        if (has_expl && !ann.is_missing(r, "explanation"))
            rec.explanation = ann.get_str(r, "explanation");
        if (!known_items.count(rec.item_id))
            throw data_error(annotations_path + ": unknown item_id '" + rec.item_id + "'");
        if (rec.trial < 1)
            throw data_error(annotations_path + ": trial must be >= 1 for item " +
                             rec.item_id);
        if (!rec.label.is_idk() && !labels.contains(rec.label.value))
            throw data_error(annotations_path + ": label '" + rec.label.value +
                             "' is not in the declared label set");
        if (!ann_keys.emplace(rec.item_id, rec.annotator_id, rec.trial, rec.label.value)
                 .second)
            throw data_error(annotations_path + ": duplicate annotation key (" +
                             rec.item_id + ", " + rec.annotator_id + ", trial " +
                             std::to_string(rec.trial) + ", " + rec.label.value + ")");
        ds.annotations.push_back(std::move(rec));
    }
    {
        // Trial indices must run contiguously from 1 within each label stream.
        std::map<std::tuple<std::string, std::string, std::string>, std::vector<int>> trials;
        for (const auto& a : ds.annotations)
            trials[std::make_tuple(a.item_id, a.annotator_id, a.label.value)].push_back(
                a.trial);
        for (auto& [key, ts] : trials) {
            std::sort(ts.begin(), ts.end());
            for (std::size_t i = 0; i < ts.size(); ++i) {
                if (ts[i] != static_cast<int>(i) + 1)
                    throw data_error(annotations_path + ": trials for (" +
                                     std::get<0>(key) + ", " + std::get<1>(key) + ", " +
                                     std::get<2>(key) +
                                     ") are not contiguous from 1");
            }
        }
    }

    const DataTable val = ndjson::read_file(validations_path);
    if (val.n_rows() == 0) throw data_error(validations_path + ": no records");
    require_columns(val, {"item_id", "labeler_id", "judge_id", "label", "verdict"},
                    validations_path);
    std::set<std::tuple<std::string, std::string, std::string, std::string>> val_keys;
    for (std::size_t r = 0; r < val.n_rows(); ++r) {
        ValidationRecord rec;
        rec.item_id = val.get_str(r, "item_id");
        rec.labeler_id = val.get_str(r, "labeler_id");
        rec.judge_id = val.get_str(r, "judge_id");
        rec.label.value = val.get_str(r, "label");
        rec.verdict = parse_verdict(val.get_str(r, "verdict"),
                                    validations_path + " record " + std::to_string(r + 1));
        if (!known_items.count(rec.item_id))
            throw data_error(validations_path + ": unknown item_id '" + rec.item_id + "'");
        if (!rec.label.is_idk() && !labels.contains(rec.label.value))
            throw data_error(validations_path + ": label '" + rec.label.value +
                             "' is not in the declared label set");
        if (!val_keys.emplace(rec.item_id, rec.labeler_id, rec.judge_id, rec.label.value)
                 .second)
            throw data_error(validations_path + ": duplicate validation key (" +
                             rec.item_id + ", " + rec.labeler_id + ", " + rec.judge_id +
                             ", " + rec.label.value + ")");
        ds.validations.push_back(std::move(rec));
    }

    return ds;
}

ConsensusMap infer_consensus(const std::vector<ValidationRecord>& validations,
                             const LabelSet& labels) {
    // Tallies only MakesSense verdicts; IDK judgments carry no information here.
    std::map<std::string, std::map<std::string, int>> tallies;
    std::set<std::string> seen_items;
    for (const auto& v : validations) {
        seen_items.insert(v.item_id);
        if (v.verdict != Verdict::MakesSense) continue;
        if (v.label.is_idk()) continue;
        tallies[v.item_id][v.label.value] += 1;
    }

    ConsensusMap out;
    for (const auto& item : seen_items) {
        auto it = tallies.find(item);
        if (it == tallies.end() || it->second.empty()) {
            out.undefined_items.push_back(item);
            continue;
        }
        ConsensusEntry entry;
        entry.valid_counts = it->second;
        int best = -1;
        int n_at_best = 0;
        for (const auto& lbl : labels.values()) {  // declaration order breaks ties
            auto c = entry.valid_counts.find(lbl);
            const int cnt = c == entry.valid_counts.end() ? 0 : c->second;
            if (cnt > best) {
                best = cnt;
                entry.mu_label = lbl;
                n_at_best = 1;
            } else if (cnt == best && cnt > 0) {
                ++n_at_best;
            }
        }
        entry.tie = n_at_best > 1;
        out.by_item.emplace(item, std::move(entry));
    }
    return out;
}

namespace {

struct SelfVerdictIndex {
    // (item, annotator, label) -> verdict for self-judged pairs
    std::map<std::tuple<std::string, std::string, std::string>, Verdict> map;

    explicit SelfVerdictIndex(const std::vector<ValidationRecord>& validations) {
        for (const auto& v : validations)
            if (v.labeler_id == v.judge_id)
                map.emplace(std::make_tuple(v.item_id, v.labeler_id, v.label.value),
                            v.verdict);
    }
    const Verdict* find(const std::string& item, const std::string& annot,
                        const std::string& label) const {
        auto it = map.find(std::make_tuple(item, annot, label));
        return it == map.end() ? nullptr : &it->second;
    }
};

}  // namespace

DataTable build_global_outcomes(const std::vector<AnnotationRecord>& annotations,
                                const ConsensusMap& consensus,
                                const std::vector<ValidationRecord>& validations,
                                ExclusionLedger& ledger) {
    const SelfVerdictIndex self(validations);

    DataTable t;
    t.add_column("item", ColumnType::Str);
    t.add_column("annotator", ColumnType::Str);
    t.add_column("label", ColumnType::Str);
    t.add_column("trial", ColumnType::Num);
    t.add_column("z", ColumnType::Num);

    for (const auto& a : annotations) {
        if (a.label.is_idk()) {
            ledger.bump("global_annotation_label_idk");
            continue;
        }
        const ConsensusEntry* mu = consensus.find(a.item_id);
        if (!mu) {
            ledger.bump("global_item_without_consensus");
            continue;
        }
        const Verdict* verdict = self.find(a.item_id, a.annotator_id, a.label.value);
        if (!verdict) {
            ledger.bump("global_missing_self_validation");
            continue;
        }
        if (*verdict == Verdict::Idk) {
            ledger.bump("global_self_validation_idk");
            continue;
        }
        const bool match = a.label.value == mu->mu_label;
        const bool sense = *verdict == Verdict::MakesSense;
        const double z1 = match ? 0.0 : 1.0;
        // Explanation-adjusted trial: an error when exactly one of
        // (label matches, explanation makes sense) holds.
        const double z2 = (match == sense) ? 0.0 : 1.0;
        for (int trial = 1; trial <= 2; ++trial) {
            const std::size_t r = t.add_row();
            t.set_str(r, "item", a.item_id);
            t.set_str(r, "annotator", a.annotator_id);
            t.set_str(r, "label", a.label.value);
            t.set_num(r, "trial", trial);
            t.set_num(r, "z", trial == 1 ? z1 : z2);
        }
    }
    return t.sorted_by({"item", "annotator", "label", "trial"});
}

DataTable build_individual_outcomes(const std::vector<ValidationRecord>& validations,
                                    ExclusionLedger& ledger) {
    DataTable t;
    t.add_column("item", ColumnType::Str);
    t.add_column("annotator", ColumnType::Str);
    t.add_column("label", ColumnType::Str);
    t.add_column("z", ColumnType::Num);

    for (const auto& v : validations) {
        if (v.labeler_id != v.judge_id) continue;
        if (v.label.is_idk()) {
            ledger.bump("individual_label_idk");
            continue;
        }
        if (v.verdict == Verdict::Idk) {
            ledger.bump("individual_self_validation_idk");
            continue;
        }
        const std::size_t r = t.add_row();
        t.set_str(r, "item", v.item_id);
        t.set_str(r, "annotator", v.labeler_id);
        t.set_str(r, "label", v.label.value);
        t.set_num(r, "z", v.verdict == Verdict::DoesNotMakeSense ? 1.0 : 0.0);
    }
    return t.sorted_by({"item", "annotator", "label"});
}

DataTable build_pairwise_table(const std::vector<ValidationRecord>& validations,
                               ExclusionLedger& ledger) {
    DataTable t;
    t.add_column("item", ColumnType::Str);
    t.add_column("labeler", ColumnType::Str);
    t.add_column("judge", ColumnType::Str);
    t.add_column("pair", ColumnType::Str);
    t.add_column("label", ColumnType::Str);
    t.add_column("v", ColumnType::Num);

    for (const auto& v : validations) {
        if (v.label.is_idk()) {
            ledger.bump("pairwise_label_idk");
            continue;
        }
        if (v.verdict == Verdict::Idk) {
            ledger.bump("pairwise_verdict_idk");
            continue;
        }
        const std::size_t r = t.add_row();
        t.set_str(r, "item", v.item_id);
        t.set_str(r, "labeler", v.labeler_id);
        t.set_str(r, "judge", v.judge_id);
        t.set_str(r, "pair", v.labeler_id + "|" + v.judge_id);
        t.set_str(r, "label", v.label.value);
        t.set_num(r, "v", v.verdict == Verdict::MakesSense ? 1.0 : 0.0);
    }
    return t.sorted_by({"item", "labeler", "judge", "label"});
}

}  // namespace labelmeas::pipe
