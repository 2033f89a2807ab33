#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "labelmeas/model.hpp"
#include "labelmeas/table.hpp"

namespace labelmeas::pipe {

/// Counts every row excluded by the pipeline, keyed by reason. The accounting
/// invariant is rows_in = rows_out + sum(counts).
struct ExclusionLedger {
    std::map<std::string, long long> counts;

    void bump(const std::string& reason, long long k = 1) { counts[reason] += k; }
    long long total() const;
    std::string to_json() const;
};

/// Parsed raw inputs with referential integrity already enforced.
struct Dataset {
    LabelSet labels;
    DataTable items;  // item_id plus whatever item-level columns the file carries
    std::vector<std::string> item_order;  // first-appearance order
    std::vector<AnnotationRecord> annotations;
    std::vector<ValidationRecord> validations;
};

/// Reads the three canonical newline-delimited JSON files.
///   items:       {item_id, premise?, hypothesis?, similarity?, ...}
///   annotations: {item_id, annotator_id, label, explanation?, trial?}
///   validations: {item_id, labeler_id, judge_id, label, verdict: yes|no|idk}
/// Duplicate keys and references to unknown items are rejected.
Dataset parse_inputs(const std::string& items_path, const std::string& annotations_path,
                     const std::string& validations_path, const LabelSet& labels);

struct ConsensusEntry {
    std::string mu_label;
    std::map<std::string, int> valid_counts;  // MakesSense tallies per label
    bool tie = false;
};

/// Per-item consensus plus the items left undefined by zero valid judgments.
struct ConsensusMap {
    std::map<std::string, ConsensusEntry> by_item;
    std::vector<std::string> undefined_items;

    const ConsensusEntry* find(const std::string& item_id) const;
};

/// Tallies MakesSense verdicts per label over all judges (IDK dropped) and
/// picks the argmax; ties break by label-set declaration order and are flagged.
ConsensusMap infer_consensus(const std::vector<ValidationRecord>& validations,
                             const LabelSet& labels);

/// Long-format error outcomes against consensus, two trials per retained
/// (item, annotator, label): trial 1 is label-vs-consensus, trial 2 is the
/// explanation-adjusted indicator. Only self-judged pairs are retained.
/// Columns: item, annotator, label, trial, z.
DataTable build_global_outcomes(const std::vector<AnnotationRecord>& annotations,
                                const ConsensusMap& consensus,
                                const std::vector<ValidationRecord>& validations,
                                ExclusionLedger& ledger);

/// Self-assessed error outcomes: one row per self-judged (item, annotator,
/// label); z = 1 when the annotator rejected their own explanation.
/// Columns: item, annotator, label, z.
DataTable build_individual_outcomes(const std::vector<ValidationRecord>& validations,
                                    ExclusionLedger& ledger);

/// Pairwise validation table: one row per non-IDK judgment event, self-pairs
/// included. Columns: item, labeler, judge, pair, label, v.
DataTable build_pairwise_table(const std::vector<ValidationRecord>& validations,
                               ExclusionLedger& ledger);

}  // namespace labelmeas::pipe
