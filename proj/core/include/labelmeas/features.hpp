#pragma once

#include <optional>
#include <string>
#include <vector>

#include "labelmeas/dataset.hpp"
#include "labelmeas/model.hpp"
#include "labelmeas/table.hpp"

namespace labelmeas::feats {

struct Tokenized {
    std::vector<std::string> tokens;  // lowercased, apostrophes kept inside words
    std::size_t n_sentences = 0;      // split on .!? followed by whitespace/end
};

/// Throws data_error when the text has no tokens after trimming.
Tokenized tokenize(const std::string& text);

/// Vowel-group syllable count: maximal aeiouy runs, minimum 1, silent
/// trailing 'e' dropped for words longer than 3 characters.
std::size_t syllables(const std::string& token);

/// Flesch-Kincaid grade of one text under the heuristics above.
double fk_grade(const std::string& text);

struct PairFeatures {
    double lexical_overlap = 0.0;    // Jaccard over unigram types
    double avg_toks_per_sent = 0.0;  // across both texts
    double fk_grade = 0.0;           // over both texts pooled
    int neg_presence_flip = 0;       // negation cue on exactly one side
    double entity_jaccard = 0.0;     // heuristic entities; empty-vs-empty = 1
    double num_norm_overlap = 0.0;   // normalized numerics; empty-vs-empty = 1
};

PairFeatures pair_features(const std::string& premise, const std::string& hypothesis);

/// True when at least two distinct labels for the item received a MakesSense
/// verdict; nullopt when the item has no valid judgment at all.
std::optional<bool> ambiguity_flag(const std::vector<ValidationRecord>& validations,
                                   const std::string& item_id);

/// Per-item feature table keyed by `item`: ambiguity plus the text-derived
/// columns, with `similarity` passed through from the items table when
/// present. Items whose text cannot be featurized are dropped and counted.
DataTable build_feature_table(const DataTable& items,
                              const std::vector<ValidationRecord>& validations,
                              pipe::ExclusionLedger& ledger);

/// Heuristic entity spans (for tests): capitalized non-sentence-initial runs
/// plus digit-bearing tokens, lowercased.
std::vector<std::string> extract_entities(const std::string& text);

/// Normalized numeric values (for tests): digit strings with thousands
/// separators stripped, plus spelled numbers zero..twenty.
std::vector<std::string> extract_numbers(const std::string& text);

}  // namespace labelmeas::feats
