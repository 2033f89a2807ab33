#include "labelmeas/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>

#include "labelmeas/errors.hpp"

namespace labelmeas::feats {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_vowel(char c) { return c && std::strchr("aeiouy", c) != nullptr; }

const std::set<std::string>& negation_cues() {
    static const std::set<std::string> cues = {"not",     "no",      "never",  "none",
                                               "nobody",  "nothing", "neither", "nor",
                                               "cannot"};
    return cues;
}

bool has_negation(const std::vector<std::string>& tokens) {
    for (const auto& t : tokens) {
        if (negation_cues().count(t)) return true;
        if (t.size() >= 3 && t.compare(t.size() - 3, 3, "n't") == 0) return true;
    }
    return false;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;  // no material on either side: no mismatch
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Raw-text word scan preserving case; flags sentence-initial words.
struct RawWord {
    std::string text;
    bool sentence_initial = false;
};

std::vector<RawWord> raw_words(const std::string& text) {
    std::vector<RawWord> out;
    bool at_sentence_start = true;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (is_word_char(c)) {
            std::size_t j = i;
            std::string w;
            while (j < text.size() &&
                   (is_word_char(text[j]) || (text[j] == '\'' && j + 1 < text.size() &&
                                              is_word_char(text[j + 1]) && j > i)))
                w += text[j++];
            out.push_back({w, at_sentence_start});
            at_sentence_start = false;
            i = j;
        } else {
            if ((c == '.' || c == '!' || c == '?') &&
                (i + 1 >= text.size() ||
                 std::isspace(static_cast<unsigned char>(text[i + 1]))))
                at_sentence_start = true;
            ++i;
        }
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string canonical_number(double v) {
    if (v == std::floor(v) && std::fabs(v) < 9.0e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

const std::map<std::string, int>& spelled_numbers() {
    static const std::map<std::string, int> m = {
        {"zero", 0},     {"one", 1},       {"two", 2},      {"three", 3},
        {"four", 4},     {"five", 5},      {"six", 6},      {"seven", 7},
        {"eight", 8},    {"nine", 9},      {"ten", 10},     {"eleven", 11},
        {"twelve", 12},  {"thirteen", 13}, {"fourteen", 14},{"fifteen", 15},
        {"sixteen", 16}, {"seventeen", 17},{"eighteen", 18},{"nineteen", 19},
        {"twenty", 20}};
    return m;
}

}  // namespace

Tokenized tokenize(const std::string& text) {
    Tokenized out;
    bool pending_sentence = false;  // saw tokens since the last boundary
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (is_word_char(c)) {
            std::size_t j = i;
            std::string w;
            while (j < text.size() &&
                   (is_word_char(text[j]) || (text[j] == '\'' && j + 1 < text.size() &&
                                              is_word_char(text[j + 1]) && j > i)))
                w += text[j++];
            out.tokens.push_back(lower(w));
            pending_sentence = true;
            i = j;
        } else {
            if ((c == '.' || c == '!' || c == '?') &&
                (i + 1 >= text.size() ||
                 std::isspace(static_cast<unsigned char>(text[i + 1])))) {
                if (pending_sentence) {
                    ++out.n_sentences;
                    pending_sentence = false;
                }
            }
            ++i;
        }
    }
    if (pending_sentence) ++out.n_sentences;  // unterminated trailing sentence
    if (out.tokens.empty()) throw data_error("tokenize: text has no word tokens");
    return out;
}

std::size_t syllables(const std::string& token) {
    std::string w = token;
    if (w.size() > 3 && w.back() == 'e') w.pop_back();
    std::size_t count = 0;
    bool in_group = false;
    for (char c : w) {
        const bool v = is_vowel(c);
        if (v && !in_group) ++count;
        in_group = v;
    }
    return std::max<std::size_t>(count, 1);
}

double fk_grade(const std::string& text) {
    const Tokenized t = tokenize(text);
    std::size_t syl = 0;
    for (const auto& w : t.tokens) syl += syllables(w);
    const double words = static_cast<double>(t.tokens.size());
    const double sents = static_cast<double>(std::max<std::size_t>(t.n_sentences, 1));
    return 0.39 * (words / sents) + 11.8 * (static_cast<double>(syl) / words) - 15.59;
}

std::vector<std::string> extract_entities(const std::string& text) {
    std::vector<std::string> out;
    const std::vector<RawWord> words = raw_words(text);
    std::string run;
    auto flush = [&]() {
        if (!run.empty()) {
            out.push_back(lower(run));
            run.clear();
        }
    };
    for (const auto& w : words) {
        const bool capitalized =
            !w.text.empty() && std::isupper(static_cast<unsigned char>(w.text[0]));
        const bool has_digit = std::any_of(w.text.begin(), w.text.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c)) != 0;
        });
        if (has_digit) {
            flush();
            out.push_back(lower(w.text));
        } else if (capitalized && !w.sentence_initial) {
            if (!run.empty()) run += ' ';
            run += w.text;
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::vector<std::string> extract_numbers(const std::string& text) {
    std::vector<std::string> out;
    // Digit spans, allowing thousands separators and one decimal point.
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isdigit(static_cast<unsigned char>(text[i]))) {
            std::string digits;
            bool seen_dot = false;
            std::size_t j = i;
            while (j < text.size()) {
                const char c = text[j];
                if (std::isdigit(static_cast<unsigned char>(c))) {
                    digits += c;
                } else if (c == ',' && j + 1 < text.size() &&
                           std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
                    // thousands separator: skip
                } else if (c == '.' && !seen_dot && j + 1 < text.size() &&
                           std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
                    digits += c;
                    seen_dot = true;
                } else {
                    break;
                }
                ++j;
            }
            out.push_back(canonical_number(std::strtod(digits.c_str(), nullptr)));
            i = j;
        } else {
            ++i;
        }
    }
    // Spelled numbers zero..twenty from the lowercased token stream.
    for (const auto& w : raw_words(text)) {
        auto it = spelled_numbers().find(lower(w.text));
        if (it != spelled_numbers().end())
            out.push_back(canonical_number(static_cast<double>(it->second)));
    }
    return out;
}

PairFeatures pair_features(const std::string& premise, const std::string& hypothesis) {
    const Tokenized tp = tokenize(premise);
    const Tokenized th = tokenize(hypothesis);

    PairFeatures f;
    const std::set<std::string> types_p(tp.tokens.begin(), tp.tokens.end());
    const std::set<std::string> types_h(th.tokens.begin(), th.tokens.end());
    {
        std::size_t inter = 0;
        for (const auto& w : types_p) inter += types_h.count(w);
        const std::size_t uni = types_p.size() + types_h.size() - inter;
        f.lexical_overlap = static_cast<double>(inter) / static_cast<double>(uni);
    }

    const double total_tokens = static_cast<double>(tp.tokens.size() + th.tokens.size());
    const double total_sents =
        static_cast<double>(std::max<std::size_t>(tp.n_sentences + th.n_sentences, 1));
    f.avg_toks_per_sent = total_tokens / total_sents;

    std::size_t syl = 0;
    for (const auto& w : tp.tokens) syl += syllables(w);
    for (const auto& w : th.tokens) syl += syllables(w);
    f.fk_grade = 0.39 * (total_tokens / total_sents) +
                 11.8 * (static_cast<double>(syl) / total_tokens) - 15.59;

    f.neg_presence_flip = has_negation(tp.tokens) != has_negation(th.tokens) ? 1 : 0;

    const auto ep = extract_entities(premise);
    const auto eh = extract_entities(hypothesis);
    f.entity_jaccard = jaccard({ep.begin(), ep.end()}, {eh.begin(), eh.end()});

    const auto np = extract_numbers(premise);
    const auto nh = extract_numbers(hypothesis);
    f.num_norm_overlap = jaccard({np.begin(), np.end()}, {nh.begin(), nh.end()});
    return f;
}

std::optional<bool> ambiguity_flag(const std::vector<ValidationRecord>& validations,
                                   const std::string& item_id) {
    std::set<std::string> valid_labels;
    bool any = false;
    for (const auto& v : validations) {
        if (v.item_id != item_id) continue;
        if (v.verdict != Verdict::MakesSense || v.label.is_idk()) continue;
        any = true;
        valid_labels.insert(v.label.value);
    }
    if (!any) return std::nullopt;
    return valid_labels.size() >= 2;
}

DataTable build_feature_table(const DataTable& items,
                              const std::vector<ValidationRecord>& validations,
                              pipe::ExclusionLedger& ledger) {
    DataTable t;
    t.add_column("item", ColumnType::Str);
    t.add_column("ambiguity", ColumnType::Num);
    t.add_column("lexical_overlap", ColumnType::Num);
    t.add_column("avg_toks_per_sent", ColumnType::Num);
    t.add_column("fk_grade", ColumnType::Num);
    t.add_column("neg_presence_flip", ColumnType::Num);
    t.add_column("entity_jaccard", ColumnType::Num);
    t.add_column("num_norm_overlap", ColumnType::Num);
    const bool pass_similarity = items.has_column("similarity");
    if (pass_similarity) t.add_column("similarity", ColumnType::Num);

    const bool has_text =
        items.has_column("premise") && items.has_column("hypothesis");
    for (std::size_t r = 0; r < items.n_rows(); ++r) {
        const std::string id = items.get_str(r, "item_id");
        if (!has_text || items.is_missing(r, "premise") ||
            items.is_missing(r, "hypothesis")) {
            ledger.bump("features_missing_text");
            continue;
        }
        PairFeatures f;
        try {
            f = pair_features(items.get_str(r, "premise"), items.get_str(r, "hypothesis"));
        } catch (const data_error&) {
            ledger.bump("features_untokenizable_text");
            continue;
        }
        const std::size_t row = t.add_row();
        t.set_str(row, "item", id);
        const auto amb = ambiguity_flag(validations, id);
        if (amb.has_value()) t.set_num(row, "ambiguity", *amb ? 1.0 : 0.0);
        else ledger.bump("features_ambiguity_undefined");
        t.set_num(row, "lexical_overlap", f.lexical_overlap);
        t.set_num(row, "avg_toks_per_sent", f.avg_toks_per_sent);
        t.set_num(row, "fk_grade", f.fk_grade);
        t.set_num(row, "neg_presence_flip", f.neg_presence_flip);
        t.set_num(row, "entity_jaccard", f.entity_jaccard);
        t.set_num(row, "num_norm_overlap", f.num_norm_overlap);
        if (pass_similarity && !items.is_missing(r, "similarity"))
            t.set_num(row, "similarity", items.get_num(r, "similarity"));
    }
    return t.sorted_by({"item"});
}

}  // namespace labelmeas::feats
