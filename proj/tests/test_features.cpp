#include <cmath>

#include <doctest.h>

#include "labelmeas/dataset.hpp"
#include "labelmeas/errors.hpp"
#include "labelmeas/features.hpp"

using namespace labelmeas;
using namespace labelmeas::feats;

TEST_CASE("tokenizer basics") {
    const Tokenized t = tokenize("The cat sat.");
    CHECK(t.tokens == std::vector<std::string>{"the", "cat", "sat"});
    CHECK(t.n_sentences == 1);

    CHECK(tokenize("Hi. Bye.").n_sentences == 2);
    // Abbreviation-free rule: "Dr." ends a sentence.
    CHECK(tokenize("Dr. Smith left.").n_sentences == 2);
    CHECK(tokenize("don't stop").tokens == std::vector<std::string>{"don't", "stop"});
    CHECK(tokenize("no terminator").n_sentences == 1);
    CHECK_THROWS_AS(tokenize("   "), data_error);
}

TEST_CASE("syllable heuristic") {
    CHECK(syllables("the") == 1);
    CHECK(syllables("cat") == 1);
    CHECK(syllables("cake") == 1);   // silent trailing e dropped (length > 3)
    CHECK(syllables("happy") == 2);  // a + y groups
    CHECK(syllables("idea") == 2);   // i + ea
    CHECK(syllables("rhythm") == 1); // y group
    CHECK(syllables("mmm") == 1);    // floor of one
}

TEST_CASE("Flesch-Kincaid grade matches the hand computation") {
    CHECK(std::fabs(fk_grade("The cat sat.") - (-2.62)) < 1e-9);
}

TEST_CASE("identical texts give identity features") {
    const PairFeatures f = pair_features("The cat sat.", "The cat sat.");
    CHECK(f.lexical_overlap == 1.0);
    CHECK(f.neg_presence_flip == 0);
    CHECK(f.entity_jaccard == 1.0);     // no entities on either side
    CHECK(f.num_norm_overlap == 1.0);   // no numbers on either side
    CHECK(std::fabs(f.fk_grade - (-2.62)) < 1e-9);
    CHECK(f.avg_toks_per_sent == doctest::Approx(3.0));
}

TEST_CASE("lexical overlap is type-level Jaccard") {
    CHECK(pair_features("a b c", "a b d").lexical_overlap == doctest::Approx(0.5));
}

TEST_CASE("negation flip fires on exactly one side") {
    CHECK(pair_features("He is happy", "He is not happy").neg_presence_flip == 1);
    CHECK(pair_features("He is not happy", "He is never happy").neg_presence_flip == 0);
    CHECK(pair_features("He can't go", "He will go").neg_presence_flip == 1);
    CHECK(pair_features("He is happy", "He is sad").neg_presence_flip == 0);
}

TEST_CASE("entity extraction skips sentence-initial capitals") {
    const auto p = extract_entities("Anna met Bob in Paris.");
    CHECK(p == std::vector<std::string>{"bob", "paris"});
    const auto f = pair_features("Anna met Bob in Paris.", "Anna met Bob in Rome.");
    CHECK(f.entity_jaccard == doctest::Approx(1.0 / 3.0));
    // Digit-bearing tokens count as entity spans.
    const auto d = extract_entities("born in 1999 maybe");
    CHECK(d == std::vector<std::string>{"1999"});
}

TEST_CASE("numeric normalization maps spelled and digit forms together") {
    CHECK(pair_features("There are 3 cats.", "There are three cats.").num_norm_overlap ==
          doctest::Approx(1.0));
    CHECK(pair_features("about 1,000 people", "about 1000 people").num_norm_overlap ==
          doctest::Approx(1.0));
    CHECK(pair_features("He has 2 dogs", "He has 4 dogs").num_norm_overlap ==
          doctest::Approx(0.0));
    CHECK(extract_numbers("pay 12.50 now") == std::vector<std::string>{"12.5"});
}

TEST_CASE("pair features are symmetric where symmetry is claimed") {
    const char* texts[][2] = {
        {"Anna met Bob in Paris.", "Bob saw 3 cats."},
        {"He is not happy today.", "She sold twenty items."},
        {"Numbers like 1,000 matter.", "Only 7 stayed."},
    };
    for (const auto& [a, b] : texts) {
        const PairFeatures ab = pair_features(a, b);
        const PairFeatures ba = pair_features(b, a);
        CHECK(ab.lexical_overlap == doctest::Approx(ba.lexical_overlap).epsilon(1e-15));
        CHECK(ab.entity_jaccard == doctest::Approx(ba.entity_jaccard).epsilon(1e-15));
        CHECK(ab.num_norm_overlap == doctest::Approx(ba.num_norm_overlap).epsilon(1e-15));
        CHECK(ab.neg_presence_flip == ba.neg_presence_flip);
        // Boundedness.
        for (double v : {ab.lexical_overlap, ab.entity_jaccard, ab.num_norm_overlap}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(ab.avg_toks_per_sent > 0.0);
    }
}

TEST_CASE("ambiguity flag comes from validations alone") {
    const std::string dir = std::string(LABELMEAS_TEST_DATA) + "/fixture";
    const pipe::Dataset ds = pipe::parse_inputs(
        dir + "/items.ndjson", dir + "/annotations.ndjson", dir + "/validations.ndjson",
        LabelSet({"entailment", "neutral", "contradiction"}));

    CHECK(ambiguity_flag(ds.validations, "i1") == true);   // entailment and neutral valid
    CHECK(ambiguity_flag(ds.validations, "i2") == false);  // only neutral valid
    CHECK(ambiguity_flag(ds.validations, "i3") == true);
    CHECK(ambiguity_flag(ds.validations, "i4") == false);
    CHECK_FALSE(ambiguity_flag(ds.validations, "i5").has_value());  // nothing valid
    CHECK(ambiguity_flag(ds.validations, "i6") == true);

    // Invariant to judge relabeling and verdict order.
    std::vector<ValidationRecord> shuffled(ds.validations.rbegin(), ds.validations.rend());
    for (auto& v : shuffled)
        if (v.judge_id == "a1") v.judge_id = "a3";
    for (const char* item : {"i1", "i2", "i3", "i4", "i6"})
        CHECK(ambiguity_flag(shuffled, item) == ambiguity_flag(ds.validations, item));
}

TEST_CASE("feature table carries ambiguity plus text columns, sorted by item") {
    const std::string dir = std::string(LABELMEAS_TEST_DATA) + "/fixture";
    const pipe::Dataset ds = pipe::parse_inputs(
        dir + "/items.ndjson", dir + "/annotations.ndjson", dir + "/validations.ndjson",
        LabelSet({"entailment", "neutral", "contradiction"}));
    pipe::ExclusionLedger ledger;
    const DataTable t = build_feature_table(ds.items, ds.validations, ledger);

    CHECK(t.n_rows() == 6);
    CHECK(t.get_str(0, "item") == "i1");
    CHECK(t.get_num(0, "ambiguity") == 1.0);
    CHECK(t.get_num(1, "ambiguity") == 0.0);
    // i5 had no valid judgments: ambiguity missing, not false.
    CHECK(t.is_missing(4, "ambiguity"));
    CHECK(ledger.counts.at("features_ambiguity_undefined") == 1);
    // i4: "3" vs "three" normalize to the same value.
    CHECK(t.get_num(3, "num_norm_overlap") == doctest::Approx(1.0));
    // i2 negation flip.
    CHECK(t.get_num(1, "neg_presence_flip") == 1.0);
}
