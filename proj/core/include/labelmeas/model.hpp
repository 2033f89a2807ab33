#pragma once

#include <optional>
#include <string>
#include <vector>

namespace labelmeas {

/// Sentinel for "I don't know" responses. Never a label class: pipeline
/// stages drop IDK records before anything is modeled.
inline constexpr const char* kIdk = "idk";

/// A categorical label drawn from a task-declared label set, or the IDK sentinel.
struct Label {
    std::string value;

    bool is_idk() const { return value == kIdk; }
    bool operator==(const Label&) const = default;
};

/// The task's declared label classes, in declaration order (the order breaks
/// consensus ties). IDK is not a member.
class LabelSet {
  public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> labels);

    bool contains(const std::string& v) const;
    /// Position in declaration order; IDK and unknown labels have no index.
    std::optional<std::size_t> index_of(const std::string& v) const;
    const std::vector<std::string>& values() const { return labels_; }
    bool empty() const { return labels_.empty(); }

  private:
    std::vector<std::string> labels_;
};

/// One observed label event.
struct AnnotationRecord {
    std::string item_id;
    std::string annotator_id;
    int trial = 1;  // contiguous from 1 per (item, annotator)
    Label label;
    std::optional<std::string> explanation;
};

enum class Verdict { MakesSense, DoesNotMakeSense, Idk };

/// One pairwise judgment: judge evaluated labeler's (label, explanation) pair.
/// labeler_id == judge_id is a self-validation.
struct ValidationRecord {
    std::string item_id;
    std::string labeler_id;
    std::string judge_id;
    Label label;
    Verdict verdict = Verdict::Idk;
};

enum class LinkKind { Logit, Probit };

/// CDF of the link distribution: maps a latent propensity to a probability.
/// Strictly increasing onto (0,1), with apply(0) = 0.5. Throws on non-finite eta.
double link_apply(LinkKind kind, double eta);

/// Density of the link distribution (used for probit working weights).
double link_density(LinkKind kind, double eta);

/// Inverse of link_apply.
double link_inverse(LinkKind kind, double p);

/// Exact Bernoulli log-likelihood of a 0/1 outcome at linear predictor eta,
/// computed in log space so extreme eta never saturates.
double bernoulli_loglik(LinkKind kind, double y, double eta);

enum class Regime { Global, Hlv };

/// Latent-scale parameter set driving simulation. All effects live on the
/// link (logit/probit) scale; probabilities appear only through link_apply.
struct GenerativeParams {
    double mu = 0.0;                // shared latent truth offset
    double beta_item_sd = 0.0;      // instance difficulty spread
    double rho_annotator_sd = 0.0;  // stable annotator tendency spread
    double sigma_trial_sd = 0.0;    // situational (within-person) spread
    double delta_interp_sd = 0.0;   // interpretive deviation spread (HLV only)
    LinkKind link = LinkKind::Logit;

    void validate() const;  // throws config_error on negative SDs
};

/// Realized effect draws for one simulated dataset cell.
struct EffectDraws {
    double beta_item = 0.0;
    double rho_annotator = 0.0;
    double sigma_situational = 0.0;
    double delta_interp = 0.0;  // ignored unless HLV
};

/// Sum of truth and error components on the link scale. In the HLV regime the
/// interpretive deviation shifts the per-annotator truth; otherwise it is absent.
double latent_propensity(const GenerativeParams& params, const EffectDraws& draws,
                         Regime regime);

}  // namespace labelmeas
