#include "labelmeas/model.hpp"

#include <algorithm>
#include <cmath>

#include "labelmeas/errors.hpp"
#include "labelmeas/stats.hpp"

namespace labelmeas {

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    for (const auto& l : labels_)
        if (l == kIdk) throw config_error("label set must not contain the IDK sentinel");
    for (std::size_t i = 0; i < labels_.size(); ++i)
        for (std::size_t j = i + 1; j < labels_.size(); ++j)
            if (labels_[i] == labels_[j])
                throw config_error("duplicate label in label set: " + labels_[i]);
}

bool LabelSet::contains(const std::string& v) const {
    return std::find(labels_.begin(), labels_.end(), v) != labels_.end();
}

std::optional<std::size_t> LabelSet::index_of(const std::string& v) const {
    auto it = std::find(labels_.begin(), labels_.end(), v);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

double link_apply(LinkKind kind, double eta) {
    if (!std::isfinite(eta)) throw numeric_error("link_apply: eta must be finite");
    switch (kind) {
        case LinkKind::Logit:
            // Branch on sign so both tails are computed as exp(-|eta|)/(1+exp(-|eta|)).
            if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
            else {
                const double e = std::exp(eta);
                return e / (1.0 + e);
            }
        case LinkKind::Probit:
            return stats::norm_cdf(eta);
    }
    throw numeric_error("link_apply: unknown link kind");
}

double link_density(LinkKind kind, double eta) {
    if (!std::isfinite(eta)) throw numeric_error("link_density: eta must be finite");
    switch (kind) {
        case LinkKind::Logit: {
            const double p = link_apply(LinkKind::Logit, eta);
            return p * (1.0 - p);
        }
        case LinkKind::Probit:
            return stats::norm_pdf(eta);
    }
    throw numeric_error("link_density: unknown link kind");
}

double link_inverse(LinkKind kind, double p) {
    if (!(p > 0.0 && p < 1.0)) throw numeric_error("link_inverse: p must be in (0,1)");
    switch (kind) {
        case LinkKind::Logit:
            return std::log(p / (1.0 - p));
        case LinkKind::Probit:
            return stats::norm_quantile(p);
    }
    throw numeric_error("link_inverse: unknown link kind");
}

double bernoulli_loglik(LinkKind kind, double y, double eta) {
    if (kind == LinkKind::Logit) {
        // y*eta - softplus(eta)
        const double softplus = std::max(eta, 0.0) + std::log1p(std::exp(-std::fabs(eta)));
        return y * eta - softplus;
    }
    return y == 1.0 ? stats::norm_log_cdf(eta) : stats::norm_log_cdf(-eta);
}

void GenerativeParams::validate() const {
    if (!std::isfinite(mu)) throw config_error("GenerativeParams: mu must be finite");
    const double sds[] = {beta_item_sd, rho_annotator_sd, sigma_trial_sd, delta_interp_sd};
    for (double s : sds)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw config_error("GenerativeParams: std-devs must be finite and >= 0");
}

double latent_propensity(const GenerativeParams& params, const EffectDraws& draws,
                         Regime regime) {
    double eta = params.mu + draws.beta_item + draws.rho_annotator + draws.sigma_situational;
    if (regime == Regime::Hlv) eta += draws.delta_interp;
    return eta;
}

}  // namespace labelmeas
