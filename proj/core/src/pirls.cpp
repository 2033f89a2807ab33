#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "labelmeas/errors.hpp"
#include "labelmeas/glmm.hpp"
#include "labelmeas/model.hpp"

namespace labelmeas::glmm {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kWeightFloor = 1e-10;

}  // namespace

// The normal-equation matrix is [[D, C], [C', S0]] with the largest factor's
// block D diagonal (each row hits exactly one level per factor). That block
// is eliminated analytically and the remainder - the other factors' levels
// followed by the fixed effects - is factored densely, which is the (p+q)
// Cholesky with the q-block ordered first.
struct Fitter::Impl {
    DesignMatrices dm;
    std::size_t n = 0, p = 0, q = 0, nfac = 0;

    std::size_t lead = 0;      // declared index of the eliminated factor
    std::size_t lead_dim = 0;  // its level count (0 when there are no factors)
    bool have_lead = false;
    std::vector<std::size_t> rest_factors;  // declared indices, largest first
    std::vector<std::size_t> rest_offset;   // u-column offsets inside S
    std::size_t m = 0;                      // S dimension: (q - lead_dim) + p

    // u layout: lead factor levels first, then rest factors in rest order.
    std::vector<std::size_t> u_offset_declared;

    std::vector<double> xrm;               // X row-major
    std::vector<std::int32_t> lead_level;  // n (or empty)
    std::vector<std::int32_t> rest_col;    // n * rest_factors.size(), S columns

    // Per-iteration buffers.
    Eigen::VectorXd D;   // lead_dim
    Eigen::MatrixXd C;   // lead_dim x m
    Eigen::MatrixXd S;   // m x m
    Eigen::LLT<Eigen::MatrixXd> llt;
    double lead_logdet = 0.0;

    PirlsState warm;
    bool have_warm = false;
    int laplace_evals = 0;

    explicit Impl(DesignMatrices d) : dm(std::move(d)) {
        n = dm.n();
        p = dm.p();
        q = dm.q();
        nfac = dm.factors.size();
        build_structure();
    }

    void build_structure() {
        std::vector<std::size_t> order(nfac);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return dm.factors[a].levels.size() > dm.factors[b].levels.size();
        });
        if (nfac > 0) {
            lead = order[0];
            lead_dim = dm.factors[lead].levels.size();
            have_lead = true;
            rest_factors.assign(order.begin() + 1, order.end());
        }
        m = (q - lead_dim) + p;
        if (m > 8000)
            throw numeric_error(
                "crossed random-effects remainder too large for the dense solve (" +
                std::to_string(m) + " columns)");

        rest_offset.resize(rest_factors.size());
        std::size_t off = 0;
        for (std::size_t i = 0; i < rest_factors.size(); ++i) {
            rest_offset[i] = off;
            off += dm.factors[rest_factors[i]].levels.size();
        }

        u_offset_declared.assign(nfac, 0);
        if (have_lead) u_offset_declared[lead] = 0;
        for (std::size_t i = 0; i < rest_factors.size(); ++i)
            u_offset_declared[rest_factors[i]] = lead_dim + rest_offset[i];

        xrm.resize(n * p);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < p; ++j)
                xrm[r * p + j] = dm.X(static_cast<Eigen::Index>(r),
                                      static_cast<Eigen::Index>(j));

        if (have_lead) {
            lead_level.resize(n);
            const auto& lv = dm.z_level[lead];
            for (std::size_t r = 0; r < n; ++r) lead_level[r] = lv[r];
        }
        rest_col.resize(n * rest_factors.size());
        for (std::size_t i = 0; i < rest_factors.size(); ++i) {
            const auto& lv = dm.z_level[rest_factors[i]];
            for (std::size_t r = 0; r < n; ++r)
                rest_col[r * rest_factors.size() + i] =
                    static_cast<std::int32_t>(rest_offset[i] + lv[r]);
        }

        D.resize(static_cast<Eigen::Index>(lead_dim));
        C.resize(static_cast<Eigen::Index>(lead_dim), static_cast<Eigen::Index>(m));
        S.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    }

    std::vector<double> checked_theta(const std::vector<double>& theta) const {
        if (theta.size() != nfac)
            throw config_error("theta size does not match the number of random factors");
        for (double t : theta)
            if (!(t >= 0.0) || !std::isfinite(t))
                throw numeric_error("theta must be finite and >= 0");
        return theta;
    }

    // u is stored lead-first; eta = X beta + sum_f theta_f * u[col_f].
    void linear_predictor(const std::vector<double>& th, const Eigen::VectorXd& beta,
                          const Eigen::VectorXd& u, Eigen::VectorXd& eta) const {
        eta.resize(static_cast<Eigen::Index>(n));
        const std::size_t nrest = rest_factors.size();
        std::vector<double> th_rest(nrest);
        for (std::size_t i = 0; i < nrest; ++i) th_rest[i] = th[rest_factors[i]];
        const double th_lead = have_lead ? th[lead] : 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double e = 0.0;
            if (have_lead) e += th_lead * u[lead_level[r]];
            for (std::size_t i = 0; i < nrest; ++i)
                e += th_rest[i] *
                     u[static_cast<Eigen::Index>(lead_dim) + rest_col[r * nrest + i]];
            const double* xr = &xrm[r * p];
            for (std::size_t j = 0; j < p; ++j) e += xr[j] * beta[static_cast<Eigen::Index>(j)];
            eta[static_cast<Eigen::Index>(r)] = e;
        }
    }

    double deviance(const Eigen::VectorXd& eta, Eigen::VectorXd& prob) const {
        prob.resize(static_cast<Eigen::Index>(n));
        double ll = 0.0;
        if (dm.link == LinkKind::Logit) {
            // One exp per row covers both the probability and the exact
            // log-likelihood: softplus(eta) = max(eta,0) + log1p(e^{-|eta|}).
            for (std::size_t r = 0; r < n; ++r) {
                const auto ri = static_cast<Eigen::Index>(r);
                const double e = eta[ri];
                const double ex = std::exp(-std::fabs(e));
                const double pr = e >= 0.0 ? 1.0 / (1.0 + ex) : ex / (1.0 + ex);
                prob[ri] = std::min(std::max(pr, kProbFloor), 1.0 - kProbFloor);
                ll += dm.y[ri] * e - (std::max(e, 0.0) + std::log1p(ex));
            }
        } else {
            for (std::size_t r = 0; r < n; ++r) {
                const auto ri = static_cast<Eigen::Index>(r);
                double pr = link_apply(dm.link, eta[ri]);
                pr = std::min(std::max(pr, kProbFloor), 1.0 - kProbFloor);
                prob[ri] = pr;
                ll += bernoulli_loglik(dm.link, dm.y[ri], eta[ri]);
            }
        }
        return -2.0 * ll;
    }

    void weights_and_score(const Eigen::VectorXd& eta, const Eigen::VectorXd& prob,
                           Eigen::VectorXd& w, Eigen::VectorXd& s) const {
        w.resize(static_cast<Eigen::Index>(n));
        s.resize(static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < n; ++r) {
            const auto ri = static_cast<Eigen::Index>(r);
            const double pr = prob[ri];
            const double resid = dm.y[ri] - pr;
            if (dm.link == LinkKind::Logit) {
                w[ri] = std::max(pr * (1.0 - pr), kWeightFloor);
                s[ri] = resid;
            } else {
                const double dphi = link_density(dm.link, eta[ri]);
                const double v = std::max(pr * (1.0 - pr), kProbFloor);
                w[ri] = std::max(dphi * dphi / v, kWeightFloor);
                s[ri] = resid * dphi / v;
            }
        }
    }

    // Assembles D, C, S (with the ridge identity on every u column) and the
    // penalized-likelihood gradient g, then factors the Schur complement.
    void assemble_and_factor(const std::vector<double>& th, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& w, const Eigen::VectorXd& s,
                             Eigen::VectorXd& g) {
        const std::size_t nrest = rest_factors.size();
        std::vector<double> th_rest(nrest);
        for (std::size_t i = 0; i < nrest; ++i) th_rest[i] = th[rest_factors[i]];
        const double th_lead = have_lead ? th[lead] : 0.0;

        D.setZero();
        C.setZero();
        S.setZero();
        g.setZero(static_cast<Eigen::Index>(lead_dim + m));

        const std::size_t k = nrest + p;
        std::vector<double> mv(k);
        std::vector<std::int32_t> cols(k);
        for (std::size_t r = 0; r < n; ++r) {
            const auto ri = static_cast<Eigen::Index>(r);
            const double wr = w[ri];
            const double sr = s[ri];
            for (std::size_t i = 0; i < nrest; ++i) {
                mv[i] = th_rest[i];
                cols[i] = rest_col[r * nrest + i];
            }
            const double* xr = &xrm[r * p];
            for (std::size_t j = 0; j < p; ++j) {
                mv[nrest + j] = xr[j];
                cols[nrest + j] = static_cast<std::int32_t>(m - p + j);
            }

            if (have_lead) {
                const std::int32_t lev = lead_level[r];
                D[lev] += wr * th_lead * th_lead;
                g[lev] += sr * th_lead;
                double* crow = C.data() + static_cast<std::size_t>(lev);  // column-major
                const double wl = wr * th_lead;
                for (std::size_t a = 0; a < k; ++a)
                    crow[static_cast<std::size_t>(cols[a]) * lead_dim] += wl * mv[a];
            }
            for (std::size_t a = 0; a < k; ++a) {
                const double wma = wr * mv[a];
                g[static_cast<Eigen::Index>(lead_dim) + cols[a]] += sr * mv[a];
                for (std::size_t b = a; b < k; ++b) {
                    // lower triangle: S(row >= col)
                    const std::int32_t ca = cols[a], cb = cols[b];
                    if (ca <= cb) S(cb, ca) += wma * mv[b];
                    else S(ca, cb) += wma * mv[b];
                }
            }
        }

        D.array() += 1.0;
        for (std::size_t c = 0; c + p < m; ++c)
            S(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)) += 1.0;
        for (std::size_t d2 = 0; d2 < q; ++d2)
            g[static_cast<Eigen::Index>(d2)] -= u[static_cast<Eigen::Index>(d2)];

        lead_logdet = 0.0;
        for (Eigen::Index i = 0; i < D.size(); ++i) lead_logdet += std::log(D[i]);

        if (have_lead && lead_dim > 0) {
            // S -= C' D^{-1} C, batched as a rank update with row-scaled C.
            Eigen::MatrixXd Cw = D.cwiseSqrt().cwiseInverse().asDiagonal() * C;
            S.selfadjointView<Eigen::Lower>().rankUpdate(Cw.transpose(), -1.0);
        }
        llt.compute(S.selfadjointView<Eigen::Lower>());
        if (llt.info() != Eigen::Success)
            throw numeric_error(
                "PIRLS working system is singular or indefinite; check for collinear "
                "fixed effects or an empty factor");
    }

    // Solves the full system for the Fisher step given the gradient.
    Eigen::VectorXd solve(const Eigen::VectorXd& g) const {
        const auto ld = static_cast<Eigen::Index>(lead_dim);
        const auto md = static_cast<Eigen::Index>(m);
        Eigen::VectorXd rhs = g.segment(ld, md);
        if (have_lead && lead_dim > 0)
            rhs.noalias() -= C.transpose() * g.head(ld).cwiseQuotient(D);
        const Eigen::VectorXd x_rest = llt.solve(rhs);
        Eigen::VectorXd step(ld + md);
        step.segment(ld, md) = x_rest;
        if (have_lead && lead_dim > 0)
            step.head(ld) = (g.head(ld) - C * x_rest).cwiseQuotient(D);
        return step;
    }

    double logdet_q_block() const {
        double ld = lead_logdet;
        const auto& L = llt.matrixLLT();
        for (std::size_t c = 0; c + p < m; ++c)
            ld += 2.0 * std::log(L(static_cast<Eigen::Index>(c),
                                   static_cast<Eigen::Index>(c)));
        return ld;
    }
};

Fitter::Fitter(DesignMatrices dm) : impl_(std::make_unique<Impl>(std::move(dm))) {}
Fitter::~Fitter() = default;
Fitter::Fitter(Fitter&&) noexcept = default;
Fitter& Fitter::operator=(Fitter&&) noexcept = default;

const DesignMatrices& Fitter::dm() const { return impl_->dm; }
int Fitter::evaluations() const { return impl_->laplace_evals; }

PirlsResult Fitter::pirls(const std::vector<double>& theta, const PirlsState* warm,
                          PirlsOptions opt) {
    Impl& im = *impl_;
    const std::vector<double> th = im.checked_theta(theta);

    Eigen::VectorXd beta, u;
    if (warm && warm->beta.size() == static_cast<Eigen::Index>(im.p) &&
        warm->u.size() == static_cast<Eigen::Index>(im.q)) {
        beta = warm->beta;
        u = warm->u;
    } else {
        beta.setZero(static_cast<Eigen::Index>(im.p));
        const double ybar = im.dm.y.mean();
        beta[0] = link_inverse(im.dm.link, std::min(std::max(ybar, 0.02), 0.98));
        u.setZero(static_cast<Eigen::Index>(im.q));
    }
    // Zero-theta blocks carry no signal; force their effects to exactly zero.
    for (std::size_t f = 0; f < im.nfac; ++f) {
        if (th[f] == 0.0) {
            const std::size_t len = im.dm.factors[f].levels.size();
            u.segment(static_cast<Eigen::Index>(im.u_offset_declared[f]),
                      static_cast<Eigen::Index>(len))
                .setZero();
        }
    }

    Eigen::VectorXd eta, prob, w, s, g;
    im.linear_predictor(th, beta, u, eta);
    double pdev = im.deviance(eta, prob) + u.squaredNorm();
    double last_change = std::numeric_limits<double>::infinity();

    PirlsResult res;
    res.converged = false;
    int iter = 0;
    for (; iter < opt.max_iters; ++iter) {
        im.weights_and_score(eta, prob, w, s);
        im.assemble_and_factor(th, u, w, s, g);
        if (last_change < opt.rel_tol * (std::fabs(pdev) + 1.0)) {
            // Converged at the current state; the factorization is current.
            res.converged = true;
            break;
        }
        const Eigen::VectorXd d = im.solve(g);

        double step = 1.0;
        double pdev_new = pdev;
        Eigen::VectorXd beta_new, u_new;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            u_new = u + step * d.head(static_cast<Eigen::Index>(im.q));
            beta_new = beta + step * d.tail(static_cast<Eigen::Index>(im.p));
            im.linear_predictor(th, beta_new, u_new, eta);
            pdev_new = im.deviance(eta, prob) + u_new.squaredNorm();
            if (pdev_new <= pdev * (1.0 + 1e-13) + 1e-13) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent left: already at the optimum up to rounding.
            im.linear_predictor(th, beta, u, eta);
            im.deviance(eta, prob);
            res.converged = true;
            break;
        }
        u = u_new;
        beta = beta_new;
        last_change = std::fabs(pdev - pdev_new);
        pdev = pdev_new;
    }

    if (!res.converged) {
        // Ran out of iterations: refresh the factorization at the final state.
        im.linear_predictor(th, beta, u, eta);
        pdev = im.deviance(eta, prob) + u.squaredNorm();
        im.weights_and_score(eta, prob, w, s);
        im.assemble_and_factor(th, u, w, s, g);
    } else {
        im.linear_predictor(th, beta, u, eta);
        im.weights_and_score(eta, prob, w, s);
    }
    const double dev = im.deviance(eta, prob);

    res.beta = beta;
    res.u = u;
    res.w = w;
    res.pdev = dev + u.squaredNorm();
    res.cond_loglik = -0.5 * dev;
    res.logdet = im.logdet_q_block();
    res.n_iters = iter;
    res.modes.resize(im.nfac);
    for (std::size_t f = 0; f < im.nfac; ++f) {
        const std::size_t len = im.dm.factors[f].levels.size();
        res.modes[f].resize(len);
        for (std::size_t l = 0; l < len; ++l)
            res.modes[f][l] =
                theta[f] * u[static_cast<Eigen::Index>(im.u_offset_declared[f] + l)];
    }

    im.warm.beta = beta;
    im.warm.u = u;
    im.have_warm = true;
    return res;
}

double Fitter::laplace_loglik(const std::vector<double>& theta) {
    Impl& im = *impl_;
    const PirlsState* warm = im.have_warm ? &im.warm : nullptr;
    const PirlsResult r = pirls(theta, warm);
    ++im.laplace_evals;
    return r.cond_loglik - 0.5 * r.u.squaredNorm() - 0.5 * r.logdet;
}

double Fitter::penalized_deviance(const std::vector<double>& theta,
                                  const Eigen::VectorXd& beta,
                                  const Eigen::VectorXd& u) const {
    const Impl& im = *impl_;
    const std::vector<double> th = im.checked_theta(theta);
    Eigen::VectorXd eta, prob;
    im.linear_predictor(th, beta, u, eta);
    return im.deviance(eta, prob) + u.squaredNorm();
}

Eigen::MatrixXd Fitter::beta_covariance(const std::vector<double>& theta) {
    Impl& im = *impl_;
    const PirlsState* warm = im.have_warm ? &im.warm : nullptr;
    pirls(theta, warm);  // leaves the factorization at the converged state

    // The fixed effects live in the trailing p columns of the dense remainder,
    // so their block of the full inverse is the trailing block of S^{-1}.
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(im.m),
                                                static_cast<Eigen::Index>(im.p));
    for (std::size_t j = 0; j < im.p; ++j)
        rhs(static_cast<Eigen::Index>(im.m - im.p + j), static_cast<Eigen::Index>(j)) = 1.0;
    const Eigen::MatrixXd x = im.llt.solve(rhs);
    Eigen::MatrixXd cov = x.bottomRows(static_cast<Eigen::Index>(im.p));
    return 0.5 * (cov + cov.transpose());
}

PirlsResult pirls(const DesignMatrices& dm, const std::vector<double>& theta,
                  const PirlsState* warm, PirlsOptions opt) {
    Fitter f(dm);
    return f.pirls(theta, warm, opt);
}

double laplace_loglik(const DesignMatrices& dm, const std::vector<double>& theta) {
    Fitter f(dm);
    return f.laplace_loglik(theta);
}

}  // namespace labelmeas::glmm
