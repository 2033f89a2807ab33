#include "labelmeas/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "labelmeas/errors.hpp"
#include "labelmeas/model.hpp"

namespace labelmeas::glmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

inline double obs_loglik(double y, LinkKind link, double eta) {
    return bernoulli_loglik(link, y, eta);
}

inline void obs_score_weight(double y, LinkKind link, double eta, double& s, double& w) {
    const double pr = std::min(std::max(link_apply(link, eta), 1e-12), 1.0 - 1e-12);
    if (link == LinkKind::Logit) {
        s = y - pr;
        w = pr * (1.0 - pr);
    } else {
        const double d = link_density(link, eta);
        const double v = pr * (1.0 - pr);
        s = (y - pr) * d / v;
        w = d * d / v;
    }
}

struct StreamingLse {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;

    void add(double x) {
        if (x <= max) {
            sum += std::exp(x - max);
        } else {
            sum = sum * std::exp(max - x) + 1.0;
            max = x;
        }
    }
    double value() const { return max + std::log(sum); }
};

// One-factor path: independent 1-D integrals per group, centered and scaled
// at each group's conditional mode.
double single_factor_loglik(const DesignMatrices& dm, double theta,
                            const Eigen::VectorXd& beta, int nodes) {
    const std::size_t n = dm.n();
    const auto& level = dm.z_level[0];
    const std::size_t n_groups = dm.factors[0].levels.size();

    Eigen::VectorXd base = dm.X * beta;
    std::vector<std::vector<std::size_t>> groups(n_groups);
    for (std::size_t r = 0; r < n; ++r) groups[static_cast<std::size_t>(level[r])].push_back(r);

    std::vector<double> t, logw;
    gauss_hermite_log(nodes, t, logw);

    double total = 0.0;
    for (const auto& rows : groups) {
        // Conditional mode of v for this group.
        double v = 0.0;
        for (int it = 0; it < 60; ++it) {
            double gs = 0.0, gw = 0.0;
            for (std::size_t r : rows) {
                double s, ww;
                obs_score_weight(dm.y[static_cast<Eigen::Index>(r)], dm.link,
                                 base[static_cast<Eigen::Index>(r)] + theta * v, s, ww);
                gs += s;
                gw += ww;
            }
            const double grad = theta * gs - v;
            const double hess = theta * theta * gw + 1.0;
            const double step = grad / hess;
            v += step;
            if (std::fabs(step) < 1e-12) break;
        }
        double hw = 0.0;
        for (std::size_t r : rows) {
            double s, ww;
            obs_score_weight(dm.y[static_cast<Eigen::Index>(r)], dm.link,
                             base[static_cast<Eigen::Index>(r)] + theta * v, s, ww);
            hw += ww;
        }
        const double scale = 1.0 / std::sqrt(theta * theta * hw + 1.0);

        StreamingLse lse;
        for (int k = 0; k < nodes; ++k) {
            const double vk = v + M_SQRT2 * scale * t[k];
            double g = -0.5 * vk * vk;
            for (std::size_t r : rows)
                g += obs_loglik(dm.y[static_cast<Eigen::Index>(r)], dm.link,
                                base[static_cast<Eigen::Index>(r)] + theta * vk);
            lse.add(logw[static_cast<std::size_t>(k)] + t[static_cast<std::size_t>(k)] * t[static_cast<std::size_t>(k)] + g);
        }
        total += std::log(M_SQRT2 * scale) - 0.5 * kLog2Pi + lse.value();
    }
    return total;
}

// Crossed path: exact tensor-product integration over all q random
// dimensions, centered at the joint conditional mode.
double tensor_loglik(const DesignMatrices& dm, const std::vector<double>& theta,
                     const Eigen::VectorXd& beta, int nodes) {
    const std::size_t n = dm.n();
    const std::size_t nfac = dm.factors.size();
    const auto q = static_cast<Eigen::Index>(dm.q());

    std::vector<std::size_t> offset(nfac, 0);
    for (std::size_t f = 1; f < nfac; ++f)
        offset[f] = offset[f - 1] + dm.factors[f - 1].levels.size();

    Eigen::VectorXd base = dm.X * beta;
    auto eta_at = [&](const Eigen::VectorXd& v, std::size_t r) {
        double e = base[static_cast<Eigen::Index>(r)];
        for (std::size_t f = 0; f < nfac; ++f)
            e += theta[f] * v[static_cast<Eigen::Index>(offset[f] + dm.z_level[f][r])];
        return e;
    };

    // Joint mode by damped Newton with the expected Hessian.
    Eigen::VectorXd v = Eigen::VectorXd::Zero(q);
    Eigen::MatrixXd H(q, q);
    auto objective = [&](const Eigen::VectorXd& vv) {
        double g = -0.5 * vv.squaredNorm();
        for (std::size_t r = 0; r < n; ++r)
            g += obs_loglik(dm.y[static_cast<Eigen::Index>(r)], dm.link, eta_at(vv, r));
        return g;
    };
    double gcur = objective(v);
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd grad = -v;
        H.setZero();
        for (std::size_t r = 0; r < n; ++r) {
            double s, w;
            obs_score_weight(dm.y[static_cast<Eigen::Index>(r)], dm.link, eta_at(v, r), s, w);
            for (std::size_t a = 0; a < nfac; ++a) {
                const auto ca = static_cast<Eigen::Index>(offset[a] + dm.z_level[a][r]);
                grad[ca] += theta[a] * s;
                for (std::size_t b = 0; b < nfac; ++b) {
                    const auto cb = static_cast<Eigen::Index>(offset[b] + dm.z_level[b][r]);
                    H(ca, cb) += theta[a] * theta[b] * w;
                }
            }
        }
        H.diagonal().array() += 1.0;
        const Eigen::VectorXd step = H.ldlt().solve(grad);
        double alpha = 1.0;
        bool ok = false;
        for (int h = 0; h < 30; ++h) {
            const Eigen::VectorXd vn = v + alpha * step;
            const double gn = objective(vn);
            if (gn >= gcur - 1e-13) {
                v = vn;
                ok = gn - gcur < 1e-12;
                gcur = gn;
                break;
            }
            alpha *= 0.5;
        }
        if (ok) break;
    }
    // Curvature at the mode for the grid transform.
    {
        H.setZero();
        for (std::size_t r = 0; r < n; ++r) {
            double s, w;
            obs_score_weight(dm.y[static_cast<Eigen::Index>(r)], dm.link, eta_at(v, r), s, w);
            for (std::size_t a = 0; a < nfac; ++a)
                for (std::size_t b = 0; b < nfac; ++b)
                    H(static_cast<Eigen::Index>(offset[a] + dm.z_level[a][r]),
                      static_cast<Eigen::Index>(offset[b] + dm.z_level[b][r])) +=
                        theta[a] * theta[b] * w;
        }
        H.diagonal().array() += 1.0;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
        throw numeric_error("quadrature oracle: curvature is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    // v(t) = vhat + sqrt(2) * L^{-T} t
    const Eigen::MatrixXd Ainv = L.transpose()
                                     .triangularView<Eigen::Upper>()
                                     .solve(Eigen::MatrixXd::Identity(q, q));
    double logdetA = 0.0;
    for (Eigen::Index d = 0; d < q; ++d) logdetA -= std::log(L(d, d));

    std::vector<double> t, logw;
    gauss_hermite_log(nodes, t, logw);

    StreamingLse lse;
    std::vector<int> idx(static_cast<std::size_t>(q), 0);
    Eigen::VectorXd tvec(q), vv(q);
    for (;;) {
        double wsum = 0.0, tsq = 0.0;
        for (Eigen::Index d = 0; d < q; ++d) {
            const int kd = idx[static_cast<std::size_t>(d)];
            tvec[d] = t[static_cast<std::size_t>(kd)];
            wsum += logw[static_cast<std::size_t>(kd)];
            tsq += tvec[d] * tvec[d];
        }
        vv.noalias() = v + M_SQRT2 * (Ainv * tvec);
        lse.add(wsum + tsq + objective(vv));

        Eigen::Index d = 0;
        for (; d < q; ++d) {
            if (++idx[static_cast<std::size_t>(d)] < nodes) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
        if (d == q) break;
    }

    return 0.5 * static_cast<double>(q) * std::log(2.0) + logdetA -
           0.5 * static_cast<double>(q) * kLog2Pi + lse.value();
}

}  // namespace

void gauss_hermite_log(int n, std::vector<double>& nodes, std::vector<double>& log_weights) {
    if (n < 1) throw numeric_error("gauss_hermite: need at least one node");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        const double b = std::sqrt((i + 1) / 2.0);
        J(i, i + 1) = b;
        J(i + 1, i) = b;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    nodes.resize(static_cast<std::size_t>(n));
    log_weights.resize(static_cast<std::size_t>(n));

    // w_k = sqrt(pi) / sum_j Htilde_j(t_k)^2 over the orthonormal Hermite
    // polynomials. The recurrence runs with exponent tracking because the
    // values span hundreds of decades at high order.
    for (int k = 0; k < n; ++k) {
        const double t = es.eigenvalues()[k];
        nodes[static_cast<std::size_t>(k)] = t;
        double p_prev = 0.0;
        double p_cur = 0.7511255444649425;  // pi^{-1/4}
        double scale = 0.0;                 // actual value = p * exp(scale)
        StreamingLse sum_sq;
        sum_sq.add(2.0 * std::log(std::fabs(p_cur)));
        for (int j = 0; j + 1 < n; ++j) {
            const double b_j = std::sqrt(j / 2.0);
            const double b_next = std::sqrt((j + 1) / 2.0);
            const double p_next = (t * p_cur - b_j * p_prev) / b_next;
            p_prev = p_cur;
            p_cur = p_next;
            if (p_cur != 0.0)
                sum_sq.add(2.0 * (std::log(std::fabs(p_cur)) + scale));
            const double mag = std::max(std::fabs(p_cur), std::fabs(p_prev));
            if (mag > 1e100) {
                p_cur /= 1e100;
                p_prev /= 1e100;
                scale += std::log(1e100);
            }
        }
        log_weights[static_cast<std::size_t>(k)] = -sum_sq.value();
    }
}

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    std::vector<double> logw;
    gauss_hermite_log(n, nodes, logw);
    weights.resize(logw.size());
    for (std::size_t k = 0; k < logw.size(); ++k) weights[k] = std::exp(logw[k]);
}

double quadrature_loglik(const DesignMatrices& dm, const std::vector<double>& theta,
                         const Eigen::VectorXd& beta, int nodes) {
    if (theta.size() != dm.factors.size())
        throw config_error("quadrature: theta size does not match factors");
    if (beta.size() != static_cast<Eigen::Index>(dm.p()))
        throw config_error("quadrature: beta size does not match design");
    for (double t : theta)
        if (!(t >= 0.0) || !std::isfinite(t))
            throw numeric_error("quadrature: theta must be finite and >= 0");
    if (dm.factors.size() == 1) return single_factor_loglik(dm, theta[0], beta, nodes);
    if (dm.q() > 6)
        throw numeric_error(
            "quadrature oracle handles a single factor or crossed designs with q <= 6");
    return tensor_loglik(dm, theta, beta, nodes);
}

QuadratureResult quadrature_oracle(const DesignMatrices& dm,
                                   const std::vector<double>& theta,
                                   const Eigen::VectorXd& beta, int start_nodes,
                                   double tol) {
    const bool tensor = dm.factors.size() > 1;
    const int cap = tensor ? 48 : 1024;
    int nodes = std::max(start_nodes, 2);
    double prev = quadrature_loglik(dm, theta, beta, nodes);
    while (nodes * 2 <= cap) {
        nodes *= 2;
        const double cur = quadrature_loglik(dm, theta, beta, nodes);
        if (std::fabs(cur - prev) < tol) return {cur, nodes};
        prev = cur;
    }
    throw numeric_error("quadrature oracle did not stabilize at " + std::to_string(cap) +
                        " nodes per dimension");
}

}  // namespace labelmeas::glmm
