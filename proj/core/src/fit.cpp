#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "labelmeas/errors.hpp"
#include "labelmeas/glmm.hpp"
#include "labelmeas/stats.hpp"

namespace labelmeas::glmm {

namespace {

struct NmOutcome {
    std::vector<double> x;
    double f = 0.0;
    bool converged = false;
};

// Minimizes f over R^m. Convergence: simplex diameter below diam_tol and
// best-worst spread below f_tol.
NmOutcome nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                      std::vector<double> x0, double step, double diam_tol,
                      double f_tol, int max_evals) {
    const std::size_t m = x0.size();
    std::vector<std::vector<double>> x(m + 1, x0);
    std::vector<double> fx(m + 1);
    int evals = 0;
    for (std::size_t i = 0; i < m; ++i) x[i + 1][i] += step;
    for (std::size_t v = 0; v <= m; ++v) {
        fx[v] = f(x[v]);
        ++evals;
    }

    NmOutcome out;
    auto order = [&]() {
        std::vector<std::size_t> idx(m + 1);
        for (std::size_t i = 0; i <= m; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        std::vector<std::vector<double>> x2(m + 1);
        std::vector<double> f2(m + 1);
        for (std::size_t i = 0; i <= m; ++i) {
            x2[i] = x[idx[i]];
            f2[i] = fx[idx[i]];
        }
        x.swap(x2);
        fx.swap(f2);
    };

    while (evals < max_evals) {
        order();
        double diam = 0.0;
        for (std::size_t v = 1; v <= m; ++v)
            for (std::size_t i = 0; i < m; ++i)
                diam = std::max(diam, std::fabs(x[v][i] - x[0][i]));
        if (diam < diam_tol && fx[m] - fx[0] < f_tol) {
            out.converged = true;
            break;
        }

        std::vector<double> c(m, 0.0);  // centroid of all but the worst
        for (std::size_t v = 0; v < m; ++v)
            for (std::size_t i = 0; i < m; ++i) c[i] += x[v][i] / static_cast<double>(m);

        auto blend = [&](double coef) {
            std::vector<double> pt(m);
            for (std::size_t i = 0; i < m; ++i) pt[i] = c[i] + coef * (c[i] - x[m][i]);
            return pt;
        };

        const std::vector<double> xr = blend(1.0);
        const double fr = f(xr);
        ++evals;
        if (fr < fx[0]) {
            const std::vector<double> xe = blend(2.0);
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                x[m] = xe;
                fx[m] = fe;
            } else {
                x[m] = xr;
                fx[m] = fr;
            }
        } else if (fr < fx[m - 1]) {
            x[m] = xr;
            fx[m] = fr;
        } else {
            const bool outside = fr < fx[m];
            const std::vector<double> xc = blend(outside ? 0.5 : -0.5);
            const double fc = f(xc);
            ++evals;
            if (fc < (outside ? fr : fx[m])) {
                x[m] = xc;
                fx[m] = fc;
            } else {
                for (std::size_t v = 1; v <= m; ++v) {  // shrink toward the best
                    for (std::size_t i = 0; i < m; ++i)
                        x[v][i] = x[0][i] + 0.5 * (x[v][i] - x[0][i]);
                    fx[v] = f(x[v]);
                    ++evals;
                }
            }
        }
    }
    order();
    out.x = x[0];
    out.f = fx[0];
    return out;
}

}  // namespace

FitResult Fitter::fit(const FitOptions& opt) {
    const DesignMatrices& d = dm();
    const std::size_t nfac = d.factors.size();
    const std::size_t p = d.p();

    FitResult res;
    res.ci_level = opt.ci_level;
    res.n_obs = d.n();

    std::vector<bool> pinned(nfac, false);
    std::vector<double> theta(nfac, opt.theta_init);
    double best_ll = -std::numeric_limits<double>::infinity();

    auto theta_from = [&](const std::vector<double>& x,
                          const std::vector<std::size_t>& active) {
        std::vector<double> th(nfac, 0.0);
        for (std::size_t f = 0; f < nfac; ++f)
            if (!pinned[f]) th[f] = theta[f];
        for (std::size_t i = 0; i < active.size(); ++i)
            th[active[i]] = std::exp(std::min(x[i], 6.0));
        return th;
    };

    auto objective = [&](const std::vector<double>& x,
                         const std::vector<std::size_t>& active) {
        const double ll = laplace_loglik(theta_from(x, active));
        best_ll = std::max(best_ll, ll);
        res.best_trace.push_back(best_ll);
        return -ll;
    };

    bool nm_converged = true;
    for (int pass = 0; pass < static_cast<int>(nfac) + 1; ++pass) {
        std::vector<std::size_t> active;
        for (std::size_t f = 0; f < nfac; ++f)
            if (!pinned[f]) active.push_back(f);
        if (active.empty()) break;

        std::vector<double> x0(active.size());
        for (std::size_t i = 0; i < active.size(); ++i)
            x0[i] = std::log(std::max(theta[active[i]], 1e-8));

        auto f = [&](const std::vector<double>& x) { return objective(x, active); };
        const int budget = opt.max_evals_per_dim * static_cast<int>(active.size());

        NmOutcome run = nelder_mead(f, x0, opt.simplex_step, opt.diameter_tol,
                                    opt.loglik_tol, budget);
        // One restart from a perturbed simplex around the incumbent.
        NmOutcome re = nelder_mead(f, run.x, 0.1, opt.diameter_tol, opt.loglik_tol, budget);
        if (re.f < run.f) run = re;
        nm_converged = run.converged || re.converged;

        if (opt.polish) {
            // Per-coordinate quadratic refinement; keeps the result stable
            // against rounding-order effects in the objective.
            for (double h : {1e-3, 1e-4}) {
                for (std::size_t i = 0; i < run.x.size(); ++i) {
                    std::vector<double> xp = run.x, xm = run.x;
                    xp[i] += h;
                    xm[i] -= h;
                    const double fp = f(xp), fm = f(xm);
                    const double curv = fp - 2.0 * run.f + fm;
                    if (fp < run.f && fp <= fm) {
                        run.x = xp;
                        run.f = fp;
                        continue;
                    }
                    if (fm < run.f) {
                        run.x = xm;
                        run.f = fm;
                        continue;
                    }
                    if (curv <= 0.0) continue;
                    double delta = -0.5 * h * (fp - fm) / curv;
                    delta = std::min(std::max(delta, -2.0 * h), 2.0 * h);
                    std::vector<double> xv = run.x;
                    xv[i] += delta;
                    const double fv = f(xv);
                    if (fv <= run.f) {
                        run.x = xv;
                        run.f = fv;
                    }
                }
            }
        }

        for (std::size_t i = 0; i < active.size(); ++i)
            theta[active[i]] = std::exp(std::min(run.x[i], 6.0));

        bool newly_pinned = false;
        for (std::size_t f2 = 0; f2 < nfac; ++f2) {
            if (!pinned[f2] && theta[f2] < opt.boundary_sd) {
                pinned[f2] = true;
                theta[f2] = 0.0;
                newly_pinned = true;
            }
        }
        if (!newly_pinned) break;
    }

    // Final evaluation at the chosen theta (exact zeros for pinned components).
    for (std::size_t f = 0; f < nfac; ++f)
        if (pinned[f]) theta[f] = 0.0;
    const double ll = laplace_loglik(theta);
    best_ll = std::max(best_ll, ll);
    res.best_trace.push_back(best_ll);

    const PirlsResult final_state = pirls(theta);
    const Eigen::MatrixXd cov = beta_covariance(theta);

    res.loglik = ll;
    res.theta = theta;
    res.converged = nm_converged && final_state.converged;
    res.n_outer_evals = evaluations();
    if (!res.converged) res.warnings.push_back("outer optimization did not fully converge");

    for (std::size_t j = 0; j < p; ++j) {
        Coefficient c;
        c.name = d.coef_names[j];
        c.estimate = final_state.beta[static_cast<Eigen::Index>(j)];
        const double var = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        c.se = var > 0.0 ? std::sqrt(var) : 0.0;
        c.z = c.se > 0.0 ? c.estimate / c.se : 0.0;
        c.p = c.se > 0.0 ? stats::two_sided_p(c.z) : 1.0;
        const auto orr = stats::odds_ratio(c.estimate, c.se, opt.ci_level);
        c.odds = orr.or_value;
        c.ci_lo = orr.lo;
        c.ci_hi = orr.hi;
        res.coefficients.push_back(c);
        if (std::fabs(c.estimate) > 15.0)
            res.warnings.push_back("possible separation: |" + c.name + "| > 15");
    }

    for (std::size_t f = 0; f < nfac; ++f) {
        VarianceComponent vc;
        vc.factor = d.factors[f].name;
        vc.sd = theta[f];
        vc.variance = theta[f] * theta[f];
        vc.n_levels = d.factors[f].levels.size();
        vc.boundary = pinned[f];
        res.variance_components.push_back(vc);
        if (vc.boundary)
            res.warnings.push_back("variance component at boundary (0): " + vc.factor);
    }

    res.aic = -2.0 * res.loglik + 2.0 * (static_cast<double>(p) + static_cast<double>(nfac));
    return res;
}

FitResult fit(const DataTable& data, const ModelSpec& spec, const FitOptions& opt) {
    Fitter f(build_design(data, spec));
    return f.fit(opt);
}

}  // namespace labelmeas::glmm
