#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "labelmeas/design.hpp"
#include "labelmeas/table.hpp"

namespace labelmeas::glmm {

struct PirlsOptions {
    int max_iters = 80;
    double rel_tol = 1e-10;  // relative penalized-deviance change
};

/// Warm-start capsule: fixed effects and spherical random effects (solver order).
struct PirlsState {
    Eigen::VectorXd beta;
    Eigen::VectorXd u;
};

struct PirlsResult {
    Eigen::VectorXd beta;  // p
    Eigen::VectorXd u;     // q, spherical scale, solver order
    Eigen::VectorXd w;     // n, working weights at the modes
    double pdev = 0.0;         // deviance + ||u||^2
    double cond_loglik = 0.0;  // Bernoulli log-likelihood at the modes
    double logdet = 0.0;       // log det(I + Lambda' Z' W Z Lambda)
    bool converged = false;
    int n_iters = 0;
    /// Conditional modes b = theta_f * u per factor, declared order.
    std::vector<std::vector<double>> modes;
};

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    double z = 0.0;
    double p = 1.0;
    double odds = 1.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct VarianceComponent {
    std::string factor;
    double variance = 0.0;
    double sd = 0.0;
    std::size_t n_levels = 0;
    bool boundary = false;  // pinned to exactly zero after the boundary check
};

struct FitResult {
    std::vector<Coefficient> coefficients;
    std::vector<VarianceComponent> variance_components;  // declared order
    double loglik = 0.0;  // Laplace-approximated marginal log-likelihood
    double aic = 0.0;     // -2*loglik + 2*(p + #variance components)
    std::size_t n_obs = 0;
    bool converged = false;
    int n_outer_evals = 0;
    std::vector<double> theta;  // final SDs, declared order
    std::vector<std::string> warnings;
    double ci_level = 0.95;
    std::vector<double> best_trace;  // best loglik after each outer evaluation
};

struct FitOptions {
    double ci_level = 0.95;
    double theta_init = 1.0;     // starting SD per component
    double boundary_sd = 1e-3;   // below this a component is pinned to zero
    double simplex_step = 0.5;   // initial simplex edge on the log-SD scale
    double diameter_tol = 1e-4;
    double loglik_tol = 1e-6;
    int max_evals_per_dim = 400;
    bool polish = true;  // per-coordinate quadratic refinement after the search
};

/// Fits one model repeatedly over candidate variance parameters. Holds the
/// sparse normal-equation pattern, its symbolic factorization, and a warm
/// start, so successive evaluations at nearby theta are cheap.
class Fitter {
  public:
    explicit Fitter(DesignMatrices dm);
    ~Fitter();
    Fitter(Fitter&&) noexcept;
    Fitter& operator=(Fitter&&) noexcept;

    const DesignMatrices& dm() const;

    /// Penalized IRLS at fixed theta (SD per declared factor): jointly finds
    /// the fixed effects and the conditional modes. theta entries must be >= 0;
    /// a zero entry forces that factor's effects to exactly zero.
    PirlsResult pirls(const std::vector<double>& theta,
                      const PirlsState* warm = nullptr, PirlsOptions opt = {});

    /// Laplace-approximated marginal log-likelihood at theta (profiles the
    /// fixed effects through pirls).
    double laplace_loglik(const std::vector<double>& theta);

    /// deviance(y, eta) + ||u||^2 at an arbitrary state; used by gradient checks.
    double penalized_deviance(const std::vector<double>& theta,
                              const Eigen::VectorXd& beta,
                              const Eigen::VectorXd& u) const;

    /// Wald covariance of the fixed effects at theta (inverse fixed block of
    /// the final weighted information matrix).
    Eigen::MatrixXd beta_covariance(const std::vector<double>& theta);

    /// Maximizes laplace_loglik over theta (log-SD Nelder-Mead with one
    /// restart and an exact-zero boundary pass), then summarizes.
    FitResult fit(const FitOptions& opt = {});

    int evaluations() const;  // laplace evaluations so far

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-call conveniences matching the operation surface.
PirlsResult pirls(const DesignMatrices& dm, const std::vector<double>& theta,
                  const PirlsState* warm = nullptr, PirlsOptions opt = {});
double laplace_loglik(const DesignMatrices& dm, const std::vector<double>& theta);
FitResult fit(const DataTable& data, const ModelSpec& spec, const FitOptions& opt = {});

}  // namespace labelmeas::glmm
