#pragma once

#include <vector>

#include <Eigen/Dense>

#include "labelmeas/design.hpp"

namespace labelmeas::glmm {

/// Gauss-Hermite rule for weight exp(-t^2) (physicists' convention),
/// nodes ascending. Nodes come from Golub-Welsch; weights from a scaled
/// Christoffel sum, so log-weights stay accurate at any order.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);
void gauss_hermite_log(int n, std::vector<double>& nodes, std::vector<double>& log_weights);

/// Marginal log-likelihood at (beta, theta) by numerical integration with a
/// fixed node count: adaptive Gauss-Hermite per group for a single factor,
/// an adaptive tensor-product grid for small crossed designs (total random
/// dimension <= 6).
double quadrature_loglik(const DesignMatrices& dm, const std::vector<double>& theta,
                         const Eigen::VectorXd& beta, int nodes);

struct QuadratureResult {
    double loglik = 0.0;
    int nodes = 0;  // node count at which successive refinements agreed
};

/// Refining wrapper: doubles the node count until two successive evaluations
/// agree to `tol`, starting from `start_nodes`. Throws numeric_error if the
/// design is out of scope (crossed with q > 6) or refinement never stabilizes.
QuadratureResult quadrature_oracle(const DesignMatrices& dm,
                                   const std::vector<double>& theta,
                                   const Eigen::VectorXd& beta,
                                   int start_nodes = 8, double tol = 1e-6);

}  // namespace labelmeas::glmm
