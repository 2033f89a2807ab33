#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "labelmeas/model.hpp"
#include "labelmeas/table.hpp"

namespace labelmeas::glmm {

/// Declarative description of one binomial mixed model: binary outcome,
/// fixed-effect columns (an intercept is always implicit), and one variance
/// component per random grouping factor (random intercepts only).
struct ModelSpec {
    std::string outcome;
    std::vector<std::string> fixed;
    std::vector<std::string> random_factors;
    LinkKind link = LinkKind::Logit;
    std::vector<std::string> standardize;  // continuous fixed columns to z-score

    void validate() const;  // structural checks independent of any dataset
};

struct FactorInfo {
    std::string name;
    std::vector<std::string> levels;  // first-appearance order
};

struct Standardization {
    std::string column;
    double mean = 0.0;
    double sd = 1.0;
};

/// Assembled regression inputs. The indicator matrix Z is stored compressed:
/// `z_level[f][r]` is the level index of row r in factor f (exactly one
/// implicit 1 per row per factor block).
struct DesignMatrices {
    Eigen::VectorXd y;                 // n, strictly 0/1
    Eigen::MatrixXd X;                 // n x p, column 0 = intercept
    std::vector<std::string> coef_names;
    std::vector<FactorInfo> factors;   // declared order
    std::vector<std::vector<std::int32_t>> z_level;
    LinkKind link = LinkKind::Logit;
    std::vector<Standardization> standardized;
    std::size_t n_dropped_missing = 0;

    std::size_t n() const { return static_cast<std::size_t>(y.size()); }
    std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
    std::size_t q() const;  // sum of factor level counts

    /// Explicit sparse indicator matrix (n x q), factor blocks in declared
    /// order. Built on demand; used by oracles and tests.
    Eigen::SparseMatrix<double> z_matrix() const;
};

/// Builds design matrices from a table. Rows with a missing value in any
/// modeled column are dropped and counted. Standardized columns are z-scored
/// with the sample mean/SD (divisor n-1) of the retained rows. Factor levels
/// are assigned in first-appearance order.
DesignMatrices build_design(const DataTable& data, const ModelSpec& spec);

}  // namespace labelmeas::glmm
