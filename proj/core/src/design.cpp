#include "labelmeas/design.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "labelmeas/errors.hpp"

namespace labelmeas::glmm {

void ModelSpec::validate() const {
    if (outcome.empty()) throw config_error("model spec: outcome column is required");
    for (const auto& f : fixed)
        if (f == outcome) throw config_error("model spec: outcome cannot be a fixed effect");
    for (std::size_t i = 0; i < random_factors.size(); ++i)
        for (std::size_t j = i + 1; j < random_factors.size(); ++j)
            if (random_factors[i] == random_factors[j])
                throw config_error("model spec: duplicate random factor: " + random_factors[i]);
    for (const auto& s : standardize)
        if (std::find(fixed.begin(), fixed.end(), s) == fixed.end())
            throw config_error("model spec: standardize lists non-fixed column: " + s);
}

std::size_t DesignMatrices::q() const {
    std::size_t q = 0;
    for (const auto& f : factors) q += f.levels.size();
    return q;
}

Eigen::SparseMatrix<double> DesignMatrices::z_matrix() const {
    const std::size_t nr = n();
    Eigen::SparseMatrix<double> Z(static_cast<Eigen::Index>(nr),
                                  static_cast<Eigen::Index>(q()));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(nr * factors.size());
    std::size_t offset = 0;
    for (std::size_t f = 0; f < factors.size(); ++f) {
        for (std::size_t r = 0; r < nr; ++r)
            trips.emplace_back(static_cast<int>(r),
                               static_cast<int>(offset + z_level[f][r]), 1.0);
        offset += factors[f].levels.size();
    }
    Z.setFromTriplets(trips.begin(), trips.end());
    return Z;
}

DesignMatrices build_design(const DataTable& data, const ModelSpec& spec) {
    spec.validate();
    if (data.n_rows() == 0) throw data_error("build_design: dataset is empty");

    std::vector<std::string> modeled;
    modeled.push_back(spec.outcome);
    modeled.insert(modeled.end(), spec.fixed.begin(), spec.fixed.end());
    modeled.insert(modeled.end(), spec.random_factors.begin(), spec.random_factors.end());
    for (const auto& c : modeled)
        if (!data.has_column(c)) throw config_error("build_design: no such column: " + c);

    // Retain rows complete in every modeled column.
    std::vector<std::size_t> rows;
    rows.reserve(data.n_rows());
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        bool ok = true;
        for (const auto& c : modeled)
            if (data.is_missing(r, c)) { ok = false; break; }
        if (ok) rows.push_back(r);
    }

    DesignMatrices dm;
    dm.link = spec.link;
    dm.n_dropped_missing = data.n_rows() - rows.size();
    const std::size_t n = rows.size();
    if (n == 0) throw data_error("build_design: no complete rows for the modeled columns");

    // Outcome: strictly binary.
    dm.y.resize(static_cast<Eigen::Index>(n));
    {
        const Column& yc = data.col(spec.outcome);
        if (yc.type != ColumnType::Num)
            throw data_error("build_design: outcome column must be numeric 0/1: " + spec.outcome);
        bool any0 = false, any1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = yc.num[rows[i]];
            if (v != 0.0 && v != 1.0)
                throw data_error("build_design: outcome has a non-binary value in column " +
                                 spec.outcome);
            dm.y[static_cast<Eigen::Index>(i)] = v;
            (v == 1.0 ? any1 : any0) = true;
        }
        if (!any0 || !any1)
            throw data_error("build_design: outcome is constant; nothing to model");
    }

    // Fixed effects with implicit intercept.
    const std::size_t p = 1 + spec.fixed.size();
    dm.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    dm.X.col(0).setOnes();
    dm.coef_names.push_back("(Intercept)");
    for (std::size_t j = 0; j < spec.fixed.size(); ++j) {
        const Column& c = data.col(spec.fixed[j]);
        if (c.type != ColumnType::Num)
            throw data_error("build_design: fixed-effect column must be numeric: " + spec.fixed[j]);
        for (std::size_t i = 0; i < n; ++i)
            dm.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) =
                c.num[rows[i]];
        dm.coef_names.push_back(spec.fixed[j]);
    }
    for (const auto& s : spec.standardize) {
        const std::size_t j =
            1 + static_cast<std::size_t>(
                    std::find(spec.fixed.begin(), spec.fixed.end(), s) - spec.fixed.begin());
        auto colv = dm.X.col(static_cast<Eigen::Index>(j));
        const double m = colv.mean();
        const double sd = n > 1 ? std::sqrt((colv.array() - m).square().sum() /
                                            static_cast<double>(n - 1))
                                : 0.0;
        if (!(sd > 0.0))
            throw data_error("build_design: cannot standardize constant column: " + s);
        colv = (colv.array() - m) / sd;
        dm.standardized.push_back({s, m, sd});
    }

    // Random factors: level ids in first-appearance order.
    for (const auto& fname : spec.random_factors) {
        const Column& c = data.col(fname);
        FactorInfo info;
        info.name = fname;
        std::unordered_map<std::string, std::int32_t> seen;
        std::vector<std::int32_t> lev(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::string key = data.cell_as_string(rows[i], c);
            auto [it, inserted] = seen.emplace(key, static_cast<std::int32_t>(info.levels.size()));
            if (inserted) info.levels.push_back(key);
            lev[i] = it->second;
        }
        if (info.levels.size() < 2)
            throw config_error("build_design: random factor '" + fname +
                               "' has fewer than 2 levels");
        dm.factors.push_back(std::move(info));
        dm.z_level.push_back(std::move(lev));
    }

    return dm;
}

}  // namespace labelmeas::glmm
