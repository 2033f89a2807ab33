#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace labelmeas {

enum class ColumnType { Num, Str };

/// A single named column. Numeric cells live in `num`, string cells in `str`;
/// the unused buffer stays empty. `missing[r]` marks nulls.
struct Column {
    std::string name;
    ColumnType type = ColumnType::Num;
    std::vector<double> num;
    std::vector<std::string> str;
    std::vector<std::uint8_t> missing;
};

/// Column-oriented table with stable column order. Row count is uniform
/// across columns; cells default to missing.
class DataTable {
  public:
    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return cols_.size(); }

    Column& add_column(const std::string& name, ColumnType type);
    bool has_column(const std::string& name) const;
    const Column& col(const std::string& name) const;  // throws data_error if absent
    Column& col(const std::string& name);
    const std::vector<Column>& columns() const { return cols_; }

    /// Appends one blank (all-missing) row and returns its index.
    std::size_t add_row();

    void set_num(std::size_t row, const std::string& name, double v);
    void set_str(std::size_t row, const std::string& name, const std::string& v);

    bool is_missing(std::size_t row, const std::string& name) const;
    double get_num(std::size_t row, const std::string& name) const;
    const std::string& get_str(std::size_t row, const std::string& name) const;

    /// Cell rendered as text (factor level label); numbers print integrally
    /// when integral.
    std::string cell_as_string(std::size_t row, const Column& c) const;

    /// New table with rows permuted by `order` (order must be a permutation).
    DataTable select_rows(const std::vector<std::size_t>& order) const;

    /// Stable lexicographic sort by the named columns; returns the sorted copy.
    DataTable sorted_by(const std::vector<std::string>& keys) const;

    /// Left join: brings every column of `right` (except the key) onto rows
    /// whose key matches; non-matching rows get missing cells. Duplicate keys
    /// in `right` are an error.
    DataTable left_join(const DataTable& right, const std::string& key) const;

  private:
    std::vector<Column> cols_;
    std::size_t n_rows_ = 0;

    const Column* find(const std::string& name) const;
};

}  // namespace labelmeas
