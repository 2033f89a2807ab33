#include "labelmeas/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "labelmeas/errors.hpp"

namespace labelmeas {

const Column* DataTable::find(const std::string& name) const {
    for (const auto& c : cols_)
        if (c.name == name) return &c;
    return nullptr;
}

Column& DataTable::add_column(const std::string& name, ColumnType type) {
    if (find(name)) throw data_error("duplicate column: " + name);
    Column c;
    c.name = name;
    c.type = type;
    c.missing.assign(n_rows_, 1);
    if (type == ColumnType::Num) c.num.assign(n_rows_, 0.0);
    else c.str.assign(n_rows_, {});
    cols_.push_back(std::move(c));
    return cols_.back();
}

bool DataTable::has_column(const std::string& name) const { return find(name) != nullptr; }

const Column& DataTable::col(const std::string& name) const {
    const Column* c = find(name);
    if (!c) throw data_error("no such column: " + name);
    return *c;
}

Column& DataTable::col(const std::string& name) {
    return const_cast<Column&>(static_cast<const DataTable*>(this)->col(name));
}

std::size_t DataTable::add_row() {
    for (auto& c : cols_) {
        c.missing.push_back(1);
        if (c.type == ColumnType::Num) c.num.push_back(0.0);
        else c.str.emplace_back();
    }
    return n_rows_++;
}

void DataTable::set_num(std::size_t row, const std::string& name, double v) {
    Column& c = col(name);
    if (c.type != ColumnType::Num) throw data_error("column is not numeric: " + name);
    c.num.at(row) = v;
    c.missing.at(row) = 0;
}

void DataTable::set_str(std::size_t row, const std::string& name, const std::string& v) {
    Column& c = col(name);
    if (c.type != ColumnType::Str) throw data_error("column is not string: " + name);
    c.str.at(row) = v;
    c.missing.at(row) = 0;
}

bool DataTable::is_missing(std::size_t row, const std::string& name) const {
    return col(name).missing.at(row) != 0;
}

double DataTable::get_num(std::size_t row, const std::string& name) const {
    const Column& c = col(name);
    if (c.type != ColumnType::Num) throw data_error("column is not numeric: " + name);
    return c.num.at(row);
}

const std::string& DataTable::get_str(std::size_t row, const std::string& name) const {
    const Column& c = col(name);
    if (c.type != ColumnType::Str) throw data_error("column is not string: " + name);
    return c.str.at(row);
}

std::string DataTable::cell_as_string(std::size_t row, const Column& c) const {
    if (c.missing.at(row)) return {};
    if (c.type == ColumnType::Str) return c.str[row];
    const double v = c.num[row];
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

DataTable DataTable::select_rows(const std::vector<std::size_t>& order) const {
    DataTable out;
    for (const auto& c : cols_) out.add_column(c.name, c.type);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t r = order[k];
        out.add_row();
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            const Column& src = cols_[j];
            Column& dst = out.cols_[j];
            dst.missing[k] = src.missing.at(r);
            if (src.type == ColumnType::Num) dst.num[k] = src.num[r];
            else dst.str[k] = src.str[r];
        }
    }
    return out;
}

DataTable DataTable::sorted_by(const std::vector<std::string>& keys) const {
    std::vector<const Column*> kc;
    for (const auto& k : keys) kc.push_back(&col(k));
    std::vector<std::size_t> order(n_rows_);
    for (std::size_t i = 0; i < n_rows_; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (const Column* c : kc) {
            const bool ma = c->missing[a], mb = c->missing[b];
            if (ma != mb) return mb;  // missing sorts last
            if (ma) continue;
            if (c->type == ColumnType::Num) {
                if (c->num[a] != c->num[b]) return c->num[a] < c->num[b];
            } else {
                if (c->str[a] != c->str[b]) return c->str[a] < c->str[b];
            }
        }
        return false;
    });
    return select_rows(order);
}

DataTable DataTable::left_join(const DataTable& right, const std::string& key) const {
    const Column& rk = right.col(key);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < right.n_rows(); ++r) {
        const std::string k = right.cell_as_string(r, rk);
        if (right.is_missing(r, key)) throw data_error("join key missing in right table");
        if (!index.emplace(k, r).second)
            throw data_error("duplicate join key in right table: " + k);
    }

    DataTable out = select_rows([&] {
        std::vector<std::size_t> all(n_rows_);
        for (std::size_t i = 0; i < n_rows_; ++i) all[i] = i;
        return all;
    }());

    const Column& lk = col(key);
    for (const auto& rc : right.columns()) {
        if (rc.name == key) continue;
        Column& dst = out.add_column(rc.name, rc.type);
        for (std::size_t r = 0; r < n_rows_; ++r) {
            if (lk.missing[r]) continue;
            auto it = index.find(cell_as_string(r, lk));
            if (it == index.end()) continue;
            const std::size_t rr = it->second;
            if (rc.missing[rr]) continue;
            dst.missing[r] = 0;
            if (rc.type == ColumnType::Num) dst.num[r] = rc.num[rr];
            else dst.str[r] = rc.str[rr];
        }
    }
    return out;
}

}  // namespace labelmeas
