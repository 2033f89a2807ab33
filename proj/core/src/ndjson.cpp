#include "labelmeas/ndjson.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "labelmeas/errors.hpp"

namespace labelmeas::ndjson {

namespace {

DataTable parse_lines(std::istream& in, const std::string& origin) {
    DataTable t;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::pair<std::size_t, nlohmann::json>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw data_error(origin + ":" + std::to_string(line_no) +
                             ": invalid JSON: " + e.what());
        }
        if (!obj.is_object())
            throw data_error(origin + ":" + std::to_string(line_no) +
                             ": expected a JSON object per line");
        rows.emplace_back(line_no, std::move(obj));
    }

    for (const auto& [ln, obj] : rows) {
        const std::size_t r = t.add_row();
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            const auto& v = it.value();
            if (v.is_null()) continue;
            ColumnType want;
            if (v.is_number() || v.is_boolean()) want = ColumnType::Num;
            else if (v.is_string()) want = ColumnType::Str;
            else
                throw data_error(origin + ":" + std::to_string(ln) + ": field '" +
                                 it.key() + "' must be a scalar");
            if (!t.has_column(it.key())) t.add_column(it.key(), want);
            const Column& c = t.col(it.key());
            if (c.type != want)
                throw data_error(origin + ":" + std::to_string(ln) + ": field '" +
                                 it.key() + "' changes type mid-file");
            if (want == ColumnType::Num)
                t.set_num(r, it.key(), v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0)
                                                      : v.get<double>());
            else
                t.set_str(r, it.key(), v.get<std::string>());
        }
    }
    return t;
}

}  // namespace

DataTable read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file: " + path);
    return parse_lines(in, path);
}

DataTable read_string(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    return parse_lines(in, origin);
}

std::string to_string(const DataTable& t) {
    std::string out;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (const auto& c : t.columns()) {
            if (c.missing[r]) continue;
            if (c.type == ColumnType::Str) {
                obj[c.name] = c.str[r];
            } else {
                const double v = c.num[r];
                if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15)
                    obj[c.name] = static_cast<long long>(v);
                else
                    obj[c.name] = v;
            }
        }
        out += obj.dump();
        out += '\n';
    }
    return out;
}

void write_file(const DataTable& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << to_string(t);
    if (!out) throw data_error("write failed: " + path);
}

}  // namespace labelmeas::ndjson
