#pragma once

#include <string>

#include "labelmeas/table.hpp"

namespace labelmeas::ndjson {

/// Parses newline-delimited JSON (one object per line) into a table.
/// Column types come from the first non-null value seen; numbers and booleans
/// are numeric, strings are strings. Nulls and absent keys are missing cells.
/// Malformed lines raise data_error with the 1-based line number.
DataTable read_file(const std::string& path);
DataTable read_string(const std::string& text, const std::string& origin = "<string>");

/// Writes one object per row, keys in column order, missing cells omitted.
/// Integral numerics serialize as integers. Output is byte-deterministic.
void write_file(const DataTable& t, const std::string& path);
std::string to_string(const DataTable& t);

}  // namespace labelmeas::ndjson
