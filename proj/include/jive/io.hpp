#pragma once

#include "jive/ajive.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace jive {

/// Reads a matrix CSV: the first row holds case ids (its first cell is a corner
/// label and is ignored), each later row is a feature name followed by values.
/// Lines starting with '#' and blank lines are skipped. Values are parsed with
/// the C locale rules, so "1e-3" and "-0.5" are accepted and "1,5" is not.
DataBlock read_block_csv(const std::filesystem::path& path, std::string name);

/// Writes a matrix CSV in the layout read_block_csv expects. A non-empty
/// `comment` becomes a leading '#' line.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& values,
                      const std::vector<std::string>& row_names,
                      const std::vector<std::string>& col_names, const std::string& comment = {});

/// Two-column label file, "case_id,label" per line, with an optional header
/// row whose first cell is "case" or "case_id".
std::vector<std::pair<std::string, std::string>> read_labels_csv(const std::filesystem::path& path);

/// Labels ordered by `case_ids`. Every case must be labeled exactly once.
std::vector<std::string> align_labels(const std::vector<std::pair<std::string, std::string>>& rows,
                                      const std::vector<std::string>& case_ids);

/// Shortest text that parses back to the same double ("inf", "-inf", "nan"
/// for the special values).
std::string format_double(double value);

/// Strict full-field parse; throws InputError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

/// Splits one CSV line on commas. Double-quoted fields may contain commas and
/// "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace jive
