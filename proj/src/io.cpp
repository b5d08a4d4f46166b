#include "jive/io.hpp"

#include "jive/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace jive {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string location(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (quoted) throw InputError("unterminated quote in CSV line");
  fields.emplace_back(trim(current));
  return fields;
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InputError(std::string(what) + ": cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

DataBlock read_block_csv(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> case_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    case_ids = split_csv_line(line);
    break;
  }
  if (case_ids.size() < 2) throw InputError(path.string() + ": missing header row of case ids");
  case_ids.erase(case_ids.begin());
  const std::size_t n = case_ids.size();

  std::vector<std::string> features;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const std::string_view view = line;
    const std::size_t comma = view.find(',');
    if (comma == std::string_view::npos) {
      throw InputError(location(path, line_no) + ": expected " + std::to_string(n) + " values");
    }
    if (view.front() == '"') {
      // Quoted feature names may contain commas; take the slow path.
      std::vector<std::string> fields = split_csv_line(view);
      if (fields.size() != n + 1) {
        throw InputError(location(path, line_no) + ": expected " + std::to_string(n) +
                         " values, found " + std::to_string(fields.size() - 1));
      }
      features.push_back(fields.front());
      for (std::size_t j = 1; j < fields.size(); ++j) {
        values.push_back(parse_double(fields[j], location(path, line_no)));
      }
      continue;
    }
    features.emplace_back(trim(view.substr(0, comma)));
    std::size_t count = 0;
    std::size_t pos = comma + 1;
    for (;;) {
      const std::size_t next = view.find(',', pos);
      const std::string_view cell =
          view.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
      values.push_back(parse_double(cell, location(path, line_no)));
      ++count;
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    if (count != n) {
      throw InputError(location(path, line_no) + ": expected " + std::to_string(n) +
                       " values, found " + std::to_string(count));
    }
  }
  if (features.empty()) throw InputError(path.string() + ": no feature rows");

  Matrix m(static_cast<Index>(features.size()), static_cast<Index>(n));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = values[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
    }
  }
  return DataBlock(std::move(name), std::move(m), std::move(features), std::move(case_ids));
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& values,
                      const std::vector<std::string>& row_names,
                      const std::vector<std::string>& col_names, const std::string& comment) {
  if (static_cast<Index>(row_names.size()) != values.rows() ||
      static_cast<Index>(col_names.size()) != values.cols()) {
    throw InputError("write_matrix_csv: label counts do not match the matrix shape");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "feature";
  for (const auto& c : col_names) out << ',' << quote_if_needed(c);
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    out << quote_if_needed(row_names[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < values.cols(); ++j) out << ',' << format_double(values(i, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path.string());
}

std::vector<std::pair<std::string, std::string>> read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_csv_line(line);
    if (first) {
      first = false;
      if (!fields.empty() && (fields[0] == "case" || fields[0] == "case_id")) continue;
    }
    if (fields.size() != 2) throw InputError(location(path, line_no) + ": expected case_id,label");
    rows.emplace_back(fields[0], fields[1]);
  }
  if (rows.empty()) throw InputError(path.string() + ": no labels");
  return rows;
}

std::vector<std::string> align_labels(const std::vector<std::pair<std::string, std::string>>& rows,
                                      const std::vector<std::string>& case_ids) {
  std::map<std::string, std::string> by_case;
  for (const auto& [id, label] : rows) {
    if (!by_case.emplace(id, label).second) throw InputError("case '" + id + "' labeled twice");
  }
  if (by_case.size() != case_ids.size()) {
    throw InputError(std::to_string(by_case.size()) + " labeled cases but the matrix has " +
                     std::to_string(case_ids.size()));
  }
  std::vector<std::string> out;
  out.reserve(case_ids.size());
  for (const auto& id : case_ids) {
    const auto it = by_case.find(id);
    if (it == by_case.end()) throw InputError("case '" + id + "' has no label");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace jive
