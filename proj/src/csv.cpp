#include "jcindex/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include "jcindex/error.hpp"

namespace jcindex {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::string(trim(cur)));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::string(trim(cur)));
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_missing(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Dataset read_csv(std::istream& in, const ValidateOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "missing CSV header");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto header = split_fields(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "time" || header[2] != "event") {
    throw Error(ErrorCode::ParseError, "CSV header must start with id,time,event");
  }
  std::vector<std::string> names(header.begin() + 3, header.end());

  std::vector<RawRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < 3) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has fewer than 3 fields");
    }
    RawRecord row;
    row.id = fields[0];
    if (!parse_double(fields[1], row.time)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad time '" + fields[1] + "'");
    }
    {
      const auto& f = fields[2];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row.event);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad event code '" + f + "'");
      }
    }
    for (std::size_t j = 3; j < fields.size(); ++j) {
      if (is_missing(fields[j])) {
        row.covariates.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      if (!parse_double(fields[j], v)) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad covariate value '" + fields[j] + "'");
      }
      row.covariates.emplace_back(v);
    }
    rows.push_back(std::move(row));
  }
  return validate_dataset(rows, std::move(names), options);
}

Dataset read_csv_file(const std::string& path, const ValidateOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_csv(in, options);
}

void write_csv(std::ostream& out, const Dataset& ds) {
  out << "id,time,event";
  for (const auto& name : ds.covariate_names()) out << ',' << name;
  out << '\n';
  for (const auto& r : ds.records()) {
    out << r.id << ',' << format_double(r.time) << ',' << r.event;
    for (double v : r.covariates) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_csv(out, ds);
}

}  // namespace jcindex
