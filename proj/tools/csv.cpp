#include "csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rpsd/error.hpp"

namespace rpsd::bench {
namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfiguration("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidConfiguration("failed writing " + path.string());
}

}  // namespace

std::string format_run_csv(const RunMetrics& metrics, double f_star) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}\r\n", kRunHeader);
  for (const IterationRecord& r : metrics.records)
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{}\r\n", r.iter, r.objective, r.objective - f_star,
                   r.pattern_size, r.selection_size, r.subspaces_explored, r.cycle, r.adapted ? 1 : 0);
  return fmt::to_string(buf);
}

void write_run_csv(const std::filesystem::path& path, const RunMetrics& metrics, double f_star) {
  write_text(path, format_run_csv(metrics, f_star));
}

std::string format_median_csv(const std::vector<const RunMetrics*>& runs, double f_star) {
  std::size_t length = 0;
  for (const RunMetrics* r : runs) length = std::max(length, r->records.size());
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}\r\n", kMedianHeader);
  std::vector<double> sub, pattern, explored;
  for (std::size_t k = 0; k < length; ++k) {
    sub.clear();
    pattern.clear();
    explored.clear();
    for (const RunMetrics* r : runs) {
      const IterationRecord& rec = r->records[std::min(k, r->records.size() - 1)];
      sub.push_back(rec.objective - f_star);
      pattern.push_back(static_cast<double>(rec.pattern_size));
      explored.push_back(static_cast<double>(rec.subspaces_explored));
    }
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{}\r\n", k, median_of(sub), median_of(pattern),
                   median_of(explored), runs.size());
  }
  return fmt::to_string(buf);
}

void write_median_csv(const std::filesystem::path& path, const std::vector<const RunMetrics*>& runs, double f_star) {
  write_text(path, format_median_csv(runs, f_star));
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) throw DataError("empty CSV");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw DataError("CSV row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                      " fields, expected " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_csv(ss.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace rpsd::bench
