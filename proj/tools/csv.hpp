#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rpsd/solver.hpp"

namespace rpsd::bench {

inline constexpr const char* kRunHeader =
    "iter,objective,suboptimality,pattern_size,selection_size,subspaces_explored,cycle,adaptation_flag";
inline constexpr const char* kMedianHeader = "iter,suboptimality,pattern_size,subspaces_explored,runs";

/// One row per recorded iterate; doubles in shortest round-trip form.
std::string format_run_csv(const RunMetrics& metrics, double f_star);
void write_run_csv(const std::filesystem::path& path, const RunMetrics& metrics, double f_star);

/// Per-iteration medians across runs. Runs that stopped early keep their last row.
std::string format_median_csv(const std::vector<const RunMetrics*>& runs, double f_star);
void write_median_csv(const std::filesystem::path& path, const std::vector<const RunMetrics*>& runs, double f_star);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws DataError when missing.
  std::size_t column(const std::string& name) const;
};

/// RFC 4180 reader (quoted fields, doubled quotes, CRLF). Throws DataError.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

}  // namespace rpsd::bench
