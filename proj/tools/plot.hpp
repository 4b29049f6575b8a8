#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rpsd::bench {

enum class Criterion { SuboptIters, PatternIters, SuboptExplored };

/// "subopt-iters", "pattern-iters" or "subopt-explored"; throws InvalidConfiguration otherwise.
Criterion parse_criterion(const std::string& name);

struct Series {
  std::string label;  // file stem
  std::string group;  // label without the "_seed<N>" suffix
  std::vector<double> x, y;
};

/// Reads run CSVs (directories contribute their *_seed*.csv files). All files
/// must share the run schema, and subspaces_explored must be the running sum
/// of selection_size. Throws InvalidConfiguration for no input and DataError
/// for schema or invariant violations.
std::vector<Series> load_series(const std::vector<std::filesystem::path>& inputs, Criterion criterion);

/// Log-scale y for suboptimality criteria; one polyline per series plus a
/// bold per-group median when `median` is set.
std::string render_svg(const std::vector<Series>& series, Criterion criterion, bool median);

void plot(const std::vector<std::filesystem::path>& inputs, Criterion criterion, const std::filesystem::path& out,
          bool median);

}  // namespace rpsd::bench
