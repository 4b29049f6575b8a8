#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "rpsd/error.hpp"
#include "rpsd/model.hpp"

namespace rpsd {
namespace {

std::string read_gzip(const std::filesystem::path& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw DataError("cannot open " + path.string());
  std::string content;
  char buffer[1 << 16];
  int got = 0;
  while ((got = gzread(file, buffer, sizeof buffer)) > 0) content.append(buffer, static_cast<std::size_t>(got));
  const bool failed = got < 0;
  gzclose(file);
  if (failed) throw DataError("corrupt gzip stream in " + path.string());
  return content;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::string_view next_token(std::string_view& line) {
  const auto begin = line.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) {
    line = {};
    return {};
  }
  line.remove_prefix(begin);
  const auto end = line.find_first_of(" \t\r");
  const std::string_view token = line.substr(0, end);
  line.remove_prefix(end == std::string_view::npos ? line.size() : end);
  return token;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> dimension) {
  Dataset data;
  CsrMatrix& a = data.features;
  std::size_t max_index = 0;
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::pair<std::int32_t, double>> row;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::string_view token = next_token(line);
    if (token.empty()) continue;

    double label = 0.0;
    if (!parse_number(token, label)) throw ParseError("bad label '" + std::string(token) + "'", line_no);
    if (label == 1.0) {
      data.labels.push_back(1.0);
    } else if (label == 0.0 || label == -1.0) {
      data.labels.push_back(-1.0);
    } else {
      throw ParseError("label must be one of -1, 0, +1 (got '" + std::string(token) + "')", line_no);
    }

    row.clear();
    while (!(token = next_token(line)).empty()) {
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) throw ParseError("expected idx:val, got '" + std::string(token) + "'", line_no);
      long long index = 0;
      double value = 0.0;
      if (!parse_number(token.substr(0, colon), index) || index < 1 || index > INT32_MAX)
        throw ParseError("bad feature index in '" + std::string(token) + "'", line_no);
      if (!parse_number(token.substr(colon + 1), value) || !std::isfinite(value))
        throw ParseError("bad feature value in '" + std::string(token) + "'", line_no);
      row.emplace_back(static_cast<std::int32_t>(index - 1), value);
      max_index = std::max(max_index, static_cast<std::size_t>(index));
    }
    std::sort(row.begin(), row.end());
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j].first == row[j - 1].first)
        throw ParseError("duplicate feature index " + std::to_string(row[j].first + 1), line_no);
    for (const auto& [index, value] : row) {
      a.col.push_back(index);
      a.val.push_back(value);
    }
    a.row_ptr.push_back(a.val.size());
  }
  if (data.labels.empty()) throw DataError("no samples in LibSVM input");
  a.rows = data.labels.size();
  if (dimension) {
    if (*dimension < max_index)
      throw DataError("feature index " + std::to_string(max_index) + " exceeds the declared dimension " +
                      std::to_string(*dimension));
    a.cols = *dimension;
  } else {
    a.cols = max_index;
  }
  return data;
}

Dataset parse_libsvm(const std::filesystem::path& path, std::optional<std::size_t> dimension) {
  if (!std::filesystem::exists(path)) throw DataError("dataset not found: " + path.string());
  if (path.extension() == ".gz") {
    std::istringstream in(read_gzip(path));
    return parse_libsvm(in, dimension);
  }
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_libsvm(in, dimension);
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  const CsrMatrix& a = data.features;
  char buffer[64];
  for (std::size_t i = 0; i < a.rows; ++i) {
    out << (data.labels[i] > 0 ? "+1" : "-1");
    for (std::size_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j) {
      const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, a.val[j]);
      out << ' ' << (a.col[j] + 1) << ':' << std::string_view(buffer, static_cast<std::size_t>(end - buffer));
    }
    out << '\n';
  }
}

}  // namespace rpsd
