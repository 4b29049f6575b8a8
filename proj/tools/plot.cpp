#include "plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "csv.hpp"
#include "rpsd/error.hpp"

namespace rpsd::bench {
namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 80, kRight = 170, kTop = 30, kBottom = 60;
constexpr double kLogFloor = 1e-16;
constexpr std::size_t kMaxPoints = 4000;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

double parse_number(const std::string& s, const std::filesystem::path& file) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(file.string() + ": bad number '" + s + "'");
  }
}

std::string group_of(const std::string& stem) {
  const auto pos = stem.rfind("_seed");
  return pos == std::string::npos ? stem : stem.substr(0, pos);
}

bool is_log(Criterion c) { return c != Criterion::PatternIters; }

const char* x_title(Criterion c) {
  return c == Criterion::SuboptExplored ? "subspaces explored" : "iterations";
}
const char* y_title(Criterion c) { return c == Criterion::PatternIters ? "pattern size" : "F(x) - F*"; }

Series median_series(const std::vector<const Series*>& members) {
  Series m;
  m.group = members.front()->group;
  m.label = m.group + " (median)";
  std::size_t length = 0;
  for (const Series* s : members) length = std::max(length, s->x.size());
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < length; ++k) {
    xs.clear();
    ys.clear();
    for (const Series* s : members) {
      const std::size_t i = std::min(k, s->x.size() - 1);
      xs.push_back(s->x[i]);
      ys.push_back(s->y[i]);
    }
    const auto mid = [](std::vector<double>& v) {
      std::sort(v.begin(), v.end());
      const std::size_t n = v.size();
      return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    m.x.push_back(mid(xs));
    m.y.push_back(mid(ys));
  }
  return m;
}

}  // namespace

Criterion parse_criterion(const std::string& name) {
  if (name == "subopt-iters") return Criterion::SuboptIters;
  if (name == "pattern-iters") return Criterion::PatternIters;
  if (name == "subopt-explored") return Criterion::SuboptExplored;
  throw InvalidConfiguration("unknown criterion '" + name + "'");
}

std::vector<Series> load_series(const std::vector<std::filesystem::path>& inputs, Criterion criterion) {
  std::vector<std::filesystem::path> files;
  for (const auto& in : inputs) {
    if (std::filesystem::is_directory(in)) {
      std::vector<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::directory_iterator(in))
        if (entry.path().extension() == ".csv" && entry.path().stem().string().find("_seed") != std::string::npos)
          found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  if (files.empty()) throw InvalidConfiguration("no run CSVs to plot");

  std::vector<Series> out;
  std::vector<std::string> schema;
  for (const auto& file : files) {
    const CsvTable table = read_csv(file);
    if (schema.empty()) {
      schema = table.header;
    } else if (table.header != schema) {
      throw DataError(file.string() + ": schema differs from " + files.front().string());
    }
    if (table.rows.empty()) throw DataError(file.string() + ": no rows");
    const std::size_t c_iter = table.column("iter"), c_sub = table.column("suboptimality"),
                      c_pattern = table.column("pattern_size"), c_sel = table.column("selection_size"),
                      c_expl = table.column("subspaces_explored");
    Series s;
    s.label = file.stem().string();
    s.group = group_of(s.label);
    double running = 0.0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      running += parse_number(row[c_sel], file);
      const double explored = parse_number(row[c_expl], file);
      if (explored != running)
        throw DataError(fmt::format("{}: row {} has subspaces_explored {} but the running sum of selection_size is {}",
                                    file.string(), r + 1, explored, running));
      const double iter = parse_number(row[c_iter], file);
      switch (criterion) {
        case Criterion::SuboptIters:
          s.x.push_back(iter);
          s.y.push_back(parse_number(row[c_sub], file));
          break;
        case Criterion::PatternIters:
          s.x.push_back(iter);
          s.y.push_back(parse_number(row[c_pattern], file));
          break;
        case Criterion::SuboptExplored:
          s.x.push_back(explored);
          s.y.push_back(parse_number(row[c_sub], file));
          break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_svg(const std::vector<Series>& series, Criterion criterion, bool median) {
  if (series.empty()) throw InvalidConfiguration("nothing to plot");
  std::map<std::string, std::vector<const Series*>> groups;
  std::vector<std::string> order;
  for (const Series& s : series) {
    if (!groups.count(s.group)) order.push_back(s.group);
    groups[s.group].push_back(&s);
  }
  std::vector<Series> medians;
  if (median)
    for (const auto& g : order) medians.push_back(median_series(groups[g]));

  const bool log_y = is_log(criterion);
  const auto ty = [&](double v) { return log_y ? std::log10(std::max(v, kLogFloor)) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (log_y) {
    y0 = std::floor(y0);
    y1 = std::ceil(y1);
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return kTop + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };
  const auto py_raw = [&](double t) { return kTop + (1.0 - (t - y0) / (y1 - y0)) * ph; };

  fmt::memory_buffer svg;
  auto out = std::back_inserter(svg);
  fmt::format_to(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
                 "font-family=\"sans-serif\" font-size=\"12\">\n",
                 kWidth, kHeight);
  fmt::format_to(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::format_to(out, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                 kTop, pw, ph);

  for (int t = 0; t <= 5; ++t) {
    const double x = x0 + (x1 - x0) * t / 5.0;
    fmt::format_to(out, "<line x1=\"{0:.2f}\" x2=\"{0:.2f}\" y1=\"{1}\" y2=\"{2}\" stroke=\"black\"/>\n", px(x),
                   kTop + ph, kTop + ph + 5);
    fmt::format_to(out, "<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.6g}</text>\n", px(x), kTop + ph + 20, x);
  }
  if (log_y) {
    const int step = std::max(1, static_cast<int>(std::ceil((y1 - y0) / 10.0)));
    for (int d = static_cast<int>(y0); d <= static_cast<int>(y1); d += step) {
      fmt::format_to(out, "<line x1=\"{}\" x2=\"{}\" y1=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#dddddd\"/>\n", kLeft,
                     kLeft + pw, py_raw(d), py_raw(d));
      fmt::format_to(out, "<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">1e{}</text>\n", kLeft - 6, py_raw(d) + 4, d);
    }
  } else {
    for (int t = 0; t <= 5; ++t) {
      const double y = y0 + (y1 - y0) * t / 5.0;
      fmt::format_to(out, "<line x1=\"{}\" x2=\"{}\" y1=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#dddddd\"/>\n", kLeft,
                     kLeft + pw, py_raw(y), py_raw(y));
      fmt::format_to(out, "<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.4g}</text>\n", kLeft - 6, py_raw(y) + 4, y);
    }
  }
  fmt::format_to(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, kHeight - 15,
                 x_title(criterion));
  fmt::format_to(out, "<text transform=\"translate(20 {}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n",
                 kTop + ph / 2, y_title(criterion));

  const auto polyline = [&](const Series& s, const char* color, double width, double opacity) {
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / kMaxPoints);
    fmt::format_to(out, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-opacity=\"{}\" points=\"",
                   color, width, opacity);
    for (std::size_t i = 0; i < s.x.size(); i += stride) fmt::format_to(out, "{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
    if ((s.x.size() - 1) % stride != 0) fmt::format_to(out, "{:.2f},{:.2f}", px(s.x.back()), py(s.y.back()));
    fmt::format_to(out, "\"><title>{}</title></polyline>\n", s.label);
  };
  for (std::size_t g = 0; g < order.size(); ++g) {
    const char* color = kPalette[g % std::size(kPalette)];
    for (const Series* s : groups[order[g]]) polyline(*s, color, 1.0, median ? 0.35 : 0.9);
    if (median) polyline(medians[g], color, 3.0, 1.0);
    const double ly = kTop + 10 + 18.0 * static_cast<double>(g);
    fmt::format_to(out, "<line x1=\"{0}\" x2=\"{1}\" y1=\"{2}\" y2=\"{2}\" stroke=\"{3}\" stroke-width=\"3\"/>\n",
                   kLeft + pw + 10, kLeft + pw + 30, ly, color);
    fmt::format_to(out, "<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + pw + 35, ly + 4, order[g]);
  }
  fmt::format_to(out, "</svg>\n");
  return fmt::to_string(svg);
}

void plot(const std::vector<std::filesystem::path>& inputs, Criterion criterion, const std::filesystem::path& out,
          bool median) {
  const std::string svg = render_svg(load_series(inputs, criterion), criterion, median);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw InvalidConfiguration("cannot write " + out.string());
  file << svg;
}

}  // namespace rpsd::bench
