#include "rpsd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rpsd/error.hpp"

namespace rpsd {
namespace {

Vector planted_model(const SyntheticSpec& spec, Rng& rng) {
  const std::size_t n = spec.dimension;
  Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
  std::normal_distribution<double> gauss;
  std::vector<std::size_t> order(spec.shape == PlantedShape::Sparse ? n : n - 1);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(spec.planted);
  std::sort(order.begin(), order.end());

  if (spec.shape == PlantedShape::Sparse) {
    for (std::size_t i : order) {
      const double g = gauss(rng);
      x[static_cast<Eigen::Index>(i)] = std::copysign(1.0 + std::abs(g), g);
    }
    return x;
  }
  // Piecewise constant: a jump of magnitude >= 1 after each chosen position.
  double level = gauss(rng);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    x[static_cast<Eigen::Index>(i)] = level;
    if (next < order.size() && order[next] == i) {
      const double g = gauss(rng);
      level += std::copysign(1.0 + std::abs(g), g);
      ++next;
    }
  }
  return x;
}

}  // namespace

SyntheticInstance make_synthetic(const SyntheticSpec& spec) {
  const std::size_t m = spec.samples;
  const std::size_t n = spec.dimension;
  if (m == 0 || n == 0) throw InvalidConfiguration("synthetic instance needs samples > 0 and dimension > 0");
  if (spec.shape == PlantedShape::Sparse && spec.planted > n)
    throw InvalidConfiguration("planted support larger than the dimension");
  if (spec.shape == PlantedShape::PiecewiseConstant && (n < 2 || spec.planted > n - 1))
    throw InvalidConfiguration("planted jump count must be below the dimension");
  if (spec.one_hot_groups > n) throw InvalidConfiguration("more one-hot groups than features");

  Rng rng(spec.seed);
  SyntheticInstance out;
  out.planted = planted_model(spec, rng);

  CsrMatrix& a = out.data.features;
  a.rows = m;
  a.cols = n;
  std::normal_distribution<double> gauss;
  std::vector<std::size_t> group_start;
  if (spec.one_hot_groups > 0)
    for (std::size_t g = 0; g <= spec.one_hot_groups; ++g) group_start.push_back(g * n / spec.one_hot_groups);

  std::vector<double> row(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    if (group_start.empty()) {
      for (double& v : row) v = gauss(rng);
    } else {
      for (std::size_t g = 0; g + 1 < group_start.size(); ++g) {
        std::uniform_int_distribution<std::size_t> pick(group_start[g], group_start[g + 1] - 1);
        row[pick(rng)] = 1.0;
      }
    }
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    double margin = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] == 0.0) continue;
      const double v = row[j] / norm;
      a.col.push_back(static_cast<std::int32_t>(j));
      a.val.push_back(v);
      margin += v * out.planted[static_cast<Eigen::Index>(j)];
    }
    a.row_ptr.push_back(a.val.size());
    const double noisy = margin + spec.noise * gauss(rng);
    out.data.labels.push_back(spec.classification ? (noisy >= 0.0 ? 1.0 : -1.0) : noisy);
  }
  return out;
}

}  // namespace rpsd
