#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace rpsd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Random engine used everywhere a seed is accepted.
using Rng = std::mt19937_64;

}  // namespace rpsd

#include <span>

namespace rpsd {

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<double> as_span(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace rpsd
