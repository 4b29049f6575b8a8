#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rpsd/model.hpp"
#include "rpsd/types.hpp"

namespace rpsd {

/// Shape of the planted model x° behind a synthetic instance.
enum class PlantedShape {
  Sparse,             // `planted` nonzero coordinates, the rest exactly 0
  PiecewiseConstant,  // `planted` jumps, constant in between
};

struct SyntheticSpec {
  std::size_t samples = 100;
  std::size_t dimension = 30;
  std::size_t planted = 3;
  PlantedShape shape = PlantedShape::Sparse;
  double noise = 0.0;
  /// true: b = sign(A x° + noise); false: b = A x° + noise.
  bool classification = true;
  /// If nonzero, each row has one 1 in each of this many contiguous feature
  /// groups (LibSVM-style binary data) before row scaling.
  std::size_t one_hot_groups = 0;
  std::uint64_t seed = 1;
};

struct SyntheticInstance {
  Dataset data;
  Vector planted;
};

/// Rows of A have unit Euclidean norm. Gaussian entries unless one-hot.
SyntheticInstance make_synthetic(const SyntheticSpec& spec);

}  // namespace rpsd
