#pragma once

#include <cstddef>
#include <vector>

#include "powerprint/signal_io.hpp"

namespace powerprint {

// Row-major 2D reshaping of a normalized signature. The tail is padded by
// repeating the final sample; pad_count < cols always holds, so reading
// row-major and dropping pad_count entries recovers the input exactly.
struct PowerMatrix {
  int rows = 0;
  int cols = 0;
  int pad_count = 0;
  std::vector<double> values;  // rows*cols entries in [0,1], row-major

  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
};

struct ShapePolicy {
  // 0: near-square (cols = ceil(sqrt(n)), rows = ceil(n/cols)).
  // >0: fixed row count, cols = ceil(n/rows).
  int fixed_rows = 0;

  static ShapePolicy square() { return {}; }
  static ShapePolicy rows(int r) { return {r}; }
};

// Min-max scaling to [0,1]; a constant signal maps to all zeros.
std::vector<double> normalize(const std::vector<double>& samples);
std::vector<double> normalize(const PowerSignal& signal);

// Requires enough samples for a 3x3 interior patch after reshaping.
PowerMatrix reshape_to_matrix(const std::vector<double>& normalized,
                              ShapePolicy policy = {});

}  // namespace powerprint
