#include "powerprint/transform2d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace powerprint {

std::vector<double> normalize(const std::vector<double>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("cannot normalize an empty signal");
  }
  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *min_it;
  const double hi = *max_it;
  std::vector<double> out(samples.size());
  if (hi == lo) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  const double span = hi - lo;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out[i] = (samples[i] - lo) / span;
  }
  return out;
}

std::vector<double> normalize(const PowerSignal& signal) {
  return normalize(signal.samples);
}

PowerMatrix reshape_to_matrix(const std::vector<double>& normalized,
                              ShapePolicy policy) {
  const std::size_t n = normalized.size();
  int rows = 0;
  int cols = 0;
  if (policy.fixed_rows > 0) {
    rows = policy.fixed_rows;
    cols = static_cast<int>((n + rows - 1) / rows);
  } else {
    cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    rows = cols > 0 ? static_cast<int>((n + cols - 1) / cols) : 0;
  }
  if (rows < 3 || cols < 3) {
    throw std::invalid_argument(
        "signature too short to reshape: needs a 3x3 matrix, got " +
        std::to_string(rows) + "x" + std::to_string(cols) + " from " +
        std::to_string(n) + " samples");
  }
  const std::size_t cells = static_cast<std::size_t>(rows) * cols;
  const int pad = static_cast<int>(cells - n);
  if (pad >= cols) {
    // Only possible with a fixed-rows policy that leaves whole rows of
    // padding; the near-square rule guarantees pad < cols.
    throw std::invalid_argument("rows policy " + std::to_string(rows) +
                                " incompatible with length " + std::to_string(n) +
                                ": padding would fill a whole row");
  }
  PowerMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.pad_count = pad;
  m.values.resize(cells);
  std::copy(normalized.begin(), normalized.end(), m.values.begin());
  std::fill(m.values.begin() + n, m.values.end(), normalized.back());
  return m;
}

}  // namespace powerprint
