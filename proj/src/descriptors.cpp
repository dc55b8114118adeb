#include "powerprint/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "powerprint/parallel.hpp"
#include "powerprint/rng.hpp"

namespace powerprint {

int histogram_length(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::Lph: return 256;
    case DescriptorKind::Lbp: return 256;
    case DescriptorKind::Ldp: return 56;
    case DescriptorKind::Ltep: return 512;
    case DescriptorKind::Ltrp: return 256;
    case DescriptorKind::Bsif: return 256;
  }
  return 0;
}

const char* kind_name(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::Lph: return "lph";
    case DescriptorKind::Lbp: return "lbp";
    case DescriptorKind::Ldp: return "ldp";
    case DescriptorKind::Ltep: return "ltep";
    case DescriptorKind::Ltrp: return "ltrp";
    case DescriptorKind::Bsif: return "bsif";
  }
  return "?";
}

DescriptorKind parse_kind(const std::string& name) {
  for (DescriptorKind k : kAllDescriptorKinds) {
    if (name == kind_name(k)) return k;
  }
  throw std::invalid_argument("unknown descriptor '" + name +
                              "' (expected lph, lbp, ldp, ltep, ltrp or bsif)");
}

// Clockwise from the top-left corner, as row-major patch indices.
static constexpr int kNeighborIndex[8] = {0, 1, 2, 5, 8, 7, 6, 3};

double Patch3::neighbor(int n) const { return values[kNeighborIndex[n]]; }

// ---------------------------------------------------------------------------
// Filter banks

const std::array<std::array<int, 9>, 8>& kirsch_masks() {
  // Compass masks: the edge of three 5s rotates 45 degrees per step.
  static const std::array<std::array<int, 9>, 8> kMasks = {{
      {-3, -3, 5, -3, 0, 5, -3, -3, 5},     // E
      {-3, 5, 5, -3, 0, 5, -3, -3, -3},     // NE
      {5, 5, 5, -3, 0, -3, -3, -3, -3},     // N
      {5, 5, -3, 5, 0, -3, -3, -3, -3},     // NW
      {5, -3, -3, 5, 0, -3, 5, -3, -3},     // W
      {-3, -3, -3, 5, 0, -3, 5, 5, -3},     // SW
      {-3, -3, -3, -3, 0, -3, 5, 5, 5},     // S
      {-3, -3, -3, -3, 0, 5, -3, 5, 5},     // SE
  }};
  return kMasks;
}

BsifBank generate_bsif_bank(std::uint64_t seed) {
  constexpr int kMaxAttempts = 16;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(child_seed(seed, 0xB51FULL, static_cast<std::uint64_t>(attempt)));
    std::array<std::array<double, 9>, 8> filters{};
    for (auto& f : filters) {
      double mean = 0.0;
      for (double& v : f) {
        v = rng.gaussian();
        mean += v;
      }
      mean /= 9.0;
      for (double& v : f) v -= mean;
    }
    // Gram-Schmidt in index order; centered vectors stay centered.
    bool degenerate = false;
    for (int i = 0; i < 8 && !degenerate; ++i) {
      auto& fi = filters[i];
      for (int j = 0; j < i; ++j) {
        const auto& fj = filters[j];
        double dot = 0.0;
        for (int t = 0; t < 9; ++t) dot += fi[t] * fj[t];
        for (int t = 0; t < 9; ++t) fi[t] -= dot * fj[t];
      }
      double norm2 = 0.0;
      for (double v : fi) norm2 += v * v;
      if (norm2 < 1e-12) {
        degenerate = true;
        break;
      }
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& v : fi) v *= inv;
    }
    if (!degenerate) {
      BsifBank bank;
      bank.seed = seed;
      bank.filters = filters;
      return bank;
    }
  }
  throw std::runtime_error("BSIF bank generation failed: degenerate draws");
}

// ---------------------------------------------------------------------------
// Per-patch codes

int lph_code(const Patch3& patch) {
  const double c = patch.center();
  int code = 0;
  for (int n = 0; n < 8; ++n) {
    code |= (patch.neighbor(n) - c >= 0.0 ? 1 : 0) << n;
  }
  return code;
}

int lbp_code(const Patch3& patch) {
  const double c = patch.center();
  int code = 0;
  for (int n = 0; n < 8; ++n) {
    code |= (patch.neighbor(n) > c ? 1 : 0) << n;
  }
  return code;
}

namespace {

// Full 3x3 correlation against all eight masks, then a bitmask of the
// three strongest |response| orientations (earlier orientation wins ties).
inline int ldp_encode(const double* p) {
  const auto& masks = kirsch_masks();
  int best_idx[3] = {-1, -1, -1};
  double best_val[3] = {-1.0, -1.0, -1.0};
  for (int o = 0; o < 8; ++o) {
    const auto& m = masks[o];
    double r = 0.0;
    for (int t = 0; t < 9; ++t) r += m[t] * p[t];
    const double a = std::fabs(r);
    if (a > best_val[0]) {
      best_val[2] = best_val[1]; best_idx[2] = best_idx[1];
      best_val[1] = best_val[0]; best_idx[1] = best_idx[0];
      best_val[0] = a; best_idx[0] = o;
    } else if (a > best_val[1]) {
      best_val[2] = best_val[1]; best_idx[2] = best_idx[1];
      best_val[1] = a; best_idx[1] = o;
    } else if (a > best_val[2]) {
      best_val[2] = a; best_idx[2] = o;
    }
  }
  return (1 << best_idx[0]) | (1 << best_idx[1]) | (1 << best_idx[2]);
}

inline int bsif_encode(const double* p, const BsifBank& bank) {
  double mean = 0.0;
  for (int t = 0; t < 9; ++t) mean += p[t];
  mean /= 9.0;
  double centered[9];
  for (int t = 0; t < 9; ++t) centered[t] = p[t] - mean;
  int code = 0;
  for (int f = 0; f < 8; ++f) {
    const auto& w = bank.filters[f];
    double r = 0.0;
    for (int t = 0; t < 9; ++t) r += w[t] * centered[t];
    code |= (r > 0.0 ? 1 : 0) << f;
  }
  return code;
}

inline int ltrp_from_signs(int s) {
  // bit n of s^u compares s_n with s_{(n+1) mod 8}
  const int u = (s >> 1) | ((s & 1) << 7);
  return s ^ u;
}

inline void check_matrix(const PowerMatrix& m) {
  if (m.rows < 3 || m.cols < 3) {
    throw std::invalid_argument("matrix must be at least 3x3, got " +
                                std::to_string(m.rows) + "x" + std::to_string(m.cols));
  }
}

CodeMatrix blank_codes(const PowerMatrix& m, int code_range) {
  CodeMatrix cm;
  cm.rows = m.rows - 2;
  cm.cols = m.cols - 2;
  cm.code_range = code_range;
  cm.codes.resize(static_cast<std::size_t>(cm.rows) * cm.cols);
  return cm;
}

}  // namespace

int ldp_code(const Patch3& patch) { return ldp_encode(patch.values.data()); }

int ltep_code(const Patch3& patch, double threshold) {
  if (threshold < 0.0) {
    throw std::invalid_argument("LTeP threshold must be >= 0");
  }
  const double c = patch.center();
  int upper = 0;
  int lower = 0;
  for (int n = 0; n < 8; ++n) {
    const double u = patch.neighbor(n) - c;
    if (u > threshold) {
      upper |= 1 << n;
    } else if (u < -threshold) {
      lower |= 1 << n;
    }
  }
  return (upper << 8) | lower;
}

int ltrp_code(const Patch3& patch) {
  const double c = patch.center();
  int s = 0;
  for (int n = 0; n < 8; ++n) {
    s |= (patch.neighbor(n) >= c ? 1 : 0) << n;
  }
  return ltrp_from_signs(s);
}

int bsif_code(const Patch3& patch, const BsifBank& bank) {
  return bsif_encode(patch.values.data(), bank);
}

// ---------------------------------------------------------------------------
// Whole-matrix extraction

CodeMatrix lph_code_matrix(const PowerMatrix& m) {
  check_matrix(m);
  CodeMatrix cm = blank_codes(m, 256);
  const double* v = m.values.data();
  const int cols = m.cols;
  std::int32_t* out = cm.codes.data();
  for (int r = 1; r + 1 < m.rows; ++r) {
    const double* top = v + static_cast<std::size_t>(r - 1) * cols;
    const double* mid = top + cols;
    const double* bot = mid + cols;
    for (int j = 1; j + 1 < cols; ++j) {
      const double c = mid[j];
      int code = (top[j - 1] >= c ? 1 : 0);
      code |= (top[j] >= c ? 1 : 0) << 1;
      code |= (top[j + 1] >= c ? 1 : 0) << 2;
      code |= (mid[j + 1] >= c ? 1 : 0) << 3;
      code |= (bot[j + 1] >= c ? 1 : 0) << 4;
      code |= (bot[j] >= c ? 1 : 0) << 5;
      code |= (bot[j - 1] >= c ? 1 : 0) << 6;
      code |= (mid[j - 1] >= c ? 1 : 0) << 7;
      *out++ = code;
    }
  }
  return cm;
}

CodeMatrix lbp_code_matrix(const PowerMatrix& m) {
  check_matrix(m);
  CodeMatrix cm = blank_codes(m, 256);
  const double* v = m.values.data();
  const int cols = m.cols;
  std::int32_t* out = cm.codes.data();
  for (int r = 1; r + 1 < m.rows; ++r) {
    const double* top = v + static_cast<std::size_t>(r - 1) * cols;
    const double* mid = top + cols;
    const double* bot = mid + cols;
    for (int j = 1; j + 1 < cols; ++j) {
      const double c = mid[j];
      int code = (top[j - 1] > c ? 1 : 0);
      code |= (top[j] > c ? 1 : 0) << 1;
      code |= (top[j + 1] > c ? 1 : 0) << 2;
      code |= (mid[j + 1] > c ? 1 : 0) << 3;
      code |= (bot[j + 1] > c ? 1 : 0) << 4;
      code |= (bot[j] > c ? 1 : 0) << 5;
      code |= (bot[j - 1] > c ? 1 : 0) << 6;
      code |= (mid[j - 1] > c ? 1 : 0) << 7;
      *out++ = code;
    }
  }
  return cm;
}

CodeMatrix ltrp_code_matrix(const PowerMatrix& m) {
  check_matrix(m);
  CodeMatrix cm = blank_codes(m, 256);
  const double* v = m.values.data();
  const int cols = m.cols;
  std::int32_t* out = cm.codes.data();
  for (int r = 1; r + 1 < m.rows; ++r) {
    const double* top = v + static_cast<std::size_t>(r - 1) * cols;
    const double* mid = top + cols;
    const double* bot = mid + cols;
    for (int j = 1; j + 1 < cols; ++j) {
      const double c = mid[j];
      int s = (top[j - 1] >= c ? 1 : 0);
      s |= (top[j] >= c ? 1 : 0) << 1;
      s |= (top[j + 1] >= c ? 1 : 0) << 2;
      s |= (mid[j + 1] >= c ? 1 : 0) << 3;
      s |= (bot[j + 1] >= c ? 1 : 0) << 4;
      s |= (bot[j] >= c ? 1 : 0) << 5;
      s |= (bot[j - 1] >= c ? 1 : 0) << 6;
      s |= (mid[j - 1] >= c ? 1 : 0) << 7;
      *out++ = ltrp_from_signs(s);
    }
  }
  return cm;
}

CodeMatrix ltep_code_matrix(const PowerMatrix& m, double threshold) {
  check_matrix(m);
  if (threshold < 0.0) {
    throw std::invalid_argument("LTeP threshold must be >= 0");
  }
  CodeMatrix cm = blank_codes(m, 1 << 16);
  const double* v = m.values.data();
  const int cols = m.cols;
  std::int32_t* out = cm.codes.data();
  for (int r = 1; r + 1 < m.rows; ++r) {
    const double* top = v + static_cast<std::size_t>(r - 1) * cols;
    const double* mid = top + cols;
    const double* bot = mid + cols;
    for (int j = 1; j + 1 < cols; ++j) {
      const double c = mid[j];
      const double d[8] = {top[j - 1] - c, top[j] - c, top[j + 1] - c,
                           mid[j + 1] - c, bot[j + 1] - c, bot[j] - c,
                           bot[j - 1] - c, mid[j - 1] - c};
      int upper = 0;
      int lower = 0;
      for (int n = 0; n < 8; ++n) {
        upper |= (d[n] > threshold ? 1 : 0) << n;
        lower |= (d[n] < -threshold ? 1 : 0) << n;
      }
      *out++ = (upper << 8) | lower;
    }
  }
  return cm;
}

namespace {

template <typename Encode>
CodeMatrix gather_code_matrix(const PowerMatrix& m, int code_range, Encode&& encode) {
  check_matrix(m);
  CodeMatrix cm = blank_codes(m, code_range);
  const double* v = m.values.data();
  const int cols = m.cols;
  std::int32_t* out = cm.codes.data();
  for (int r = 1; r + 1 < m.rows; ++r) {
    const double* top = v + static_cast<std::size_t>(r - 1) * cols;
    const double* mid = top + cols;
    const double* bot = mid + cols;
    for (int j = 1; j + 1 < cols; ++j) {
      const double p[9] = {top[j - 1], top[j], top[j + 1], mid[j - 1], mid[j],
                           mid[j + 1], bot[j - 1], bot[j], bot[j + 1]};
      *out++ = encode(p);
    }
  }
  return cm;
}

}  // namespace

CodeMatrix ldp_code_matrix(const PowerMatrix& m) {
  return gather_code_matrix(m, 256, [](const double* p) { return ldp_encode(p); });
}

CodeMatrix bsif_code_matrix(const PowerMatrix& m, const BsifBank& bank) {
  return gather_code_matrix(m, 256,
                            [&bank](const double* p) { return bsif_encode(p, bank); });
}

CodeMatrix code_matrix(const PowerMatrix& m, const DescriptorSpec& spec) {
  switch (spec.kind) {
    case DescriptorKind::Lph: return lph_code_matrix(m);
    case DescriptorKind::Lbp: return lbp_code_matrix(m);
    case DescriptorKind::Ldp: return ldp_code_matrix(m);
    case DescriptorKind::Ltep: return ltep_code_matrix(m, spec.ltep_threshold);
    case DescriptorKind::Ltrp: return ltrp_code_matrix(m);
    case DescriptorKind::Bsif:
      return bsif_code_matrix(m, generate_bsif_bank(spec.bsif_seed));
  }
  throw std::invalid_argument("bad descriptor kind");
}

// ---------------------------------------------------------------------------
// Histograms

int ldp_dense_bin(int bitmask) {
  static const auto kTable = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    int bin = 0;
    for (int mask = 0; mask < 256; ++mask) {
      if (__builtin_popcount(static_cast<unsigned>(mask)) == 3) t[mask] = bin++;
    }
    return t;
  }();
  const int bin = kTable[bitmask & 0xFF];
  if (bin < 0) {
    throw std::invalid_argument("LDP bitmask must have exactly 3 set bits");
  }
  return bin;
}

namespace {

DescriptorHistogram normalized_histogram(DescriptorKind kind,
                                         const std::vector<std::int64_t>& counts,
                                         std::int64_t total) {
  DescriptorHistogram h;
  h.kind = kind;
  h.bins.resize(counts.size());
  const double inv = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    h.bins[i] = static_cast<double>(counts[i]) * inv;
  }
  return h;
}

DescriptorHistogram histogram_256(DescriptorKind kind, const CodeMatrix& cm) {
  std::vector<std::int64_t> counts(256, 0);
  for (std::int32_t code : cm.codes) ++counts[code];
  return normalized_histogram(kind, counts, static_cast<std::int64_t>(cm.codes.size()));
}

}  // namespace

DescriptorHistogram lph_histogram(const PowerMatrix& m) {
  return histogram_256(DescriptorKind::Lph, lph_code_matrix(m));
}

DescriptorHistogram lbp_histogram(const PowerMatrix& m) {
  return histogram_256(DescriptorKind::Lbp, lbp_code_matrix(m));
}

DescriptorHistogram ltrp_histogram(const PowerMatrix& m) {
  return histogram_256(DescriptorKind::Ltrp, ltrp_code_matrix(m));
}

DescriptorHistogram ldp_histogram(const PowerMatrix& m) {
  const CodeMatrix cm = ldp_code_matrix(m);
  std::vector<std::int64_t> counts(56, 0);
  for (std::int32_t code : cm.codes) ++counts[ldp_dense_bin(code)];
  return normalized_histogram(DescriptorKind::Ldp, counts,
                              static_cast<std::int64_t>(cm.codes.size()));
}

DescriptorHistogram ltep_histogram(const PowerMatrix& m, double threshold) {
  const CodeMatrix cm = ltep_code_matrix(m, threshold);
  std::vector<std::int64_t> counts(512, 0);
  for (std::int32_t code : cm.codes) {
    ++counts[(code >> 8) & 0xFF];        // upper pattern
    ++counts[256 + (code & 0xFF)];       // lower pattern
  }
  return normalized_histogram(DescriptorKind::Ltep, counts,
                              static_cast<std::int64_t>(2 * cm.codes.size()));
}

DescriptorHistogram bsif_histogram(const PowerMatrix& m, const BsifBank& bank) {
  return histogram_256(DescriptorKind::Bsif, bsif_code_matrix(m, bank));
}

namespace {

DescriptorHistogram histogram_for(const PowerMatrix& m, const DescriptorSpec& spec,
                                  const BsifBank* bank) {
  switch (spec.kind) {
    case DescriptorKind::Lph: return lph_histogram(m);
    case DescriptorKind::Lbp: return lbp_histogram(m);
    case DescriptorKind::Ldp: return ldp_histogram(m);
    case DescriptorKind::Ltep: return ltep_histogram(m, spec.ltep_threshold);
    case DescriptorKind::Ltrp: return ltrp_histogram(m);
    case DescriptorKind::Bsif: {
      if (bank) return bsif_histogram(m, *bank);
      return bsif_histogram(m, generate_bsif_bank(spec.bsif_seed));
    }
  }
  throw std::invalid_argument("bad descriptor kind");
}

}  // namespace

DescriptorHistogram extract(const DescriptorSpec& spec, const PowerSignal& signal) {
  if (signal.samples.size() < 9) {
    throw std::invalid_argument("signal '" + signal.source_id +
                                "' too short for extraction: need >= 9 samples, got " +
                                std::to_string(signal.samples.size()));
  }
  const PowerMatrix m = reshape_to_matrix(normalize(signal));
  return histogram_for(m, spec, nullptr);
}

std::vector<DescriptorHistogram> extract_all(const DescriptorSpec& spec,
                                             const Dataset& dataset, int threads) {
  BsifBank bank;
  const BsifBank* bank_ptr = nullptr;
  if (spec.kind == DescriptorKind::Bsif) {
    bank = generate_bsif_bank(spec.bsif_seed);
    bank_ptr = &bank;
  }
  std::vector<DescriptorHistogram> out(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    const PowerSignal& sig = dataset.signals[i];
    if (sig.samples.size() < 9) {
      throw std::invalid_argument("signal '" + sig.source_id +
                                  "' too short for extraction: need >= 9 samples");
    }
    const PowerMatrix m = reshape_to_matrix(normalize(sig));
    out[i] = histogram_for(m, spec, bank_ptr);
  });
  return out;
}

}  // namespace powerprint
