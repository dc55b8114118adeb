#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "powerprint/signal_io.hpp"
#include "powerprint/transform2d.hpp"

namespace powerprint {

// Six local texture descriptors over the 2D signature matrix. All of them
// scan every interior 3x3 neighborhood with stride 1, turn it into an
// integer code, and histogram the codes into a fixed-length normalized
// bin vector that acts as the appliance fingerprint.
enum class DescriptorKind { Lph, Lbp, Ldp, Ltep, Ltrp, Bsif };

inline constexpr std::array<DescriptorKind, 6> kAllDescriptorKinds = {
    DescriptorKind::Lph,  DescriptorKind::Lbp,  DescriptorKind::Ldp,
    DescriptorKind::Ltep, DescriptorKind::Ltrp, DescriptorKind::Bsif};

// 256 / 256 / 56 / 512 / 256 / 256
int histogram_length(DescriptorKind kind);
const char* kind_name(DescriptorKind kind);
// Throws std::invalid_argument listing the six valid names.
DescriptorKind parse_kind(const std::string& name);

struct DescriptorSpec {
  DescriptorKind kind = DescriptorKind::Lph;
  double ltep_threshold = 0.02;  // in normalized [0,1] units
  std::uint64_t bsif_seed = 7;
};

// A 3x3 neighborhood. Neighbors are enumerated clockwise starting at the
// top-left corner; neighbor n carries bit weight 2^n.
struct Patch3 {
  std::array<double, 9> values{};  // row-major

  double center() const { return values[4]; }
  double neighbor(int n) const;
};

// Integer codes for the interior of a PowerMatrix: (rows-2) x (cols-2).
struct CodeMatrix {
  int rows = 0;
  int cols = 0;
  int code_range = 0;
  std::vector<std::int32_t> codes;

  std::int32_t at(int r, int c) const {
    return codes[static_cast<std::size_t>(r) * cols + c];
  }
};

struct DescriptorHistogram {
  DescriptorKind kind = DescriptorKind::Lph;
  std::vector<double> bins;  // each in [0,1], summing to 1
};

// ---------------------------------------------------------------------------
// Filter banks

// Eight 3x3 compass masks, 45-degree rotations of one base mask; each
// sums to zero. Mask i's response marks an edge in orientation i.
const std::array<std::array<int, 9>, 8>& kirsch_masks();

// Eight 3x3 real filters, zero-mean and mutually orthonormal when
// flattened; generated deterministically from the seed.
struct BsifBank {
  std::uint64_t seed = 0;
  std::array<std::array<double, 9>, 8> filters{};
};

BsifBank generate_bsif_bank(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Per-patch codes

// Sign encoding of neighbor-minus-center differences, zero counted as
// positive; bit n set when neighbor n >= center.
int lph_code(const Patch3& patch);

// Strict comparison variant: bit n set when neighbor n > center.
int lbp_code(const Patch3& patch);

// Kirsch bitmask with the three strongest |response| orientations set
// (ties broken toward the lower orientation index); popcount is always 3.
int ldp_code(const Patch3& patch);

// Ternary split: (upper << 8) | lower, where the upper byte marks
// neighbors above center + thr and the lower byte those below center - thr.
int ltep_code(const Patch3& patch, double threshold);

// Bit n set when the >=-center signs of neighbors n and n+1 (mod 8) differ.
int ltrp_code(const Patch3& patch);

// Bit f set when the mean-centered patch responds positively to filter f.
int bsif_code(const Patch3& patch, const BsifBank& bank);

// ---------------------------------------------------------------------------
// Whole-matrix extraction (hot path; matrix must be at least 3x3)

CodeMatrix lph_code_matrix(const PowerMatrix& m);
CodeMatrix lbp_code_matrix(const PowerMatrix& m);
CodeMatrix ldp_code_matrix(const PowerMatrix& m);
CodeMatrix ltep_code_matrix(const PowerMatrix& m, double threshold);
CodeMatrix ltrp_code_matrix(const PowerMatrix& m);
CodeMatrix bsif_code_matrix(const PowerMatrix& m, const BsifBank& bank);

// Dispatch on spec.kind; the BSIF bank is generated from spec.bsif_seed.
CodeMatrix code_matrix(const PowerMatrix& m, const DescriptorSpec& spec);

DescriptorHistogram lph_histogram(const PowerMatrix& m);
DescriptorHistogram lbp_histogram(const PowerMatrix& m);
DescriptorHistogram ldp_histogram(const PowerMatrix& m);
DescriptorHistogram ltep_histogram(const PowerMatrix& m, double threshold);
DescriptorHistogram ltrp_histogram(const PowerMatrix& m);
DescriptorHistogram bsif_histogram(const PowerMatrix& m, const BsifBank& bank);

// Maps an LDP bitmask (popcount 3) to its dense bin in [0,56): the index
// of the mask among all 3-bit-set bytes in increasing numeric order.
int ldp_dense_bin(int bitmask);

// normalize -> reshape (square policy) -> kind-specific histogram.
// Requires signal length >= 9.
DescriptorHistogram extract(const DescriptorSpec& spec, const PowerSignal& signal);

// Order-stable batch extraction; the BSIF bank is generated once.
std::vector<DescriptorHistogram> extract_all(const DescriptorSpec& spec,
                                             const Dataset& dataset,
                                             int threads = 1);

}  // namespace powerprint
