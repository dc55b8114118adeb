#pragma once

#include <cstddef>
#include <vector>

#include "powerprint/signal_io.hpp"

namespace powerprint {

enum class EdgeKind { On, Off };

struct EdgeEvent {
  std::size_t index = 0;     // first sample at the new power level
  double delta_watts = 0.0;  // signed level change; |delta| >= threshold
  EdgeKind kind = EdgeKind::On;
};

struct Segment {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::vector<double> samples;  // aggregate minus pre-event baseline, >= 0
};

// Moving-median smooth, first difference, threshold. Runs of consecutive
// same-sign super-threshold diffs merge into one event placed at the
// largest |diff|; delta is the run's total change.
std::vector<EdgeEvent> detect_edges(const PowerSignal& aggregate,
                                    double threshold_watts,
                                    int smooth_window = 3);

// Pairs each ON with the next OFF (or the signal end), subtracts the
// median of the 5 samples before the ON, clamps at zero, and drops
// segments shorter than 9 samples.
std::vector<Segment> segment_between(const PowerSignal& aggregate,
                                     const std::vector<EdgeEvent>& events);

}  // namespace powerprint
