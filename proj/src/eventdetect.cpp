#include "powerprint/eventdetect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace powerprint {

namespace {

std::vector<double> median_smooth(const std::vector<double>& s, int window) {
  const std::size_t n = s.size();
  if (window <= 1) return s;
  const std::size_t h = static_cast<std::size_t>(window / 2);
  std::vector<double> out(n);
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(window));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= h ? i - h : 0;
    const std::size_t hi = std::min(n, i + h + 1);
    buf.assign(s.begin() + static_cast<std::ptrdiff_t>(lo),
               s.begin() + static_cast<std::ptrdiff_t>(hi));
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    if (buf.size() % 2 == 1) {
      out[i] = *mid;
    } else {
      const double upper = *mid;
      out[i] = (*std::max_element(buf.begin(), mid) + upper) / 2.0;
    }
  }
  return out;
}

double median_of(std::vector<double> buf) {
  auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
  std::nth_element(buf.begin(), mid, buf.end());
  if (buf.size() % 2 == 1) return *mid;
  return (*std::max_element(buf.begin(), mid) + *mid) / 2.0;
}

}  // namespace

std::vector<EdgeEvent> detect_edges(const PowerSignal& aggregate,
                                    double threshold_watts, int smooth_window) {
  if (!(threshold_watts > 0.0)) {
    throw std::invalid_argument("edge threshold must be > 0 watts");
  }
  if (smooth_window < 1 || smooth_window % 2 == 0) {
    throw std::invalid_argument("smooth window must be odd and >= 1");
  }
  const std::vector<double>& raw = aggregate.samples;
  if (raw.size() <= static_cast<std::size_t>(smooth_window)) {
    throw std::invalid_argument("signal must be longer than the smooth window");
  }
  std::vector<EdgeEvent> events;
  if (raw.size() < 2) return events;

  const std::vector<double> sm = median_smooth(raw, smooth_window);
  const std::size_t nd = sm.size() - 1;
  std::size_t i = 0;
  while (i < nd) {
    const double d0 = sm[i + 1] - sm[i];
    if (std::fabs(d0) < threshold_watts) {
      ++i;
      continue;
    }
    const bool rising = d0 > 0.0;
    double total = 0.0;
    double best = -1.0;
    std::size_t best_at = i;
    std::size_t j = i;
    while (j < nd) {
      const double d = sm[j + 1] - sm[j];
      if (std::fabs(d) < threshold_watts || (d > 0.0) != rising) break;
      total += d;
      if (std::fabs(d) > best) {
        best = std::fabs(d);
        best_at = j;
      }
      ++j;
    }
    EdgeEvent e;
    e.index = best_at + 1;
    e.delta_watts = total;
    e.kind = rising ? EdgeKind::On : EdgeKind::Off;
    events.push_back(e);
    i = j;
  }
  return events;
}

std::vector<Segment> segment_between(const PowerSignal& aggregate,
                                     const std::vector<EdgeEvent>& events) {
  const std::vector<double>& s = aggregate.samples;
  std::vector<Segment> out;
  for (std::size_t ei = 0; ei < events.size(); ++ei) {
    const EdgeEvent& on = events[ei];
    if (on.kind != EdgeKind::On) continue;
    std::size_t end = s.size();
    for (std::size_t fj = ei + 1; fj < events.size(); ++fj) {
      if (events[fj].kind == EdgeKind::Off && events[fj].index > on.index) {
        end = events[fj].index;
        break;
      }
    }
    if (end <= on.index || end - on.index < 9) continue;

    double baseline = 0.0;
    if (on.index > 0) {
      const std::size_t lo = on.index >= 5 ? on.index - 5 : 0;
      baseline = median_of(std::vector<double>(
          s.begin() + static_cast<std::ptrdiff_t>(lo),
          s.begin() + static_cast<std::ptrdiff_t>(on.index)));
    }
    Segment seg;
    seg.start = on.index;
    seg.end = end;
    seg.samples.reserve(end - on.index);
    for (std::size_t t = on.index; t < end; ++t) {
      seg.samples.push_back(std::max(0.0, s[t] - baseline));
    }
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace powerprint
