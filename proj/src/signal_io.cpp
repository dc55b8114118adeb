#include "powerprint/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "powerprint/rng.hpp"
#include "powerprint/textio.hpp"

namespace powerprint {

int Dataset::class_index(const std::string& label) const {
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    if (class_names[i] == label) return static_cast<int>(i);
  }
  return -1;
}

Dataset make_dataset(std::vector<PowerSignal> signals) {
  if (signals.empty()) {
    throw std::invalid_argument("dataset needs at least one signal");
  }
  Dataset ds;
  ds.signals = std::move(signals);
  for (const auto& sig : ds.signals) {
    if (sig.samples.empty()) {
      throw std::invalid_argument("signal '" + sig.source_id + "' has no samples");
    }
    if (!(sig.sample_rate_hz > 0.0)) {
      throw std::invalid_argument("signal '" + sig.source_id +
                                  "' has non-positive sample rate");
    }
    for (double v : sig.samples) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("signal '" + sig.source_id +
                                    "' contains a non-finite sample");
      }
    }
    if (sig.has_label() && ds.class_index(sig.label) < 0) {
      ds.class_names.push_back(sig.label);
    }
  }
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  const std::string where = path.filename().string();
  std::vector<PowerSignal> signals;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < 3) {
      throw std::runtime_error(where + " line " + std::to_string(line_no) +
                               ": expected label,source_id and at least one sample");
    }
    PowerSignal sig;
    sig.label = std::string(fields[0]);
    sig.source_id = std::string(fields[1]);
    sig.samples.reserve(fields.size() - 2);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      const std::string col = "line " + std::to_string(line_no) + ", column " +
                              std::to_string(i + 1);
      double v = 0.0;
      if (!parse_double(fields[i], v)) {
        throw std::runtime_error(where + " " + col + ": not a number: '" +
                                 std::string(fields[i]) + "'");
      }
      if (!std::isfinite(v)) {
        throw std::runtime_error(where + " " + col + ": non-finite sample '" +
                                 std::string(fields[i]) + "'");
      }
      sig.samples.push_back(v);
    }
    signals.push_back(std::move(sig));
  }
  if (signals.empty()) {
    throw std::runtime_error(where + ": no records");
  }
  return make_dataset(std::move(signals));
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  for (const auto& sig : dataset.signals) {
    out << sig.label << ',' << sig.source_id;
    for (double v : sig.samples) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed for '" + path.string() + "'");
  }
}

// ---------------------------------------------------------------------------
// Synthetic signatures

const char* shape_name(BaseShape shape) {
  switch (shape) {
    case BaseShape::Flat: return "flat";
    case BaseShape::PeriodicCycle: return "periodic-cycle";
    case BaseShape::SpikeTrain: return "spike-train";
    case BaseShape::RampPlateau: return "ramp-plateau";
    case BaseShape::MultiState: return "multi-state";
  }
  return "?";
}

BaseShape parse_shape(const std::string& name) {
  for (BaseShape s : {BaseShape::Flat, BaseShape::PeriodicCycle, BaseShape::SpikeTrain,
                      BaseShape::RampPlateau, BaseShape::MultiState}) {
    if (name == shape_name(s)) return s;
  }
  throw std::invalid_argument(
      "unknown shape '" + name +
      "' (expected flat, periodic-cycle, spike-train, ramp-plateau or multi-state)");
}

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// Small sinusoidal ripple riding on active power levels. Period is fixed
// per class, phase per signal, so same-class signatures share texture
// while their raw samples decorrelate.
double ripple(double t, int period, double amp_watts, double phase) {
  return amp_watts * std::sin(kTwoPi * (t + phase) / period);
}

int ripple_period(int structural_period) { return 5 + structural_period % 7; }

std::vector<double> shape_samples(const ClassArchetype& a, int length, Rng& rng) {
  const int n = length;
  const double base = a.base_watts;
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);

  switch (a.shape) {
    case BaseShape::Flat: {
      std::fill(x.begin(), x.end(), base);
      break;
    }
    case BaseShape::PeriodicCycle: {
      const int period = a.period_samples > 0 ? a.period_samples : std::max(20, n / 5);
      const int on_len = std::max(1, period / 2);
      const int rp = ripple_period(period);
      const int phase = static_cast<int>(rng.below(static_cast<std::size_t>(period)));
      const double rphase = rng.uniform() * rp;
      const double off_level = 0.08 * base;
      for (int t = 0; t < n; ++t) {
        const bool on = (t + phase) % period < on_len;
        x[t] = on ? base + ripple(t, rp, 0.03 * base, rphase) : off_level;
      }
      break;
    }
    case BaseShape::SpikeTrain: {
      const int spacing = a.period_samples > 0 ? a.period_samples : std::max(10, n / 10);
      const int width = std::max(2, spacing / 8);
      const int n_spikes = std::max(1, n / spacing);
      const int rp = ripple_period(spacing);
      const double rphase = rng.uniform() * rp;
      const double baseline = 0.04 * base;
      for (int t = 0; t < n; ++t) {
        x[t] = baseline + ripple(t, rp, 0.02 * base, rphase);
      }
      for (int s = 0; s < n_spikes; ++s) {
        const int pos = static_cast<int>(rng.below(static_cast<std::size_t>(
            std::max(1, n - width))));
        for (int t = pos; t < std::min(n, pos + width); ++t) {
          x[t] = base + ripple(t, rp, 0.02 * base, rphase);
        }
      }
      break;
    }
    case BaseShape::RampPlateau: {
      const int ramp_len = std::max(3, n / 8);
      const int plateau_len = std::max(3, n / 3);
      // Onset roams over all the slack so same-class plateaus overlap little.
      const int slack = std::max(1, n - ramp_len - plateau_len);
      const int onset = static_cast<int>(rng.below(static_cast<std::size_t>(slack)));
      const int structural = a.period_samples > 0 ? a.period_samples : std::max(8, n / 8);
      const int rp = ripple_period(structural);
      const double rphase = rng.uniform() * rp;
      const double pre = 0.05 * base;
      const double tail = 0.15 * base;
      for (int t = 0; t < n; ++t) {
        if (t < onset) {
          x[t] = pre + ripple(t, rp, 0.015 * base, rphase);
        } else if (t < onset + ramp_len) {
          const double frac = static_cast<double>(t - onset) / ramp_len;
          x[t] = pre + frac * (base - pre);
        } else if (t < onset + ramp_len + plateau_len) {
          x[t] = base + ripple(t, rp, 0.03 * base, rphase);
        } else {
          x[t] = tail + ripple(t, rp, 0.015 * base, rphase);
        }
      }
      break;
    }
    case BaseShape::MultiState: {
      const int dwell = a.period_samples > 0 ? a.period_samples : std::max(8, n / 8);
      const double levels[4] = {0.3 * base, 0.6 * base, base, 0.45 * base};
      const int rp = ripple_period(dwell);
      const double rphase = rng.uniform() * rp;
      int level = static_cast<int>(rng.below(4));
      for (int start = 0; start < n; start += dwell) {
        const int end = std::min(n, start + dwell);
        for (int t = start; t < end; ++t) {
          x[t] = levels[level] + ripple(t, rp, 0.03 * base, rphase);
        }
        level = (level + 1 + static_cast<int>(rng.below(3))) % 4;  // never repeats
      }
      break;
    }
  }
  return x;
}

void validate(const SynthConfig& cfg) {
  if (cfg.classes.empty()) {
    throw std::invalid_argument("synthetic config needs at least one class");
  }
  if (cfg.signatures_per_class < 1) {
    throw std::invalid_argument("signatures_per_class must be >= 1");
  }
  if (cfg.signal_length < 9) {
    throw std::invalid_argument("signal_length must be >= 9");
  }
  for (std::size_t i = 0; i < cfg.classes.size(); ++i) {
    const auto& a = cfg.classes[i];
    if (a.name.empty() || a.name.find(',') != std::string::npos) {
      throw std::invalid_argument("class names must be non-empty and comma-free");
    }
    if (!(a.base_watts > 0.0)) {
      throw std::invalid_argument("class '" + a.name + "': base_watts must be > 0");
    }
    if (a.noise_sd_watts < 0.0) {
      throw std::invalid_argument("class '" + a.name + "': noise stddev must be >= 0");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.classes[j].name == a.name) {
        throw std::invalid_argument("duplicate class name '" + a.name + "'");
      }
    }
  }
}

}  // namespace

Dataset generate_synthetic(const SynthConfig& cfg) {
  validate(cfg);
  std::vector<PowerSignal> signals;
  signals.reserve(cfg.classes.size() * cfg.signatures_per_class);
  for (std::size_t ci = 0; ci < cfg.classes.size(); ++ci) {
    const auto& archetype = cfg.classes[ci];
    for (int si = 0; si < cfg.signatures_per_class; ++si) {
      Rng rng(child_seed(cfg.seed, ci, static_cast<std::uint64_t>(si)));
      PowerSignal sig;
      sig.label = archetype.name;
      sig.source_id = archetype.name + "-" + std::to_string(si);
      sig.samples = shape_samples(archetype, cfg.signal_length, rng);
      if (archetype.noise_sd_watts > 0.0) {
        for (double& v : sig.samples) {
          v += archetype.noise_sd_watts * rng.gaussian();
        }
      }
      for (double& v : sig.samples) v = std::max(0.0, v);
      signals.push_back(std::move(sig));
    }
  }
  return make_dataset(std::move(signals));
}

std::vector<ClassArchetype> benchmark_archetypes(int n_classes) {
  if (n_classes < 1) {
    throw std::invalid_argument("class count must be >= 1");
  }
  static const std::vector<ClassArchetype> kBase = {
      {"fridge", BaseShape::PeriodicCycle, 120.0, 1.5, 100},
      {"freezer", BaseShape::PeriodicCycle, 90.0, 1.2, 56},
      {"microwave", BaseShape::SpikeTrain, 1200.0, 5.0, 44},
      {"laptop_charger", BaseShape::SpikeTrain, 60.0, 0.5, 90},
      {"washing_machine", BaseShape::MultiState, 500.0, 3.0, 50},
      {"dishwasher", BaseShape::MultiState, 300.0, 2.0, 80},
      {"heater", BaseShape::PeriodicCycle, 2000.0, 8.0, 160},
      {"kettle", BaseShape::RampPlateau, 1800.0, 6.0, 0},
  };
  std::vector<ClassArchetype> out;
  out.reserve(static_cast<std::size_t>(n_classes));
  for (int i = 0; i < n_classes; ++i) {
    ClassArchetype a = kBase[static_cast<std::size_t>(i) % kBase.size()];
    const int round = i / static_cast<int>(kBase.size());
    if (round > 0) {
      a.name += "_" + std::to_string(round + 1);
      a.base_watts *= 1.0 + 0.35 * round;
      if (a.period_samples > 0) a.period_samples += 7 * round;
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace powerprint
