#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace powerprint {

// One appliance power trace. label is empty for unlabeled signals
// (e.g. segments cut from an aggregate before classification).
struct PowerSignal {
  std::vector<double> samples;
  std::string label;
  std::string source_id;
  double sample_rate_hz = 1.0;

  bool has_label() const { return !label.empty(); }
};

struct Dataset {
  std::vector<PowerSignal> signals;
  std::vector<std::string> class_names;  // distinct labels, first-seen order

  std::size_t size() const { return signals.size(); }
  // -1 when the label is unknown.
  int class_index(const std::string& label) const;
};

// Rebuilds class_names in first-seen order and validates samples.
Dataset make_dataset(std::vector<PowerSignal> signals);

// Record format: label,source_id,s0,s1,...  (label may be empty).
Dataset load_csv(const std::filesystem::path& path);
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic signatures

enum class BaseShape { Flat, PeriodicCycle, SpikeTrain, RampPlateau, MultiState };

const char* shape_name(BaseShape shape);
BaseShape parse_shape(const std::string& name);

struct ClassArchetype {
  std::string name;
  BaseShape shape = BaseShape::Flat;
  double base_watts = 100.0;
  double noise_sd_watts = 0.0;
  // Cycle period / spike spacing / state dwell in samples; 0 selects a
  // shape-specific default derived from the signal length.
  int period_samples = 0;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  std::vector<ClassArchetype> classes;
  int signatures_per_class = 1;
  int signal_length = 9;
};

// Pure function of cfg: identical configs produce bit-identical datasets.
Dataset generate_synthetic(const SynthConfig& cfg);

// The appliance mix behind `synth --classes N`: the first N of a fixed
// 8-entry list; N > 8 repeats the list at scaled power and period.
std::vector<ClassArchetype> benchmark_archetypes(int n_classes);

}  // namespace powerprint
