#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "powerprint/descriptors.hpp"
#include "powerprint/iknn.hpp"
#include "powerprint/signal_io.hpp"

namespace powerprint {

struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::int64_t> counts;  // C x C row-major; rows = true class

  int num_classes() const { return static_cast<int>(class_names.size()); }
  std::int64_t at(int true_class, int predicted) const {
    return counts[static_cast<std::size_t>(true_class) * class_names.size() + predicted];
  }
  std::int64_t& at(int true_class, int predicted) {
    return counts[static_cast<std::size_t>(true_class) * class_names.size() + predicted];
  }
  std::int64_t total() const;
  std::int64_t trace() const;
};

ConfusionMatrix make_confusion(std::vector<std::string> class_names);

struct ClassMetrics {
  double precision = 0.0;  // TP/(TP+FP), 0 when undefined
  double recall = 0.0;     // TP/(TP+FN), 0 when undefined
  double f1 = 0.0;         // harmonic mean, 0 when both are 0
};

struct MetricsResult {
  double accuracy = 0.0;
  double macro_f1 = 0.0;  // unweighted mean of per-class F1
  std::vector<ClassMetrics> per_class;
};

MetricsResult metrics(const ConfusionMatrix& confusion);

struct EvalReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  int folds = 0;
  std::uint64_t seed = 0;
  std::string fold_hash;  // reproducibility audit of the fold assignment
  bool folds_reduced = false;
  // Measurements; everything above is deterministic, these are not.
  std::vector<double> fold_train_seconds;
  std::vector<double> fold_test_seconds;
  double extract_seconds = 0.0;
};

// ---------------------------------------------------------------------------
// Normalized cross-correlation

// Cosine of the angle between two equal-length non-zero vectors.
double ncc(const std::vector<double>& x, const std::vector<double>& y);

struct NccMatrix {
  int n = 0;
  std::vector<double> values;  // symmetric, unit diagonal

  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * n + j];
  }
  double mean_off_diagonal() const;
};

NccMatrix ncc_matrix(const std::vector<std::vector<double>>& vectors);

// ---------------------------------------------------------------------------
// Cross-validated evaluation

// Stratified assignment: per class, a seeded shuffle dealt round-robin,
// so fold sizes per class differ by at most one.
std::vector<int> stratified_folds(const std::vector<int>& labels, int num_classes,
                                  int folds, std::uint64_t seed);

// FNV-1a over the fold ids in dataset order, as a hex string.
std::string fold_assignment_hash(const std::vector<int>& assignment);

// Extracts features once, then per fold fits on the other folds and
// predicts the held-out one; one confusion matrix aggregated over folds.
// Requires every class to have >= 2 labeled members; folds is reduced to
// the smallest class count when necessary.
EvalReport kfold_eval(const Dataset& dataset, const DescriptorSpec& spec,
                      const IknnConfig& cfg, int folds, std::uint64_t seed,
                      int threads = 1);

struct CompareRow {
  DescriptorKind kind = DescriptorKind::Lph;
  int histogram_length = 0;
  EvalReport report;
};

// One kfold_eval per descriptor with a shared fold assignment.
std::vector<CompareRow> compare_descriptors(const Dataset& dataset,
                                            const std::vector<DescriptorSpec>& specs,
                                            const IknnConfig& cfg, int folds,
                                            std::uint64_t seed, int threads = 1);

// ---------------------------------------------------------------------------
// Report output. CSV files carry only deterministic fields; timings are
// measurements and belong to the text rendering / dedicated timing files.

void write_report_csv(const EvalReport& report, const std::string& descriptor_name,
                      const std::filesystem::path& path);
void write_compare_csv(const std::vector<CompareRow>& rows,
                       const std::filesystem::path& path);
void write_compare_timings_csv(const std::vector<CompareRow>& rows,
                               const std::filesystem::path& path);
std::string format_text_report(const EvalReport& report, const std::string& descriptor_name);

}  // namespace powerprint
