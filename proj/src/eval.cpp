#include "powerprint/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "powerprint/parallel.hpp"
#include "powerprint/rng.hpp"
#include "powerprint/textio.hpp"

namespace powerprint {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (std::int64_t v : counts) s += v;
  return s;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (int c = 0; c < num_classes(); ++c) s += at(c, c);
  return s;
}

ConfusionMatrix make_confusion(std::vector<std::string> class_names) {
  ConfusionMatrix cm;
  cm.counts.assign(class_names.size() * class_names.size(), 0);
  cm.class_names = std::move(class_names);
  return cm;
}

MetricsResult metrics(const ConfusionMatrix& confusion) {
  const int c = confusion.num_classes();
  if (c == 0 || confusion.total() == 0) {
    throw std::invalid_argument("metrics need a non-empty confusion matrix");
  }
  MetricsResult res;
  res.per_class.resize(static_cast<std::size_t>(c));
  double f1_sum = 0.0;
  for (int i = 0; i < c; ++i) {
    const double tp = static_cast<double>(confusion.at(i, i));
    double fp = 0.0, fn = 0.0;
    for (int t = 0; t < c; ++t) {
      if (t == i) continue;
      fp += static_cast<double>(confusion.at(t, i));
      fn += static_cast<double>(confusion.at(i, t));
    }
    ClassMetrics& m = res.per_class[static_cast<std::size_t>(i)];
    m.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    m.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    f1_sum += m.f1;
  }
  res.accuracy = static_cast<double>(confusion.trace()) /
                 static_cast<double>(confusion.total());
  res.macro_f1 = f1_sum / c;
  return res;
}

// ---------------------------------------------------------------------------

double ncc(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("ncc needs two equal-length non-empty vectors");
  }
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) {
    throw std::invalid_argument("ncc is undefined for zero vectors");
  }
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

double NccMatrix::mean_off_diagonal() const {
  if (n < 2) throw std::invalid_argument("off-diagonal mean needs n >= 2");
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) s += at(i, j);
    }
  }
  return s / (static_cast<double>(n) * (n - 1));
}

NccMatrix ncc_matrix(const std::vector<std::vector<double>>& vectors) {
  if (vectors.size() < 2) {
    throw std::invalid_argument("ncc matrix needs at least 2 vectors");
  }
  NccMatrix m;
  m.n = static_cast<int>(vectors.size());
  m.values.assign(vectors.size() * vectors.size(), 1.0);
  for (int i = 0; i < m.n; ++i) {
    for (int j = i + 1; j < m.n; ++j) {
      const double v = ncc(vectors[static_cast<std::size_t>(i)],
                           vectors[static_cast<std::size_t>(j)]);
      m.values[static_cast<std::size_t>(i) * m.n + j] = v;
      m.values[static_cast<std::size_t>(j) * m.n + i] = v;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

std::vector<int> stratified_folds(const std::vector<int>& labels, int num_classes,
                                  int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs folds >= 2");
  if (num_classes < 1) throw std::invalid_argument("need at least one class");
  std::vector<int> assignment(labels.size(), -1);
  for (int c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    Rng rng(child_seed(seed, 0xF01DULL, static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      assignment[members[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (assignment[i] < 0) {
      throw std::invalid_argument("label out of range at index " + std::to_string(i));
    }
  }
  return assignment;
}

std::string fold_assignment_hash(const std::vector<int>& assignment) {
  std::uint64_t h = 14695981039346656037ULL;
  for (int a : assignment) {
    std::uint32_t v = static_cast<std::uint32_t>(a);
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xFFU;
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

EvalReport kfold_eval(const Dataset& dataset, const DescriptorSpec& spec,
                      const IknnConfig& cfg, int folds, std::uint64_t seed,
                      int threads) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs folds >= 2");
  const int c = static_cast<int>(dataset.class_names.size());
  if (c < 2) throw std::invalid_argument("cross-validation needs at least 2 classes");

  std::vector<int> labels(dataset.size());
  std::vector<std::int64_t> class_counts(static_cast<std::size_t>(c), 0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const PowerSignal& sig = dataset.signals[i];
    if (!sig.has_label()) {
      throw std::invalid_argument("signal '" + sig.source_id +
                                  "' is unlabeled; cross-validation needs labels");
    }
    const int lab = dataset.class_index(sig.label);
    labels[i] = lab;
    ++class_counts[static_cast<std::size_t>(lab)];
  }
  std::int64_t min_count = class_counts[0];
  for (std::size_t ci = 0; ci < class_counts.size(); ++ci) {
    if (class_counts[ci] < 2) {
      throw std::invalid_argument("class '" + dataset.class_names[ci] +
                                  "' has fewer than 2 signatures");
    }
    min_count = std::min(min_count, class_counts[ci]);
  }

  EvalReport report;
  report.seed = seed;
  report.folds = static_cast<int>(std::min<std::int64_t>(folds, min_count));
  report.folds_reduced = report.folds < folds;

  const auto t_extract = std::chrono::steady_clock::now();
  std::vector<DescriptorHistogram> feats = extract_all(spec, dataset, threads);
  report.extract_seconds = seconds_since(t_extract);

  const std::vector<int> assignment =
      stratified_folds(labels, c, report.folds, seed);
  report.fold_hash = fold_assignment_hash(assignment);
  report.confusion = make_confusion(dataset.class_names);

  for (int f = 0; f < report.folds; ++f) {
    TrainingSet train;
    train.class_names = dataset.class_names;
    std::vector<std::size_t> test_ids;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (assignment[i] == f) {
        test_ids.push_back(i);
      } else {
        train.histograms.push_back(feats[i].bins);
        train.labels.push_back(labels[i]);
      }
    }

    const auto t_fit = std::chrono::steady_clock::now();
    const IknnModel model = fit(std::move(train), cfg);
    report.fold_train_seconds.push_back(seconds_since(t_fit));

    const auto t_test = std::chrono::steady_clock::now();
    std::vector<int> predicted(test_ids.size());
    parallel_for(test_ids.size(), threads, [&](std::size_t t) {
      predicted[t] = predict(model, feats[test_ids[t]].bins).label_index;
    });
    report.fold_test_seconds.push_back(seconds_since(t_test));

    for (std::size_t t = 0; t < test_ids.size(); ++t) {
      ++report.confusion.at(labels[test_ids[t]], predicted[t]);
    }
  }

  const MetricsResult m = metrics(report.confusion);
  report.accuracy = m.accuracy;
  report.macro_f1 = m.macro_f1;
  report.per_class = m.per_class;
  return report;
}

std::vector<CompareRow> compare_descriptors(const Dataset& dataset,
                                            const std::vector<DescriptorSpec>& specs,
                                            const IknnConfig& cfg, int folds,
                                            std::uint64_t seed, int threads) {
  if (specs.empty()) throw std::invalid_argument("no descriptors to compare");
  std::vector<CompareRow> rows;
  rows.reserve(specs.size());
  for (const DescriptorSpec& spec : specs) {
    CompareRow row;
    row.kind = spec.kind;
    row.histogram_length = histogram_length(spec.kind);
    row.report = kfold_eval(dataset, spec, cfg, folds, seed, threads);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------

void write_report_csv(const EvalReport& report, const std::string& descriptor_name,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "descriptor," << descriptor_name << '\n';
  out << "folds," << report.folds << '\n';
  out << "seed," << report.seed << '\n';
  out << "fold_hash," << report.fold_hash << '\n';
  out << "accuracy," << format_double(report.accuracy) << '\n';
  out << "macro_f1," << format_double(report.macro_f1) << '\n';
  out << "class,precision,recall,f1\n";
  const int c = report.confusion.num_classes();
  for (int i = 0; i < c; ++i) {
    const ClassMetrics& m = report.per_class[static_cast<std::size_t>(i)];
    out << report.confusion.class_names[static_cast<std::size_t>(i)] << ','
        << format_double(m.precision) << ',' << format_double(m.recall) << ','
        << format_double(m.f1) << '\n';
  }
  out << "confusion," << c << '\n';
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      if (j) out << ',';
      out << report.confusion.at(i, j);
    }
    out << '\n';
  }
  out << "note,undefined precision/recall/f1 reported as 0\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_compare_csv(const std::vector<CompareRow>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "descriptor,histogram_length,accuracy,macro_f1,fold_hash\n";
  for (const CompareRow& row : rows) {
    out << kind_name(row.kind) << ',' << row.histogram_length << ','
        << format_double(row.report.accuracy) << ','
        << format_double(row.report.macro_f1) << ',' << row.report.fold_hash << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_compare_timings_csv(const std::vector<CompareRow>& rows,
                               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "descriptor,extract_seconds,train_seconds_total,test_seconds_total\n";
  for (const CompareRow& row : rows) {
    double train_s = 0.0, test_s = 0.0;
    for (double v : row.report.fold_train_seconds) train_s += v;
    for (double v : row.report.fold_test_seconds) test_s += v;
    out << kind_name(row.kind) << ',' << format_double(row.report.extract_seconds)
        << ',' << format_double(train_s) << ',' << format_double(test_s) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string format_text_report(const EvalReport& report,
                               const std::string& descriptor_name) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%s: %d-fold cross-validation (seed %llu, fold hash %s)%s\n",
                descriptor_name.c_str(), report.folds,
                static_cast<unsigned long long>(report.seed),
                report.fold_hash.c_str(),
                report.folds_reduced ? " [folds reduced to smallest class]" : "");
  out << buf;
  std::snprintf(buf, sizeof buf, "  accuracy %.4f   macro-F1 %.4f\n", report.accuracy,
                report.macro_f1);
  out << buf;
  out << "  class                 precision  recall     f1\n";
  for (int i = 0; i < report.confusion.num_classes(); ++i) {
    const ClassMetrics& m = report.per_class[static_cast<std::size_t>(i)];
    std::snprintf(buf, sizeof buf, "  %-20s  %9.4f  %6.4f  %6.4f\n",
                  report.confusion.class_names[static_cast<std::size_t>(i)].c_str(),
                  m.precision, m.recall, m.f1);
    out << buf;
  }
  double train_s = 0.0, test_s = 0.0;
  for (double v : report.fold_train_seconds) train_s += v;
  for (double v : report.fold_test_seconds) test_s += v;
  std::snprintf(buf, sizeof buf,
                "  timing: extract %.3fs, fit %.3fs, predict %.3fs\n",
                report.extract_seconds, train_s, test_s);
  out << buf;
  out << "  (undefined precision/recall counts as 0)\n";
  return out.str();
}

}  // namespace powerprint
