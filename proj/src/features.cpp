#include "powerprint/features.hpp"

#include <fstream>
#include <stdexcept>

#include "powerprint/textio.hpp"

namespace powerprint {

FeatureTable load_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  FeatureTable table;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string_view> fields = split_fields(line);
    if (fields.size() < 3) {
      throw std::runtime_error(path.string() + " line " + std::to_string(lineno) +
                               ": expected label,source_id,bins...");
    }
    const std::size_t row_dim = fields.size() - 2;
    if (dim == 0) {
      dim = row_dim;
    } else if (row_dim != dim) {
      throw std::runtime_error(path.string() + " line " + std::to_string(lineno) +
                               ": histogram has " + std::to_string(row_dim) +
                               " bins, expected " + std::to_string(dim));
    }
    std::vector<double> bins(row_dim);
    for (std::size_t i = 0; i < row_dim; ++i) {
      if (!parse_double(fields[i + 2], bins[i])) {
        throw std::runtime_error(path.string() + " line " + std::to_string(lineno) +
                                 ", column " + std::to_string(i + 3) + ": not a number");
      }
    }
    table.labels.emplace_back(fields[0]);
    table.sources.emplace_back(fields[1]);
    table.histograms.push_back(std::move(bins));
  }
  if (table.histograms.empty()) {
    throw std::runtime_error(path.string() + ": no records");
  }
  return table;
}

void write_features_csv(const FeatureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.labels[i] << ',' << table.sources[i];
    for (double b : table.histograms[i]) out << ',' << format_double(b);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

FeatureTable make_feature_table(const Dataset& dataset,
                                const std::vector<DescriptorHistogram>& histograms) {
  if (dataset.size() != histograms.size()) {
    throw std::invalid_argument("dataset/histogram count mismatch");
  }
  FeatureTable table;
  table.labels.reserve(dataset.size());
  table.sources.reserve(dataset.size());
  table.histograms.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    table.labels.push_back(dataset.signals[i].label);
    table.sources.push_back(dataset.signals[i].source_id);
    table.histograms.push_back(histograms[i].bins);
  }
  return table;
}

TrainingSet to_training_set(const FeatureTable& table) {
  TrainingSet train;
  train.histograms = table.histograms;
  train.labels.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string& label = table.labels[i];
    if (label.empty()) {
      throw std::invalid_argument("row " + std::to_string(i + 1) + " ('" +
                                  table.sources[i] + "') is unlabeled");
    }
    int idx = -1;
    for (std::size_t c = 0; c < train.class_names.size(); ++c) {
      if (train.class_names[c] == label) {
        idx = static_cast<int>(c);
        break;
      }
    }
    if (idx < 0) {
      idx = static_cast<int>(train.class_names.size());
      train.class_names.push_back(label);
    }
    train.labels.push_back(idx);
  }
  return train;
}

}  // namespace powerprint
