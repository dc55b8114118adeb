#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "powerprint/descriptors.hpp"
#include "powerprint/iknn.hpp"

namespace powerprint {

// Histogram rows as exported per signature: label,source_id,b0,...,b_{L-1}.
struct FeatureTable {
  std::vector<std::string> labels;   // empty string = unlabeled
  std::vector<std::string> sources;
  std::vector<std::vector<double>> histograms;

  std::size_t size() const { return histograms.size(); }
};

FeatureTable load_features_csv(const std::filesystem::path& path);
void write_features_csv(const FeatureTable& table, const std::filesystem::path& path);

FeatureTable make_feature_table(const Dataset& dataset,
                                const std::vector<DescriptorHistogram>& histograms);

// Requires every row labeled; class names in first-seen order.
TrainingSet to_training_set(const FeatureTable& table);

}  // namespace powerprint
