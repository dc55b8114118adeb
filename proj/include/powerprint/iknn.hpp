#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace powerprint {

// Labeled fingerprints ready for classification.
struct TrainingSet {
  std::vector<std::vector<double>> histograms;
  std::vector<int> labels;  // indices into class_names
  std::vector<std::string> class_names;

  std::size_t size() const { return histograms.size(); }
};

struct IknnConfig {
  int k = 5;
  // Subgroup count; 0 selects max(2, floor(sqrt(training size))).
  int m = 0;
  std::uint64_t seed = 0;  // partition initialization
};

// Classifier state: entropy-derived class weights plus a seeded centroid
// partition of the training set used to restrict the neighbor search.
struct IknnModel {
  TrainingSet train;
  IknnConfig config;             // with m resolved to its effective value
  std::vector<double> class_priors;
  double entropy = 0.0;          // -sum a_i log2 a_i over class priors
  std::vector<double> class_weights;  // -log2(a_c)/entropy, clamped to [0.1, 10]
  std::vector<std::vector<int>> subgroups;  // disjoint, covering all indices
  std::vector<std::vector<double>> centroids;  // exact member means
};

struct Prediction {
  std::string label;
  int label_index = -1;
  double score = 0.0;  // winning weighted vote mass
  std::vector<int> neighbor_ids;  // training indices, nearest first
};

// Requires >= 2 classes and equal histogram lengths.
IknnModel fit(TrainingSet train, const IknnConfig& cfg);

// Argmin Euclidean distance to the subgroup centroids; ties -> lowest id.
int nearest_subgroup(const IknnModel& model, const std::vector<double>& histogram);

// Weighted-Euclidean k-NN inside the nearest subgroup with
// class-weight-over-distance voting; k is capped at the subgroup size.
Prediction predict(const IknnModel& model, const std::vector<double>& histogram);

// ---------------------------------------------------------------------------
// Baseline KNN variants

enum class KnnMetric { Euclidean, Cosine, InverseDistanceEuclidean };

const char* metric_name(KnnMetric metric);

// Plain k-NN over the whole training set. Euclidean and Cosine vote by
// majority; InverseDistanceEuclidean weights each vote by 1/(d + eps).
// Ties break toward the lower training index / earlier class.
std::string knn_predict(const TrainingSet& train, const std::vector<double>& histogram,
                        int k, KnnMetric metric);

}  // namespace powerprint
