#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "powerprint/iknn.hpp"
#include "powerprint/rng.hpp"

using namespace powerprint;

namespace {

// Two well-separated blobs around (0,...) and (1,...), plus a third around 5.
TrainingSet blob_set(std::size_t per_class, std::size_t dim, std::uint64_t seed,
                     std::vector<double> centers = {0.0, 1.0}) {
  Rng rng(seed);
  TrainingSet ts;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    ts.class_names.push_back("class" + std::to_string(c));
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> h(dim);
      for (double& v : h) v = centers[c] + 0.1 * rng.gaussian();
      ts.histograms.push_back(std::move(h));
      ts.labels.push_back(static_cast<int>(c));
    }
  }
  return ts;
}

}  // namespace

TEST_CASE("fit rejects degenerate training sets") {
  TrainingSet empty;
  empty.class_names = {"a", "b"};
  CHECK_THROWS_AS(fit(empty, {}), std::invalid_argument);

  TrainingSet ts = blob_set(4, 3, 1);
  TrainingSet bad = ts;
  bad.labels.pop_back();
  CHECK_THROWS_AS(fit(bad, {}), std::invalid_argument);

  bad = ts;
  bad.histograms[2] = {1.0, 2.0};  // inconsistent length
  CHECK_THROWS_AS(fit(bad, {}), std::invalid_argument);

  bad = ts;
  bad.labels[0] = 7;  // outside class_names
  CHECK_THROWS_AS(fit(bad, {}), std::invalid_argument);
  bad.labels[0] = -1;
  CHECK_THROWS_AS(fit(bad, {}), std::invalid_argument);

  bad = ts;
  for (int& l : bad.labels) l = 0;  // single distinct class
  CHECK_THROWS_AS(fit(bad, {}), std::invalid_argument);

  IknnConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(fit(ts, cfg), std::invalid_argument);
  cfg.k = static_cast<int>(ts.size()) + 1;
  CHECK_THROWS_AS(fit(ts, cfg), std::invalid_argument);
  cfg.k = 1;
  cfg.m = static_cast<int>(ts.size()) + 1;
  CHECK_THROWS_AS(fit(ts, cfg), std::invalid_argument);
}

TEST_CASE("balanced two-class entropy is one and weights are one") {
  TrainingSet ts = blob_set(8, 4, 3);
  IknnConfig cfg;
  cfg.k = 3;
  cfg.m = 2;
  const IknnModel model = fit(ts, cfg);
  CHECK(model.entropy == doctest::Approx(1.0));
  REQUIRE(model.class_weights.size() == 2);
  CHECK(model.class_weights[0] == doctest::Approx(1.0));
  CHECK(model.class_weights[1] == doctest::Approx(1.0));
  CHECK(model.class_priors[0] == doctest::Approx(0.5));
  CHECK(model.class_priors[1] == doctest::Approx(0.5));
}

TEST_CASE("four-class skewed priors produce the expected entropy and weights") {
  // priors 0.4 / 0.3 / 0.2 / 0.1 over 40 rows
  TrainingSet ts;
  ts.class_names = {"a", "b", "c", "d"};
  const int counts[4] = {16, 12, 8, 4};
  Rng rng(9);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < counts[c]; ++i) {
      ts.histograms.push_back({static_cast<double>(c) + 0.01 * rng.gaussian(), 0.0, 0.0});
      ts.labels.push_back(c);
    }
  }
  IknnConfig cfg;
  cfg.k = 3;
  const IknnModel model = fit(ts, cfg);
  CHECK(model.entropy == doctest::Approx(1.84644).epsilon(1e-4));
  for (int c = 0; c < 4; ++c) {
    const double expected = std::clamp(-std::log2(model.class_priors[c]) / model.entropy, 0.1, 10.0);
    CHECK(model.class_weights[c] == doctest::Approx(expected));
  }
  // rarer class -> larger weight
  CHECK(model.class_weights[3] > model.class_weights[0]);
}

TEST_CASE("a class named but absent from the rows gets the ceiling weight") {
  TrainingSet ts = blob_set(6, 3, 5);
  ts.class_names.push_back("ghost");
  IknnConfig cfg;
  cfg.k = 3;
  const IknnModel model = fit(ts, cfg);
  REQUIRE(model.class_weights.size() == 3);
  CHECK(model.class_priors[2] == doctest::Approx(0.0));
  CHECK(model.class_weights[2] == doctest::Approx(10.0));
}

TEST_CASE("weights are clamped to the 0.1..10 band") {
  IknnConfig cfg;
  cfg.k = 1;
  cfg.m = 2;

  SUBCASE("a rare class hits the ceiling") {
    // priors 99/100 and 1/100: raw weight of the rare class is ~82
    TrainingSet ts;
    ts.class_names = {"big", "small"};
    for (int i = 0; i < 99; ++i) {
      ts.histograms.push_back({static_cast<double>(i) * 1e-4, 0.0});
      ts.labels.push_back(0);
    }
    ts.histograms.push_back({1.0, 0.0});
    ts.labels.push_back(1);
    const IknnModel model = fit(ts, cfg);
    CHECK(model.class_weights[1] == doctest::Approx(10.0));
    CHECK(model.class_weights[0] > 0.1);
    CHECK(model.class_weights[0] < 1.0);
  }

  SUBCASE("an overwhelming class hits the floor") {
    // priors 65535/65536 and 1/65536: raw weight of the big class is ~0.083
    TrainingSet ts;
    ts.class_names = {"big", "small"};
    ts.histograms.assign(65535, {0.0});
    ts.labels.assign(65535, 0);
    ts.histograms.push_back({1.0});
    ts.labels.push_back(1);
    const IknnModel model = fit(ts, cfg);
    CHECK(model.class_weights[0] == doctest::Approx(0.1));
    CHECK(model.class_weights[1] == doctest::Approx(10.0));  // raw ~192
  }
}

TEST_CASE("automatic subgroup count is max(2, floor(sqrt(M))) capped at M") {
  TrainingSet ts = blob_set(50, 3, 2);  // M = 100
  IknnConfig cfg;
  cfg.k = 3;
  cfg.m = 0;
  IknnModel model = fit(ts, cfg);
  CHECK(model.config.m == 10);
  CHECK(model.subgroups.size() == 10);

  TrainingSet small = blob_set(2, 3, 2);  // M = 4 -> floor(sqrt) = 2
  model = fit(small, cfg);
  CHECK(model.config.m == 2);

  TrainingSet tiny = blob_set(1, 3, 2, {0.0, 1.0, 5.0});  // M = 3 -> max(2,1)=2
  cfg.k = 1;
  model = fit(tiny, cfg);
  CHECK(model.config.m == 2);
}

TEST_CASE("subgroups partition the training set and centroids are member means") {
  TrainingSet ts = blob_set(20, 5, 17, {0.0, 1.0, 3.0});
  IknnConfig cfg;
  cfg.k = 5;
  cfg.m = 6;
  cfg.seed = 42;
  const IknnModel model = fit(ts, cfg);
  REQUIRE(model.subgroups.size() == 6);
  REQUIRE(model.centroids.size() == 6);

  std::set<int> seen;
  for (const auto& group : model.subgroups) {
    CHECK(!group.empty());
    for (int id : group) {
      CHECK(seen.insert(id).second);  // no duplicates across groups
      CHECK(id >= 0);
      CHECK(id < static_cast<int>(ts.size()));
    }
  }
  CHECK(seen.size() == ts.size());

  for (std::size_t g = 0; g < model.subgroups.size(); ++g) {
    std::vector<double> mean(5, 0.0);
    for (int id : model.subgroups[g]) {
      for (std::size_t t = 0; t < 5; ++t) mean[t] += ts.histograms[static_cast<std::size_t>(id)][t];
    }
    for (double& v : mean) v /= static_cast<double>(model.subgroups[g].size());
    for (std::size_t t = 0; t < 5; ++t) {
      CHECK(model.centroids[g][t] == doctest::Approx(mean[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("fit is deterministic for a fixed seed") {
  TrainingSet ts = blob_set(15, 4, 23, {0.0, 1.0, 2.0});
  IknnConfig cfg;
  cfg.k = 3;
  cfg.m = 4;
  cfg.seed = 7;
  const IknnModel a = fit(ts, cfg);
  const IknnModel b = fit(ts, cfg);
  CHECK(a.subgroups == b.subgroups);
  CHECK(a.centroids == b.centroids);
  CHECK(a.class_weights == b.class_weights);
}

TEST_CASE("nearest_subgroup picks the closest centroid, lowest id on ties") {
  TrainingSet ts;
  ts.class_names = {"a", "b"};
  ts.histograms = {{0.0, 0.0}, {0.1, 0.0}, {4.0, 0.0}, {4.1, 0.0}};
  ts.labels = {0, 0, 1, 1};
  IknnConfig cfg;
  cfg.k = 1;
  cfg.m = 2;
  const IknnModel model = fit(ts, cfg);
  // the two blobs are far apart, so the partition must separate them
  const int left = nearest_subgroup(model, {0.05, 0.0});
  const int right = nearest_subgroup(model, {4.05, 0.0});
  CHECK(left != right);
  CHECK_THROWS_AS(nearest_subgroup(model, {0.0, 0.0, 0.0}), std::invalid_argument);

  // routing only reads the centroid table, so it can be pinned directly
  IknnModel routes;
  routes.centroids = {{0.0, 0.0}, {2.0, 0.0}, {4.0, 0.0}, {6.0, 0.0}};
  CHECK(nearest_subgroup(routes, {2.0, 0.0}) == 1);  // exact centroid hit
  CHECK(nearest_subgroup(routes, {5.0, 0.0}) == 2);  // equidistant 2/3 -> lower id
  CHECK(nearest_subgroup(routes, {-9.0, 0.0}) == 0);

  IknnModel single;
  single.centroids = {{1.0}};
  CHECK(nearest_subgroup(single, {40.0}) == 0);  // m=1: always subgroup 0

  IknnModel unfitted;
  CHECK_THROWS_AS(nearest_subgroup(unfitted, {1.0}), std::invalid_argument);
}

TEST_CASE("a query equal to one training point with k=1 returns that point") {
  TrainingSet ts;
  ts.class_names = {"a", "b"};
  ts.histograms = {{0.0, 0.3}, {0.2, 0.1}, {0.9, 0.8}, {1.0, 0.6}};
  ts.labels = {0, 0, 1, 1};
  IknnConfig cfg;
  cfg.k = 1;
  cfg.m = 1;
  const IknnModel model = fit(ts, cfg);
  const Prediction p = predict(model, {0.9, 0.8});
  CHECK(p.label == "b");
  REQUIRE(p.neighbor_ids.size() == 1);
  CHECK(p.neighbor_ids[0] == 2);
  CHECK(p.score > 0.0);
}

TEST_CASE("scaling every class weight by one constant never flips a label") {
  TrainingSet ts = blob_set(10, 5, 97, {0.0, 1.0, 2.5});
  IknnConfig cfg;
  cfg.k = 5;
  cfg.m = 3;
  const IknnModel model = fit(ts, cfg);
  IknnModel scaled = model;
  for (double& w : scaled.class_weights) w *= 7.25;

  Rng rng(4242);
  for (int q = 0; q < 60; ++q) {
    std::vector<double> query(5);
    for (double& v : query) v = 2.5 * rng.uniform();
    CHECK(predict(model, query).label == predict(scaled, query).label);
  }
}

TEST_CASE("predict returns the blob label with sorted neighbors") {
  TrainingSet ts = blob_set(12, 6, 31);
  IknnConfig cfg;
  cfg.k = 5;
  cfg.m = 3;
  const IknnModel model = fit(ts, cfg);

  std::vector<double> q0(6, 0.0), q1(6, 1.0);
  const Prediction p0 = predict(model, q0);
  CHECK(p0.label == "class0");
  CHECK(p0.label_index == 0);
  CHECK(p0.score > 0.0);
  CHECK(!p0.neighbor_ids.empty());
  const Prediction p1 = predict(model, q1);
  CHECK(p1.label == "class1");

  // neighbor ids come back nearest first
  double prev = -1.0;
  for (int id : p0.neighbor_ids) {
    double d2 = 0.0;
    for (std::size_t t = 0; t < 6; ++t) {
      const double d = ts.histograms[static_cast<std::size_t>(id)][t] - q0[t];
      d2 += d * d;
    }
    const double wd = std::sqrt(model.class_weights[static_cast<std::size_t>(
                                    ts.labels[static_cast<std::size_t>(id)])] *
                                d2);
    CHECK(wd >= prev);
    prev = wd;
  }

  CHECK_THROWS_AS(predict(model, {1.0}), std::invalid_argument);
}

TEST_CASE("k larger than the routed subgroup is capped, not fatal") {
  TrainingSet ts;
  ts.class_names = {"a", "b"};
  ts.histograms = {{0.0}, {0.1}, {5.0}, {5.1}, {5.2}};
  ts.labels = {0, 0, 1, 1, 1};
  IknnConfig cfg;
  cfg.k = 5;  // the near subgroup holds only two points
  cfg.m = 2;
  const IknnModel model = fit(ts, cfg);
  const Prediction p = predict(model, {0.05});
  CHECK(p.label == "a");
  CHECK(p.neighbor_ids.size() <= 5);
}

TEST_CASE("with one subgroup the classifier matches an exhaustive reference") {
  Rng rng(555);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t classes = 2 + rng.below(3);
    const std::size_t per = 4 + rng.below(6);
    const std::size_t dim = 3 + rng.below(6);
    TrainingSet ts;
    for (std::size_t c = 0; c < classes; ++c) {
      ts.class_names.push_back("c" + std::to_string(c));
      for (std::size_t i = 0; i < per; ++i) {
        std::vector<double> h(dim);
        for (double& v : h) v = static_cast<double>(c) + 0.4 * rng.gaussian();
        ts.histograms.push_back(std::move(h));
        ts.labels.push_back(static_cast<int>(c));
      }
    }
    IknnConfig cfg;
    cfg.k = 1 + static_cast<int>(rng.below(5));
    cfg.m = 1;  // single subgroup: routing is a no-op
    cfg.seed = rng.next_u64();
    const IknnModel model = fit(ts, cfg);
    for (int q = 0; q < 6; ++q) {
      std::vector<double> query(dim);
      for (double& v : query) {
        v = static_cast<double>(rng.below(classes)) + 0.5 * rng.gaussian();
      }
      const Prediction got = predict(model, query);
      const int want = oracle::iknn_scan(ts, query, cfg.k);
      CHECK(got.label_index == want);
      ++checked;
    }
  }
  CHECK(checked == 240);
}

TEST_CASE("plain knn baselines") {
  TrainingSet ts = blob_set(10, 4, 71);

  SUBCASE("euclidean majority vote finds the blob") {
    CHECK(knn_predict(ts, std::vector<double>(4, 0.05), 5, KnnMetric::Euclidean) == "class0");
    CHECK(knn_predict(ts, std::vector<double>(4, 0.95), 5, KnnMetric::Euclidean) == "class1");
  }

  SUBCASE("inverse-distance weighting favors the closer class on a split vote") {
    TrainingSet pair;
    pair.class_names = {"near", "far"};
    pair.histograms = {{0.0}, {1.0}, {1.1}};
    pair.labels = {0, 1, 1};
    // query at 0.1: majority of 3 says "far", distance weighting says "near"
    CHECK(knn_predict(pair, {0.1}, 3, KnnMetric::Euclidean) == "far");
    CHECK(knn_predict(pair, {0.1}, 3, KnnMetric::InverseDistanceEuclidean) == "near");
  }

  SUBCASE("cosine ignores magnitude") {
    TrainingSet dir;
    dir.class_names = {"x", "y"};
    dir.histograms = {{1.0, 0.0}, {0.0, 1.0}};
    dir.labels = {0, 1};
    CHECK(knn_predict(dir, {100.0, 1.0}, 1, KnnMetric::Cosine) == "x");
    CHECK(knn_predict(dir, {1.0, 100.0}, 1, KnnMetric::Cosine) == "y");
    CHECK_THROWS_AS(knn_predict(dir, {0.0, 0.0}, 1, KnnMetric::Cosine), std::invalid_argument);
  }

  SUBCASE("one-bin cosine collapses to index-order tie-breaking") {
    // every pair of positive 1-bin vectors has angle 0, so all distances tie
    // and the k nearest are simply the first k training indices
    TrainingSet flat;
    flat.class_names = {"a", "b"};
    flat.histograms = {{2.0}, {3.0}, {10.0}, {0.5}, {7.0}};
    flat.labels = {0, 0, 1, 1, 1};
    CHECK(knn_predict(flat, {4.0}, 3, KnnMetric::Cosine) == "a");  // a,a,b
    CHECK(knn_predict(flat, {4.0}, 5, KnnMetric::Cosine) == "b");  // a,a,b,b,b
    CHECK(knn_predict(flat, {4.0}, 1, KnnMetric::Cosine) == "a");  // index 0
  }

  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(knn_predict(ts, std::vector<double>(4, 0.0), 0, KnnMetric::Euclidean),
                    std::invalid_argument);
    CHECK_THROWS_AS(knn_predict(ts, std::vector<double>(3, 0.0), 3, KnnMetric::Euclidean),
                    std::invalid_argument);
  }

  SUBCASE("metric names") {
    CHECK(std::string(metric_name(KnnMetric::Euclidean)) == "euclidean");
    CHECK(std::string(metric_name(KnnMetric::Cosine)) == "cosine");
    CHECK(std::string(metric_name(KnnMetric::InverseDistanceEuclidean)) == "inverse-distance");
  }
}
