#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "powerprint/eval.hpp"
#include "powerprint/features.hpp"
#include "powerprint/model_io.hpp"

using namespace powerprint;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "powerprint_persist_test") {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset tiny_dataset() {
  SynthConfig cfg;
  cfg.seed = 19;
  cfg.classes = benchmark_archetypes(3);
  cfg.signatures_per_class = 5;
  cfg.signal_length = 100;
  return generate_synthetic(cfg);
}

FeatureTable tiny_features(const Dataset& ds, const DescriptorSpec& spec) {
  return make_feature_table(ds, extract_all(spec, ds));
}

IknnModel tiny_fit(const FeatureTable& table, int k = 3, int m = 2, std::uint64_t seed = 5) {
  IknnConfig cfg;
  cfg.k = k;
  cfg.m = m;
  cfg.seed = seed;
  return fit(to_training_set(table), cfg);
}

}  // namespace

TEST_CASE("feature table round trip is byte-stable") {
  TempDir tmp;
  const Dataset ds = tiny_dataset();
  const FeatureTable table = tiny_features(ds, {});
  REQUIRE(table.size() == ds.size());
  REQUIRE(table.histograms[0].size() == 256);

  const fs::path first = tmp.path / "f1.csv";
  const fs::path second = tmp.path / "f2.csv";
  write_features_csv(table, first);
  const FeatureTable loaded = load_features_csv(first);
  REQUIRE(loaded.size() == table.size());
  CHECK(loaded.labels == table.labels);
  CHECK(loaded.sources == table.sources);
  CHECK(loaded.histograms == table.histograms);  // 17 digits: exact
  write_features_csv(loaded, second);
  CHECK(slurp(first) == slurp(second));
}

TEST_CASE("feature table mirrors the dataset order") {
  const Dataset ds = tiny_dataset();
  const FeatureTable table = tiny_features(ds, {});
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(table.labels[i] == ds.signals[i].label);
    CHECK(table.sources[i] == ds.signals[i].source_id);
  }
  CHECK_THROWS_AS(make_feature_table(ds, {}), std::invalid_argument);
}

TEST_CASE("feature csv loader reports malformed rows") {
  TempDir tmp;
  const fs::path p = tmp.path / "bad.csv";

  {
    std::ofstream out(p);
    out << "a,src0,0.5,0.5\n";
    out << "b,src1,0.5\n";  // narrower row
  }
  CHECK_THROWS_WITH_AS(load_features_csv(p), doctest::Contains("line 2"), std::runtime_error);

  {
    std::ofstream out(p);
    out << "a,src0,0.5,oops\n";
  }
  CHECK_THROWS_AS(load_features_csv(p), std::runtime_error);

  {
    std::ofstream out(p);
    out << "a,src0\n";  // no bins at all
  }
  CHECK_THROWS_AS(load_features_csv(p), std::runtime_error);

  { std::ofstream out(p); }
  CHECK_THROWS_WITH_AS(load_features_csv(p), doctest::Contains("no records"), std::runtime_error);

  CHECK_THROWS_AS(load_features_csv(tmp.path / "missing.csv"), std::runtime_error);
}

TEST_CASE("to_training_set keeps first-seen class order and rejects unlabeled rows") {
  FeatureTable table;
  table.labels = {"kettle", "fridge", "kettle", "heater"};
  table.sources = {"s0", "s1", "s2", "s3"};
  table.histograms = {{0.1, 0.9}, {0.5, 0.5}, {0.2, 0.8}, {0.9, 0.1}};
  const TrainingSet ts = to_training_set(table);
  CHECK(ts.class_names == std::vector<std::string>{"kettle", "fridge", "heater"});
  CHECK(ts.labels == std::vector<int>{0, 1, 0, 2});
  CHECK(ts.histograms == table.histograms);

  table.labels[2].clear();
  CHECK_THROWS_WITH_AS(to_training_set(table), doctest::Contains("s2"), std::invalid_argument);
}

TEST_CASE("model round trip reproduces every field") {
  TempDir tmp;
  const Dataset ds = tiny_dataset();
  ApplianceModel model;
  model.descriptor = {};
  model.knn = tiny_fit(tiny_features(ds, model.descriptor));

  const fs::path p = tmp.path / "m.model";
  save_model(model, p);
  const ApplianceModel loaded = load_model(p);

  CHECK(loaded.descriptor.kind == model.descriptor.kind);
  CHECK(loaded.descriptor.ltep_threshold == model.descriptor.ltep_threshold);
  CHECK(loaded.descriptor.bsif_seed == model.descriptor.bsif_seed);
  CHECK(!loaded.bsif_bank.has_value());
  CHECK(loaded.knn.train.class_names == model.knn.train.class_names);
  CHECK(loaded.knn.train.labels == model.knn.train.labels);
  CHECK(loaded.knn.train.histograms == model.knn.train.histograms);
  CHECK(loaded.knn.config.k == model.knn.config.k);
  CHECK(loaded.knn.config.m == model.knn.config.m);
  CHECK(loaded.knn.config.seed == model.knn.config.seed);
  CHECK(loaded.knn.class_priors == model.knn.class_priors);
  CHECK(loaded.knn.entropy == model.knn.entropy);
  CHECK(loaded.knn.class_weights == model.knn.class_weights);
  CHECK(loaded.knn.subgroups == model.knn.subgroups);
  CHECK(loaded.knn.centroids == model.knn.centroids);

  // a second save is byte-identical
  const fs::path p2 = tmp.path / "m2.model";
  save_model(loaded, p2);
  CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("loaded models predict identically") {
  TempDir tmp;
  const Dataset ds = tiny_dataset();
  ApplianceModel model;
  model.knn = tiny_fit(tiny_features(ds, model.descriptor));
  const fs::path p = tmp.path / "m.model";
  save_model(model, p);
  const ApplianceModel loaded = load_model(p);

  for (const auto& sig : ds.signals) {
    const auto h = extract(model.descriptor, sig).bins;
    const Prediction a = predict(model.knn, h);
    const Prediction b = predict(loaded.knn, h);
    CHECK(a.label == b.label);
    CHECK(a.score == b.score);
    CHECK(a.neighbor_ids == b.neighbor_ids);
  }
}

TEST_CASE("bsif models carry their filter bank") {
  TempDir tmp;
  const Dataset ds = tiny_dataset();
  ApplianceModel model;
  model.descriptor.kind = DescriptorKind::Bsif;
  model.descriptor.bsif_seed = 11;
  model.bsif_bank = generate_bsif_bank(11);
  model.knn = tiny_fit(tiny_features(ds, model.descriptor));

  const fs::path p = tmp.path / "b.model";
  save_model(model, p);
  const ApplianceModel loaded = load_model(p);
  REQUIRE(loaded.bsif_bank.has_value());
  CHECK(loaded.bsif_bank->seed == 11);
  CHECK(loaded.bsif_bank->filters == model.bsif_bank->filters);

  // a bank is mandatory for bsif and forbidden otherwise
  ApplianceModel missing = model;
  missing.bsif_bank.reset();
  CHECK_THROWS_AS(save_model(missing, tmp.path / "x.model"), std::invalid_argument);
  ApplianceModel extra;
  extra.knn = tiny_fit(tiny_features(ds, extra.descriptor));
  extra.bsif_bank = generate_bsif_bank(3);
  CHECK_THROWS_AS(save_model(extra, tmp.path / "x.model"), std::invalid_argument);
}

TEST_CASE("unfitted models cannot be saved") {
  TempDir tmp;
  ApplianceModel blank;
  CHECK_THROWS_AS(save_model(blank, tmp.path / "x.model"), std::invalid_argument);
}

TEST_CASE("loader rejects damaged files") {
  TempDir tmp;
  const Dataset ds = tiny_dataset();
  ApplianceModel model;
  model.knn = tiny_fit(tiny_features(ds, model.descriptor));
  const fs::path good = tmp.path / "good.model";
  save_model(model, good);

  const std::string text = slurp(good);
  const fs::path bad = tmp.path / "bad.model";

  SUBCASE("wrong magic") {
    std::ofstream out(bad, std::ios::binary);
    out << "SOMETHING-ELSE v1\n" << text.substr(text.find('\n') + 1);
    out.close();
    CHECK_THROWS_AS(load_model(bad), std::runtime_error);
  }

  SUBCASE("truncated") {
    std::ofstream out(bad, std::ios::binary);
    out << text.substr(0, text.size() / 2);
    out.close();
    CHECK_THROWS_AS(load_model(bad), std::runtime_error);
  }

  SUBCASE("missing end marker") {
    const auto pos = text.rfind("END");
    std::ofstream out(bad, std::ios::binary);
    out << text.substr(0, pos);
    out.close();
    CHECK_THROWS_AS(load_model(bad), std::runtime_error);
  }

  SUBCASE("number corrupted") {
    std::string mangled = text;
    const auto pos = mangled.find("config ");
    REQUIRE(pos != std::string::npos);
    mangled.replace(pos, 7, "config x");
    std::ofstream out(bad, std::ios::binary);
    out << mangled;
    out.close();
    CHECK_THROWS_AS(load_model(bad), std::runtime_error);
  }

  SUBCASE("missing file") { CHECK_THROWS_AS(load_model(tmp.path / "nope.model"), std::runtime_error); }
}
