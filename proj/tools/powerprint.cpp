// powerprint: appliance identification from power signatures.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "powerprint/descriptors.hpp"
#include "powerprint/eval.hpp"
#include "powerprint/eventdetect.hpp"
#include "powerprint/features.hpp"
#include "powerprint/iknn.hpp"
#include "powerprint/model_io.hpp"
#include "powerprint/parallel.hpp"
#include "powerprint/rng.hpp"
#include "powerprint/signal_io.hpp"
#include "powerprint/textio.hpp"

namespace pp = powerprint;

namespace {

struct DescriptorFlags {
  std::string name = "lph";
  double ltep_threshold = 0.02;
  std::uint64_t bsif_seed = 7;

  pp::DescriptorSpec spec() const {
    pp::DescriptorSpec s;
    s.kind = pp::parse_kind(name);
    s.ltep_threshold = ltep_threshold;
    s.bsif_seed = bsif_seed;
    return s;
  }
};

void add_descriptor_flags(CLI::App* cmd, DescriptorFlags& flags) {
  cmd->add_option("--descriptor", flags.name,
                  "Texture descriptor: lph, lbp, ldp, ltep, ltrp or bsif")
      ->capture_default_str();
  cmd->add_option("--ltep-thr", flags.ltep_threshold,
                  "Ternary band half-width (ltep only)")
      ->capture_default_str();
  cmd->add_option("--bsif-seed", flags.bsif_seed, "Filter bank seed (bsif only)")
      ->capture_default_str();
}

int resolve_threads(int threads) {
  return threads <= 0 ? pp::default_thread_count() : threads;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::uint64_t seed = 1;
  int classes = 8;
  int per_class = 40;
  int length = 400;
};

void run_synth(const SynthArgs& a) {
  pp::SynthConfig cfg;
  cfg.seed = a.seed;
  cfg.classes = pp::benchmark_archetypes(a.classes);
  cfg.signatures_per_class = a.per_class;
  cfg.signal_length = a.length;
  const pp::Dataset ds = pp::generate_synthetic(cfg);
  pp::write_csv(ds, a.out);
  std::cout << "wrote " << ds.size() << " signatures (" << cfg.classes.size()
            << " classes x " << a.per_class << ", length " << a.length << ") to "
            << a.out << "\n";
}

struct ExtractArgs {
  std::string in, out;
  DescriptorFlags desc;
  int threads = 0;
};

void run_extract(const ExtractArgs& a) {
  const pp::DescriptorSpec spec = a.desc.spec();
  const pp::Dataset ds = pp::load_csv(a.in);
  const auto feats = pp::extract_all(spec, ds, resolve_threads(a.threads));
  pp::write_features_csv(pp::make_feature_table(ds, feats), a.out);
  std::cout << "extracted " << pp::kind_name(spec.kind) << " histograms ("
            << pp::histogram_length(spec.kind) << " bins) for " << ds.size()
            << " signatures to " << a.out << "\n";
}

struct TrainArgs {
  std::string in, out;
  DescriptorFlags desc;
  int k = 5;
  int m = 0;
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  const pp::DescriptorSpec spec = a.desc.spec();
  const pp::FeatureTable table = pp::load_features_csv(a.in);
  const int expect = pp::histogram_length(spec.kind);
  if (static_cast<int>(table.histograms.front().size()) != expect) {
    throw std::runtime_error(
        "feature rows have " + std::to_string(table.histograms.front().size()) +
        " bins but descriptor '" + a.desc.name + "' produces " +
        std::to_string(expect) + "; pass the matching --descriptor");
  }
  pp::IknnConfig cfg;
  cfg.k = a.k;
  cfg.m = a.m;
  cfg.seed = a.seed;

  pp::ApplianceModel model;
  model.descriptor = spec;
  if (spec.kind == pp::DescriptorKind::Bsif) {
    model.bsif_bank = pp::generate_bsif_bank(spec.bsif_seed);
  }
  model.knn = pp::fit(pp::to_training_set(table), cfg);
  pp::save_model(model, a.out);

  const auto& knn = model.knn;
  std::cout << "trained on " << knn.train.size() << " signatures, "
            << knn.train.class_names.size() << " classes, " << knn.subgroups.size()
            << " subgroups (k=" << knn.config.k << ")\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "ensemble entropy %.5f bits\n", knn.entropy);
  std::cout << buf;
  std::cout << "saved model to " << a.out << "\n";
}

struct PredictArgs {
  std::string model, in, out;
  int threads = 0;
};

void run_predict(const PredictArgs& a) {
  const pp::ApplianceModel model = pp::load_model(a.model);
  const pp::FeatureTable table = pp::load_features_csv(a.in);
  const std::size_t expect = model.knn.train.histograms.front().size();
  if (table.histograms.front().size() != expect) {
    throw std::runtime_error("feature rows have " +
                             std::to_string(table.histograms.front().size()) +
                             " bins but the model expects " + std::to_string(expect));
  }

  std::vector<pp::Prediction> preds(table.size());
  pp::parallel_for(table.size(), resolve_threads(a.threads), [&](std::size_t i) {
    preds[i] = pp::predict(model.knn, table.histograms[i]);
  });

  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot open " + a.out + " for writing");
  std::size_t labeled = 0, correct = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.sources[i] << ',' << table.labels[i] << ',' << preds[i].label << ','
        << pp::format_double(preds[i].score) << '\n';
    if (!table.labels[i].empty()) {
      ++labeled;
      if (table.labels[i] == preds[i].label) ++correct;
    }
  }
  if (!out) throw std::runtime_error("write failed: " + a.out);

  std::cout << "predicted " << table.size() << " rows to " << a.out << "\n";
  if (labeled > 0) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "accuracy %.4f (%zu/%zu labeled rows correct)\n",
                  static_cast<double>(correct) / static_cast<double>(labeled), correct,
                  labeled);
    std::cout << buf;
  }
}

struct EvalArgs {
  std::string in, out, timings_out;
  DescriptorFlags desc;
  int k = 5;
  int m = 0;
  std::uint64_t knn_seed = 0;
  int folds = 10;
  std::uint64_t seed = 3;
  int threads = 0;
};

void write_eval_timings(const pp::EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "extract_seconds," << pp::format_double(report.extract_seconds) << '\n';
  out << "fold,train_seconds,test_seconds\n";
  for (std::size_t f = 0; f < report.fold_train_seconds.size(); ++f) {
    out << f << ',' << pp::format_double(report.fold_train_seconds[f]) << ','
        << pp::format_double(report.fold_test_seconds[f]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void run_eval(const EvalArgs& a) {
  const pp::DescriptorSpec spec = a.desc.spec();
  const pp::Dataset ds = pp::load_csv(a.in);
  pp::IknnConfig cfg;
  cfg.k = a.k;
  cfg.m = a.m;
  cfg.seed = a.knn_seed;
  const pp::EvalReport report =
      pp::kfold_eval(ds, spec, cfg, a.folds, a.seed, resolve_threads(a.threads));
  if (!a.out.empty()) pp::write_report_csv(report, a.desc.name, a.out);
  if (!a.timings_out.empty()) write_eval_timings(report, a.timings_out);
  std::cout << pp::format_text_report(report, a.desc.name);
  if (!a.out.empty()) std::cout << "wrote report to " << a.out << "\n";
}

struct CompareArgs {
  std::string in, out, timings_out;
  std::string descriptors = "all";
  double ltep_threshold = 0.02;
  std::uint64_t bsif_seed = 7;
  int k = 5;
  int m = 0;
  std::uint64_t knn_seed = 0;
  int folds = 10;
  std::uint64_t seed = 3;
  int threads = 0;
};

void run_compare(const CompareArgs& a) {
  std::vector<pp::DescriptorSpec> specs;
  if (a.descriptors == "all") {
    for (pp::DescriptorKind k : pp::kAllDescriptorKinds) {
      pp::DescriptorSpec s;
      s.kind = k;
      s.ltep_threshold = a.ltep_threshold;
      s.bsif_seed = a.bsif_seed;
      specs.push_back(s);
    }
  } else {
    for (std::string_view name : pp::split_fields(a.descriptors)) {
      pp::DescriptorSpec s;
      s.kind = pp::parse_kind(std::string(name));
      s.ltep_threshold = a.ltep_threshold;
      s.bsif_seed = a.bsif_seed;
      specs.push_back(s);
    }
  }

  const pp::Dataset ds = pp::load_csv(a.in);
  pp::IknnConfig cfg;
  cfg.k = a.k;
  cfg.m = a.m;
  cfg.seed = a.knn_seed;
  const auto rows = pp::compare_descriptors(ds, specs, cfg, a.folds, a.seed,
                                            resolve_threads(a.threads));
  if (!a.out.empty()) pp::write_compare_csv(rows, a.out);
  if (!a.timings_out.empty()) pp::write_compare_timings_csv(rows, a.timings_out);

  std::cout << "descriptor  bins  accuracy  macro_f1  extract_s\n";
  char buf[128];
  for (const pp::CompareRow& row : rows) {
    std::snprintf(buf, sizeof buf, "%-10s  %4d  %8.4f  %8.4f  %9.3f\n",
                  pp::kind_name(row.kind), row.histogram_length, row.report.accuracy,
                  row.report.macro_f1, row.report.extract_seconds);
    std::cout << buf;
  }
  std::cout << "fold hash " << rows.front().report.fold_hash << " ("
            << rows.front().report.folds << " folds, seed " << a.seed << ")\n";
  if (!a.out.empty()) std::cout << "wrote comparison to " << a.out << "\n";
}

struct NccArgs {
  std::string in, out;
  DescriptorFlags desc;
  int per_class = 6;
  std::uint64_t seed = 0;
};

void run_ncc(const NccArgs& a) {
  const pp::DescriptorSpec spec = a.desc.spec();
  const pp::Dataset ds = pp::load_csv(a.in);
  if (ds.class_names.empty()) {
    throw std::runtime_error("similarity analysis needs labeled signatures");
  }
  if (a.per_class < 2) throw std::runtime_error("--per-class must be >= 2");

  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot open " + a.out + " for writing");
  out << "class,signatures,mean_offdiag_raw,mean_offdiag_" << a.desc.name << '\n';
  std::cout << "class                 n  raw_sim   " << a.desc.name << "_sim\n";

  int hist_wins = 0, usable = 0;
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.signals[i].label == ds.class_names[c]) members.push_back(i);
    }
    if (members.size() < 2) {
      std::cerr << "warning: class '" << ds.class_names[c]
                << "' has fewer than 2 signatures, skipped\n";
      continue;
    }
    pp::Rng rng(pp::child_seed(a.seed, 0x4ECCULL, static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    members.resize(std::min<std::size_t>(members.size(),
                                         static_cast<std::size_t>(a.per_class)));
    std::sort(members.begin(), members.end());

    std::vector<std::vector<double>> raw, hist;
    for (std::size_t i : members) {
      raw.push_back(ds.signals[i].samples);
      hist.push_back(pp::extract(spec, ds.signals[i]).bins);
    }
    const double raw_sim = pp::ncc_matrix(raw).mean_off_diagonal();
    const double hist_sim = pp::ncc_matrix(hist).mean_off_diagonal();
    ++usable;
    if (hist_sim > raw_sim) ++hist_wins;

    out << ds.class_names[c] << ',' << members.size() << ','
        << pp::format_double(raw_sim) << ',' << pp::format_double(hist_sim) << '\n';
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-20s  %zu  %8.4f  %8.4f\n",
                  ds.class_names[c].c_str(), members.size(), raw_sim, hist_sim);
    std::cout << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + a.out);
  if (usable == 0) throw std::runtime_error("no class had 2 or more signatures");
  std::cout << "histogram similarity exceeds raw-signal similarity in " << hist_wins
            << "/" << usable << " classes\n";
}

struct DetectArgs {
  std::string in;
  std::string events_out = "events.csv";
  std::string segments_out = "segments.csv";
  double threshold_watts = 30.0;
  int smooth_window = 3;
};

void run_detect(const DetectArgs& a) {
  const pp::Dataset ds = pp::load_csv(a.in);
  std::ofstream ev(a.events_out);
  if (!ev) throw std::runtime_error("cannot open " + a.events_out + " for writing");

  pp::Dataset segments;
  std::size_t n_events = 0;
  for (const pp::PowerSignal& sig : ds.signals) {
    const auto events = pp::detect_edges(sig, a.threshold_watts, a.smooth_window);
    n_events += events.size();
    for (const pp::EdgeEvent& e : events) {
      ev << sig.source_id << ',' << e.index << ','
         << (e.kind == pp::EdgeKind::On ? "on" : "off") << ','
         << pp::format_double(e.delta_watts) << '\n';
    }
    const auto segs = pp::segment_between(sig, events);
    for (std::size_t j = 0; j < segs.size(); ++j) {
      pp::PowerSignal cut;
      cut.samples = segs[j].samples;
      cut.source_id = sig.source_id + "-seg" + std::to_string(j + 1);
      cut.sample_rate_hz = sig.sample_rate_hz;
      segments.signals.push_back(std::move(cut));
    }
  }
  if (!ev) throw std::runtime_error("write failed: " + a.events_out);
  pp::write_csv(segments, a.segments_out);
  std::cout << n_events << " events, " << segments.size() << " segments from "
            << ds.size() << " aggregate signals\n";
  std::cout << "events to " << a.events_out << ", segments to " << a.segments_out
            << "\n";
}

struct BenchArgs {
  std::string in;
  int repeat = 3;
  int threads = 0;
};

void run_bench(const BenchArgs& a) {
  if (a.repeat < 1) throw std::runtime_error("--repeat must be >= 1");
  const pp::Dataset ds = pp::load_csv(a.in);
  const int threads = resolve_threads(a.threads);

  std::cout << "extraction over " << ds.size() << " signatures, best of " << a.repeat
            << " runs, " << threads << " threads\n";
  std::cout << "descriptor  bins  seconds   vs_lph\n";
  double lph_seconds = 0.0;
  char buf[96];
  for (pp::DescriptorKind kind : pp::kAllDescriptorKinds) {
    pp::DescriptorSpec spec;
    spec.kind = kind;
    double best = 0.0;
    for (int r = 0; r < a.repeat; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      pp::extract_all(spec, ds, threads);
      const double s = elapsed(t0);
      if (r == 0 || s < best) best = s;
    }
    if (kind == pp::DescriptorKind::Lph) lph_seconds = best;
    std::snprintf(buf, sizeof buf, "%-10s  %4d  %8.4f  %6.2fx\n", pp::kind_name(kind),
                  pp::histogram_length(kind), best,
                  lph_seconds > 0.0 ? best / lph_seconds : 0.0);
    std::cout << buf;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"appliance identification from power signatures"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* c_synth = app.add_subcommand("synth", "Generate a synthetic signature set");
  c_synth->add_option("--out", synth.out, "Output dataset CSV")->required();
  c_synth->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  c_synth->add_option("--classes", synth.classes, "Number of appliance classes")
      ->capture_default_str();
  c_synth->add_option("--per-class", synth.per_class, "Signatures per class")
      ->capture_default_str();
  c_synth->add_option("--length", synth.length, "Samples per signature")
      ->capture_default_str();

  ExtractArgs extract;
  CLI::App* c_extract =
      app.add_subcommand("extract", "Extract texture histograms from signatures");
  c_extract->add_option("--in", extract.in, "Input dataset CSV")->required();
  c_extract->add_option("--out", extract.out, "Output feature CSV")->required();
  add_descriptor_flags(c_extract, extract.desc);
  c_extract->add_option("--threads", extract.threads, "Worker threads (0 = auto)")
      ->capture_default_str();

  TrainArgs train;
  CLI::App* c_train = app.add_subcommand("train", "Fit a classifier on feature rows");
  c_train->add_option("--in", train.in, "Input feature CSV")->required();
  c_train->add_option("--out", train.out, "Output model file")->required();
  add_descriptor_flags(c_train, train.desc);
  c_train->add_option("--k", train.k, "Neighbors per vote")->capture_default_str();
  c_train->add_option("--m", train.m, "Subgroups (0 = sqrt of training size)")
      ->capture_default_str();
  c_train->add_option("--seed", train.seed, "Partition seed")->capture_default_str();

  PredictArgs predict;
  CLI::App* c_predict = app.add_subcommand("predict", "Classify feature rows");
  c_predict->add_option("--model", predict.model, "Model file")->required();
  c_predict->add_option("--in", predict.in, "Input feature CSV")->required();
  c_predict->add_option("--out", predict.out, "Output prediction CSV")->required();
  c_predict->add_option("--threads", predict.threads, "Worker threads (0 = auto)")
      ->capture_default_str();

  EvalArgs eval;
  CLI::App* c_eval =
      app.add_subcommand("eval", "Cross-validate a descriptor on a labeled set");
  c_eval->add_option("--in", eval.in, "Input dataset CSV")->required();
  c_eval->add_option("--out", eval.out, "Report CSV (deterministic fields only)");
  c_eval->add_option("--timings-out", eval.timings_out, "Per-fold timing CSV");
  add_descriptor_flags(c_eval, eval.desc);
  c_eval->add_option("--k", eval.k, "Neighbors per vote")->capture_default_str();
  c_eval->add_option("--m", eval.m, "Subgroups (0 = sqrt of training size)")
      ->capture_default_str();
  c_eval->add_option("--knn-seed", eval.knn_seed, "Partition seed")
      ->capture_default_str();
  c_eval->add_option("--folds", eval.folds, "Cross-validation folds")
      ->capture_default_str();
  c_eval->add_option("--seed", eval.seed, "Fold assignment seed")->capture_default_str();
  c_eval->add_option("--threads", eval.threads, "Worker threads (0 = auto)")
      ->capture_default_str();

  CompareArgs compare;
  CLI::App* c_compare =
      app.add_subcommand("compare", "Cross-validate several descriptors side by side");
  c_compare->add_option("--in", compare.in, "Input dataset CSV")->required();
  c_compare->add_option("--out", compare.out, "Comparison CSV");
  c_compare->add_option("--timings-out", compare.timings_out, "Timing CSV");
  c_compare->add_option("--descriptors", compare.descriptors,
                        "Comma-separated descriptor names or 'all'")
      ->capture_default_str();
  c_compare->add_option("--ltep-thr", compare.ltep_threshold,
                        "Ternary band half-width (ltep only)")
      ->capture_default_str();
  c_compare->add_option("--bsif-seed", compare.bsif_seed, "Filter bank seed (bsif only)")
      ->capture_default_str();
  c_compare->add_option("--k", compare.k, "Neighbors per vote")->capture_default_str();
  c_compare->add_option("--m", compare.m, "Subgroups (0 = sqrt of training size)")
      ->capture_default_str();
  c_compare->add_option("--knn-seed", compare.knn_seed, "Partition seed")
      ->capture_default_str();
  c_compare->add_option("--folds", compare.folds, "Cross-validation folds")
      ->capture_default_str();
  c_compare->add_option("--seed", compare.seed, "Fold assignment seed")
      ->capture_default_str();
  c_compare->add_option("--threads", compare.threads, "Worker threads (0 = auto)")
      ->capture_default_str();

  NccArgs nccargs;
  CLI::App* c_ncc = app.add_subcommand(
      "ncc", "Within-class similarity of raw signals vs histograms");
  c_ncc->add_option("--in", nccargs.in, "Input dataset CSV")->required();
  c_ncc->add_option("--out", nccargs.out, "Summary CSV")->required();
  add_descriptor_flags(c_ncc, nccargs.desc);
  c_ncc->add_option("--per-class", nccargs.per_class, "Signatures sampled per class")
      ->capture_default_str();
  c_ncc->add_option("--seed", nccargs.seed, "Sampling seed")->capture_default_str();

  DetectArgs detect;
  CLI::App* c_detect =
      app.add_subcommand("detect", "Find on/off events in aggregate signals");
  c_detect->add_option("--in", detect.in, "Input aggregate CSV")->required();
  c_detect->add_option("--events-out", detect.events_out, "Event list CSV")
      ->capture_default_str();
  c_detect->add_option("--segments-out", detect.segments_out,
                       "Extracted segment dataset CSV")
      ->capture_default_str();
  c_detect->add_option("--threshold-watts", detect.threshold_watts,
                       "Minimum level change to report")
      ->capture_default_str();
  c_detect->add_option("--smooth-window", detect.smooth_window,
                       "Median pre-smoothing window (odd)")
      ->capture_default_str();

  BenchArgs bench;
  CLI::App* c_bench =
      app.add_subcommand("bench", "Time histogram extraction per descriptor");
  c_bench->add_option("--in", bench.in, "Input dataset CSV")->required();
  c_bench->add_option("--repeat", bench.repeat, "Runs per descriptor (best kept)")
      ->capture_default_str();
  c_bench->add_option("--threads", bench.threads, "Worker threads (0 = auto)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (c_synth->parsed()) run_synth(synth);
    if (c_extract->parsed()) run_extract(extract);
    if (c_train->parsed()) run_train(train);
    if (c_predict->parsed()) run_predict(predict);
    if (c_eval->parsed()) run_eval(eval);
    if (c_compare->parsed()) run_compare(compare);
    if (c_ncc->parsed()) run_ncc(nccargs);
    if (c_detect->parsed()) run_detect(detect);
    if (c_bench->parsed()) run_bench(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
