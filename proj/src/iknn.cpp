#include "powerprint/iknn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "powerprint/rng.hpp"

namespace powerprint {

namespace {

constexpr double kVoteEpsilon = 1e-9;
constexpr double kWeightFloor = 0.1;
constexpr double kWeightCeil = 10.0;
constexpr int kMaxLloydRounds = 20;

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void validate_training(const TrainingSet& t) {
  if (t.histograms.empty()) throw std::invalid_argument("empty training set");
  if (t.labels.size() != t.histograms.size()) {
    throw std::invalid_argument("training labels/histograms size mismatch");
  }
  const std::size_t dim = t.histograms.front().size();
  if (dim == 0) throw std::invalid_argument("empty training histogram");
  for (const auto& h : t.histograms) {
    if (h.size() != dim) {
      throw std::invalid_argument("training histograms have mixed lengths");
    }
  }
  const int c = static_cast<int>(t.class_names.size());
  int distinct = 0;
  std::vector<char> seen(static_cast<std::size_t>(c), 0);
  for (int lab : t.labels) {
    if (lab < 0 || lab >= c) throw std::invalid_argument("training label out of range");
    if (!seen[static_cast<std::size_t>(lab)]) {
      seen[static_cast<std::size_t>(lab)] = 1;
      ++distinct;
    }
  }
  if (distinct < 2) {
    throw std::invalid_argument("training set needs at least 2 classes");
  }
}

// Farthest-point seeding then Lloyd refinement, all tie-breaks by index.
void build_partition(IknnModel& model, int m, std::uint64_t seed) {
  const auto& h = model.train.histograms;
  const std::size_t n = h.size();
  Rng rng(seed);

  std::vector<std::size_t> seeds;
  seeds.push_back(rng.below(n));
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = dist2(h[i], h[seeds[0]]);
  while (static_cast<int>(seeds.size()) < m) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (nearest[i] > nearest[far]) far = i;
    }
    seeds.push_back(far);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], dist2(h[i], h[far]));
    }
  }

  std::vector<std::vector<double>> centroids;
  centroids.reserve(static_cast<std::size_t>(m));
  for (std::size_t s : seeds) centroids.push_back(h[s]);

  std::vector<int> assign(n, -1);
  for (int round = 0; round < kMaxLloydRounds; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = dist2(h[i], centroids[0]);
      for (int g = 1; g < m; ++g) {
        const double d = dist2(h[i], centroids[static_cast<std::size_t>(g)]);
        if (d < bd) {
          bd = d;
          best = g;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }

    std::vector<int> sizes(static_cast<std::size_t>(m), 0);
    for (int a : assign) ++sizes[static_cast<std::size_t>(a)];
    for (int g = 0; g < m; ++g) {
      if (sizes[static_cast<std::size_t>(g)] > 0) continue;
      // Re-seed an empty subgroup with the point farthest from its own
      // centroid, taken from a subgroup that can spare a member.
      std::size_t pick = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const int a = assign[i];
        if (sizes[static_cast<std::size_t>(a)] < 2) continue;
        const double d = dist2(h[i], centroids[static_cast<std::size_t>(a)]);
        if (d > far_d) {
          far_d = d;
          pick = i;
        }
      }
      if (pick == n) break;  // nothing to move; m > usable points
      --sizes[static_cast<std::size_t>(assign[pick])];
      assign[pick] = g;
      ++sizes[static_cast<std::size_t>(g)] ;
      changed = true;
    }

    const std::size_t dim = h.front().size();
    for (int g = 0; g < m; ++g) {
      auto& c = centroids[static_cast<std::size_t>(g)];
      std::fill(c.begin(), c.end(), 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto& c = centroids[static_cast<std::size_t>(assign[i])];
      const auto& x = h[i];
      for (std::size_t d = 0; d < dim; ++d) c[d] += x[d];
    }
    for (int g = 0; g < m; ++g) {
      const int sz = sizes[static_cast<std::size_t>(g)];
      if (sz == 0) continue;
      auto& c = centroids[static_cast<std::size_t>(g)];
      const double inv = 1.0 / sz;
      for (double& v : c) v *= inv;
    }
    if (!changed && round > 0) break;
  }

  model.subgroups.assign(static_cast<std::size_t>(m), {});
  for (std::size_t i = 0; i < n; ++i) {
    model.subgroups[static_cast<std::size_t>(assign[i])].push_back(static_cast<int>(i));
  }
  model.centroids = std::move(centroids);
}

}  // namespace

IknnModel fit(TrainingSet train, const IknnConfig& cfg) {
  validate_training(train);
  const std::size_t n = train.size();
  if (cfg.k < 1 || static_cast<std::size_t>(cfg.k) > n) {
    throw std::invalid_argument("k must be in [1, training size], got " +
                                std::to_string(cfg.k));
  }
  if (cfg.m < 0 || static_cast<std::size_t>(cfg.m) > n) {
    throw std::invalid_argument("subgroup count must be in [0, training size]");
  }

  IknnModel model;
  model.train = std::move(train);
  model.config = cfg;
  if (model.config.m == 0) {
    const int auto_m = static_cast<int>(std::sqrt(static_cast<double>(n)));
    model.config.m = std::max(2, auto_m);
  }
  model.config.m = std::min(model.config.m, static_cast<int>(n));

  const std::size_t c = model.train.class_names.size();
  model.class_priors.assign(c, 0.0);
  for (int lab : model.train.labels) {
    model.class_priors[static_cast<std::size_t>(lab)] += 1.0;
  }
  for (double& p : model.class_priors) p /= static_cast<double>(n);

  model.entropy = 0.0;
  for (double p : model.class_priors) {
    if (p > 0.0) model.entropy -= p * std::log2(p);
  }

  model.class_weights.assign(c, kWeightCeil);
  for (std::size_t i = 0; i < c; ++i) {
    const double p = model.class_priors[i];
    if (p > 0.0 && model.entropy > 0.0) {
      const double w = -std::log2(p) / model.entropy;
      model.class_weights[i] = std::clamp(w, kWeightFloor, kWeightCeil);
    }
  }

  build_partition(model, model.config.m, model.config.seed);
  return model;
}

int nearest_subgroup(const IknnModel& model, const std::vector<double>& histogram) {
  if (model.centroids.empty()) throw std::invalid_argument("model is not fitted");
  if (histogram.size() != model.centroids.front().size()) {
    throw std::invalid_argument("histogram length " + std::to_string(histogram.size()) +
                                " does not match model (expected " +
                                std::to_string(model.centroids.front().size()) + ")");
  }
  int best = 0;
  double bd = dist2(histogram, model.centroids[0]);
  for (std::size_t g = 1; g < model.centroids.size(); ++g) {
    const double d = dist2(histogram, model.centroids[g]);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(g);
    }
  }
  return best;
}

Prediction predict(const IknnModel& model, const std::vector<double>& histogram) {
  const int g = nearest_subgroup(model, histogram);
  const auto& members = model.subgroups[static_cast<std::size_t>(g)];
  if (members.empty()) throw std::invalid_argument("model has an empty subgroup");

  struct Cand {
    double wd;
    int id;
  };
  std::vector<Cand> cands;
  cands.reserve(members.size());
  for (int id : members) {
    const int lab = model.train.labels[static_cast<std::size_t>(id)];
    const double w = model.class_weights[static_cast<std::size_t>(lab)];
    const double d2 = dist2(histogram, model.train.histograms[static_cast<std::size_t>(id)]);
    cands.push_back({std::sqrt(w * d2), id});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.wd != b.wd) return a.wd < b.wd;
    return a.id < b.id;
  });
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(model.config.k),
                                              cands.size());

  std::vector<double> votes(model.train.class_names.size(), 0.0);
  Prediction pred;
  pred.neighbor_ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const int id = cands[i].id;
    const int lab = model.train.labels[static_cast<std::size_t>(id)];
    const double w = model.class_weights[static_cast<std::size_t>(lab)];
    votes[static_cast<std::size_t>(lab)] += w / (cands[i].wd + kVoteEpsilon);
    pred.neighbor_ids.push_back(id);
  }

  int best = 0;
  for (std::size_t cidx = 1; cidx < votes.size(); ++cidx) {
    if (votes[cidx] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(cidx);
  }
  pred.label_index = best;
  pred.label = model.train.class_names[static_cast<std::size_t>(best)];
  pred.score = votes[static_cast<std::size_t>(best)];
  return pred;
}

// ---------------------------------------------------------------------------

const char* metric_name(KnnMetric metric) {
  switch (metric) {
    case KnnMetric::Euclidean: return "euclidean";
    case KnnMetric::Cosine: return "cosine";
    case KnnMetric::InverseDistanceEuclidean: return "inverse-distance";
  }
  return "?";
}

std::string knn_predict(const TrainingSet& train, const std::vector<double>& histogram,
                        int k, KnnMetric metric) {
  validate_training(train);
  const std::size_t n = train.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("k must be in [1, training size]");
  }
  if (histogram.size() != train.histograms.front().size()) {
    throw std::invalid_argument("histogram length does not match training set");
  }

  struct Cand {
    double d;
    int id;
  };
  std::vector<Cand> cands;
  cands.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = train.histograms[i];
    double d;
    if (metric == KnnMetric::Cosine) {
      double dot = 0.0, nx = 0.0, ny = 0.0;
      for (std::size_t t = 0; t < x.size(); ++t) {
        dot += x[t] * histogram[t];
        nx += x[t] * x[t];
        ny += histogram[t] * histogram[t];
      }
      if (nx == 0.0 || ny == 0.0) {
        throw std::invalid_argument("cosine metric needs non-zero vectors");
      }
      d = 1.0 - dot / (std::sqrt(nx) * std::sqrt(ny));
    } else {
      d = std::sqrt(dist2(x, histogram));
    }
    cands.push_back({d, static_cast<int>(i)});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.id < b.id;
  });

  std::vector<double> votes(train.class_names.size(), 0.0);
  for (int i = 0; i < k; ++i) {
    const int lab = train.labels[static_cast<std::size_t>(cands[static_cast<std::size_t>(i)].id)];
    const double w = metric == KnnMetric::InverseDistanceEuclidean
                         ? 1.0 / (cands[static_cast<std::size_t>(i)].d + kVoteEpsilon)
                         : 1.0;
    votes[static_cast<std::size_t>(lab)] += w;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return train.class_names[best];
}

}  // namespace powerprint
