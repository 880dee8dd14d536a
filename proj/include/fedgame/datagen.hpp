#pragma once
// Synthetic dataset generation, non-iid partition construction and the
// label-distribution distance used everywhere else.

#include <cmath>
#include <string>
#include <vector>

#include "fedgame/core.hpp"

namespace fedgame::datagen {

using fedgame::ConfigError;
using fedgame::LabelDistribution;
using fedgame::RngStream;

// ---------------------------------------------------------------------------
// Partition construction.

enum class PartitionMode { majority_longtail, class_count };

struct PartitionSpec {
  PartitionMode mode = PartitionMode::majority_longtail;
  double delta_target = 0.5;   // majority fraction (majority_longtail mode)
  double longtail_ratio = 1.0; // geometric decay of minority masses, (0,1]
  int class_count_p = 1;       // number of populated classes (class_count mode)
  int majority_class = 0;
};

// majority_longtail: the majority class receives delta_target; the remaining
// mass is split over the other I-1 classes (in index order after the majority
// class, wrapping) with geometric weights ratio^j, normalized.
// class_count: the majority class plus the next p-1 indices (wrapping) each
// receive 1/p.
inline LabelDistribution make_label_distribution(const PartitionSpec& spec, int classes) {
  if (classes < 2) throw ConfigError("make_label_distribution: num_classes_I must be >= 2");
  if (spec.majority_class < 0 || spec.majority_class >= classes)
    throw ConfigError("make_label_distribution: majority_class out of range");

  std::vector<double> p(static_cast<std::size_t>(classes), 0.0);
  if (spec.mode == PartitionMode::majority_longtail) {
    if (spec.delta_target < 0.0 || spec.delta_target > 1.0)
      throw ConfigError("make_label_distribution: delta_target must lie in [0,1]");
    if (!(spec.longtail_ratio > 0.0) || spec.longtail_ratio > 1.0)
      throw ConfigError("make_label_distribution: longtail_ratio must lie in (0,1]");
    p[static_cast<std::size_t>(spec.majority_class)] = spec.delta_target;
    double minority = 1.0 - spec.delta_target;
    if (minority > 0.0) {
      double w = 1.0;
      double total = 0.0;
      std::vector<double> tail(static_cast<std::size_t>(classes - 1));
      for (int j = 0; j < classes - 1; ++j) {
        tail[static_cast<std::size_t>(j)] = w;
        total += w;
        w *= spec.longtail_ratio;
      }
      for (int j = 0; j < classes - 1; ++j) {
        int cls = (spec.majority_class + 1 + j) % classes;
        p[static_cast<std::size_t>(cls)] =
            minority * tail[static_cast<std::size_t>(j)] / total;
      }
    }
  } else {
    if (spec.class_count_p < 1 || spec.class_count_p > classes)
      throw ConfigError("make_label_distribution: class_count_p must lie in [1, I]");
    for (int j = 0; j < spec.class_count_p; ++j) {
      int cls = (spec.majority_class + j) % classes;
      p[static_cast<std::size_t>(cls)] = 1.0 / static_cast<double>(spec.class_count_p);
    }
  }
  return LabelDistribution(std::move(p));
}

// ---------------------------------------------------------------------------
// The non-iid degree: half the L1 distance between two label distributions.

inline double wasserstein_delta(const LabelDistribution& pk, const LabelDistribution& pc) {
  if (pk.size() != pc.size())
    throw ConfigError("wasserstein_delta: dimension mismatch (" +
                      std::to_string(pk.size()) + " vs " + std::to_string(pc.size()) + ")");
  double acc = 0.0;
  for (int i = 0; i < pk.size(); ++i) acc += std::abs(pk[i] - pc[i]);
  return 0.5 * acc;
}

// Inverts wasserstein_delta(make_label_distribution(...), uniform) for the
// ratio = 1 majority/long-tail family: a majority fraction of w + 1/I yields
// distance w against uniform. Targets above (I-1)/I clamp to one-hot.
inline PartitionSpec partition_for_wasserstein(double delta_w, int classes, int majority) {
  if (delta_w < 0.0) throw ConfigError("partition_for_wasserstein: negative target");
  PartitionSpec spec;
  spec.mode = PartitionMode::majority_longtail;
  spec.longtail_ratio = 1.0;
  spec.majority_class = majority;
  spec.delta_target = std::min(1.0, delta_w + 1.0 / static_cast<double>(classes));
  return spec;
}

// ---------------------------------------------------------------------------
// Effort-to-distance map. delta(e) = exp(-e), non-increasing on [0,1].

enum class EffortForm { exponential };

struct EffortMap {
  EffortForm form = EffortForm::exponential;
};

inline double effort_to_delta(double e, const EffortMap& map = {}) {
  (void)map;  // single form for now
  if (e < 0.0 || e > 1.0)
    throw ConfigError("effort_to_delta: effort must lie in [0,1], got " + std::to_string(e));
  return std::exp(-e);
}

struct EffortInversion {
  double effort = 0.0;
  bool clamped = false;
};

inline EffortInversion delta_to_effort(double delta, const EffortMap& map = {}) {
  (void)map;
  if (!(delta > 0.0)) throw ConfigError("delta_to_effort: delta must be positive");
  double e = -std::log(delta);
  EffortInversion inv;
  inv.clamped = (e < 0.0 || e > 1.0);
  inv.effort = std::min(1.0, std::max(0.0, e));
  return inv;
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian classification task. Class means sit on scaled
// coordinate axes so that classes are linearly separable at the configured
// separation (works best with feature_dim >= classes).

struct GaussianTaskParams {
  int feature_dim = 32;
  double class_separation = 2.0;
  double noise_sigma = 1.0;
};

inline std::vector<double> class_mean(int cls, const GaussianTaskParams& gen) {
  std::vector<double> m(static_cast<std::size_t>(gen.feature_dim), 0.0);
  int axis = cls % gen.feature_dim;
  double sign = ((cls / gen.feature_dim) % 2 == 0) ? 1.0 : -1.0;
  m[static_cast<std::size_t>(axis)] = sign * gen.class_separation;
  return m;
}

struct LabeledDataset {
  int n = 0;
  int d = 0;
  int classes = 0;
  std::vector<double> features;  // row-major n x d
  std::vector<int> labels;       // values in [0, classes)
  LabelDistribution empirical = LabelDistribution::uniform(2);

  const double* row(int i) const { return features.data() + static_cast<std::size_t>(i) * d; }
};

inline LabelDistribution empirical_distribution(const std::vector<int>& labels, int classes) {
  std::vector<double> counts(static_cast<std::size_t>(classes), 0.0);
  for (int y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
  return LabelDistribution::normalized(std::move(counts));
}

inline LabeledDataset sample_dataset(const LabelDistribution& dist, int n,
                                     const GaussianTaskParams& gen, RngStream& rng) {
  if (n < 1) throw ConfigError("sample_dataset: n must be >= 1");
  LabeledDataset ds;
  ds.n = n;
  ds.d = gen.feature_dim;
  ds.classes = dist.size();
  ds.features.resize(static_cast<std::size_t>(n) * gen.feature_dim);
  ds.labels.resize(static_cast<std::size_t>(n));

  std::vector<std::vector<double>> means(static_cast<std::size_t>(dist.size()));
  for (int c = 0; c < dist.size(); ++c) means[static_cast<std::size_t>(c)] = class_mean(c, gen);

  for (int i = 0; i < n; ++i) {
    int y = rng.categorical(dist);
    ds.labels[static_cast<std::size_t>(i)] = y;
    const auto& m = means[static_cast<std::size_t>(y)];
    double* row = ds.features.data() + static_cast<std::size_t>(i) * gen.feature_dim;
    for (int j = 0; j < gen.feature_dim; ++j)
      row[static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(j)] + gen.noise_sigma * rng.gaussian();
  }
  ds.empirical = empirical_distribution(ds.labels, dist.size());
  return ds;
}

// Per-class feature pool: `per_class` samples for each of `classes` classes.
// All agents of a round share one pool set, so class-conditional gradient
// estimates coincide across agents and heterogeneity enters only through the
// label weights.
inline std::vector<std::vector<double>> sample_class_pools(int classes, int per_class,
                                                           const GaussianTaskParams& gen,
                                                           RngStream& rng) {
  std::vector<std::vector<double>> pools(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    auto m = class_mean(c, gen);
    auto& pool = pools[static_cast<std::size_t>(c)];
    pool.resize(static_cast<std::size_t>(per_class) * gen.feature_dim);
    for (int s = 0; s < per_class; ++s) {
      double* row = pool.data() + static_cast<std::size_t>(s) * gen.feature_dim;
      for (int j = 0; j < gen.feature_dim; ++j)
        row[static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(j)] + gen.noise_sigma * rng.gaussian();
    }
  }
  return pools;
}

}  // namespace fedgame::datagen
