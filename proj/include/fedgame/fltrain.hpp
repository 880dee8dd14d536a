#pragma once
// FedAvg training engine: local SGD with per-sample gradient clipping,
// weighted aggregation, divergence and gradient-gap diagnostics, and
// evaluation on a held-out reference dataset.
//
// Local updates follow the label-decomposed form: the gradient is the
// label-weighted sum of class-conditional gradient estimates. Conditional
// estimates are computed on per-round class pools shared by all agents, so
// data heterogeneity enters the updates only through the label weights and
// the divergence/gradient-variance premises hold by construction.

#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fedgame/bounds.hpp"
#include "fedgame/core.hpp"
#include "fedgame/datagen.hpp"
#include "fedgame/model.hpp"
#include "fedgame/trace.hpp"

namespace fedgame::fltrain {

using datagen::GaussianTaskParams;
using datagen::LabeledDataset;
using datagen::PartitionSpec;

// ---------------------------------------------------------------------------
// Aggregation and divergence over flat parameter views.

inline std::vector<double> aggregate_flat(const std::vector<std::vector<double>>& params,
                                          const std::vector<double>& weights) {
  if (params.empty()) throw ConfigError("aggregate: no models");
  if (params.size() != weights.size())
    throw ConfigError("aggregate: models/weights size mismatch");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("aggregate: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw ConfigError("aggregate: weights must sum to 1 (got " + std::to_string(wsum) + ")");
  std::vector<double> out(params[0].size(), 0.0);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size() != out.size())
      throw ConfigError("aggregate: parameter length mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * params[k][i];
  }
  return out;
}

inline Model aggregate(const std::vector<Model>& models, const std::vector<double>& weights) {
  std::vector<std::vector<double>> flats;
  flats.reserve(models.size());
  for (const auto& m : models) flats.push_back(m.flat());
  return Model(models[0].shape(), aggregate_flat(flats, weights));
}

// sum_k p_k ||wbar - w_k||^2 with wbar the weighted average.
inline double measure_divergence_flat(const std::vector<std::vector<double>>& params,
                                      const std::vector<double>& weights) {
  std::vector<double> wbar = aggregate_flat(params, weights);
  double acc = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    double d = 0.0;
    for (std::size_t i = 0; i < wbar.size(); ++i) {
      double diff = wbar[i] - params[k][i];
      d += diff * diff;
    }
    acc += weights[k] * d;
  }
  return acc;
}

inline double measure_divergence(const std::vector<Model>& models,
                                 const std::vector<double>& weights) {
  std::vector<std::vector<double>> flats;
  flats.reserve(models.size());
  for (const auto& m : models) flats.push_back(m.flat());
  return measure_divergence_flat(flats, weights);
}

// ---------------------------------------------------------------------------
// Evaluation: mean cross-entropy and top-1 accuracy (ties break toward the
// lowest class index).

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

inline Evaluation evaluate(const Model& model, const LabeledDataset& ds) {
  if (ds.n < 1) throw ConfigError("evaluate: empty dataset");
  double loss = 0.0;
  long correct = 0;
  for (int i = 0; i < ds.n; ++i) {
    const double* x = ds.row(i);
    loss += model.sample_loss(x, ds.labels[static_cast<std::size_t>(i)]);
    if (model.predict(x) == ds.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return {loss / ds.n, static_cast<double>(correct) / ds.n};
}

// ---------------------------------------------------------------------------
// Local SGD.

// Mean of per-sample clipped gradients of class `cls` over a feature pool.
inline std::vector<double> conditional_clipped_gradient(const Model& model,
                                                        const std::vector<double>& pool,
                                                        int cls, int feature_dim, double mu,
                                                        double G) {
  std::size_t m = pool.size() / static_cast<std::size_t>(feature_dim);
  std::vector<double> mean(model.flat().size(), 0.0);
  std::vector<double> g;
  for (std::size_t s = 0; s < m; ++s) {
    clipped_sample_gradient(model, pool.data() + s * feature_dim, cls, mu, G, g);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += g[i];
  }
  for (double& v : mean) v /= static_cast<double>(m);
  return mean;
}

// One SGD step on an explicit batch: per-sample gradients are clipped to G
// before averaging. Grouping by label makes this the label-weighted sum of
// class-conditional estimates.
inline void local_sgd_step(Model& model, const LabeledDataset& batch, double eta, double G,
                           double mu, long epoch_for_fault = -1) {
  if (!(eta > 0.0) || !(G > 0.0)) throw ConfigError("local_sgd_step: eta and G must be > 0");
  std::vector<double> mean(model.flat().size(), 0.0);
  std::vector<double> g;
  for (int i = 0; i < batch.n; ++i) {
    clipped_sample_gradient(model, batch.row(i), batch.labels[static_cast<std::size_t>(i)], mu,
                            G, g);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += g[j];
  }
  auto& p = model.flat();
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] -= eta * mean[j] / batch.n;
    if (!std::isfinite(p[j]))
      throw NumericalFault("local_sgd_step: non-finite parameter", epoch_for_fault);
  }
}

// One SGD step against label weights q and shared class pools.
inline void local_sgd_step_pools(Model& model, const std::vector<double>& label_weights,
                                 const std::vector<std::vector<double>>& pools,
                                 int feature_dim, double eta, double G, double mu,
                                 long epoch_for_fault) {
  std::vector<double> grad(model.flat().size(), 0.0);
  for (std::size_t c = 0; c < label_weights.size(); ++c) {
    double q = label_weights[c];
    if (q <= 0.0) continue;
    auto cond =
        conditional_clipped_gradient(model, pools[c], static_cast<int>(c), feature_dim, mu, G);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += q * cond[i];
  }
  auto& p = model.flat();
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] -= eta * grad[i];
    if (!std::isfinite(p[i]))
      throw NumericalFault("local_sgd_step: non-finite parameter", epoch_for_fault);
  }
}

// ---------------------------------------------------------------------------
// Gradient gap: || grad F_k(w) - grad F(w) ||^2 per agent at a shared
// evaluation point. Class-conditional gradients are estimated on the pooled
// class samples of all agents; agent k enters through its label fractions, so
// grad F corresponds exactly to the mixture distribution sum_k p_k p^(k).

struct GradientGapReport {
  std::vector<double> gap_sq;        // per agent
  std::vector<double> bound;         // 4 G^2 delta_k^2
  std::vector<double> delta_mixture; // Eq-distance of agent labels vs the mixture
  std::vector<double> raw_norm_max;  // unclipped per-sample gradient norms, per agent
  std::vector<double> raw_norm_mean;
  std::vector<double> sigma_hat;     // per-agent std of clipped per-sample gradients
  int violations = 0;
  bool compliant() const { return violations == 0; }
};

inline GradientGapReport measure_gradient_gap(const Model& w,
                                              const std::vector<LabeledDataset>& agent_data,
                                              const std::vector<double>& weights, double G,
                                              double mu) {
  const std::size_t N = agent_data.size();
  if (N == 0) throw ConfigError("measure_gradient_gap: no agents");
  const int I = agent_data[0].classes;
  const int d = agent_data[0].d;

  // Label fractions per agent and their exact mixture.
  std::vector<std::vector<double>> q(N, std::vector<double>(static_cast<std::size_t>(I), 0.0));
  std::vector<double> mix(static_cast<std::size_t>(I), 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    for (int y : agent_data[k].labels) q[k][static_cast<std::size_t>(y)] += 1.0;
    for (int c = 0; c < I; ++c) q[k][static_cast<std::size_t>(c)] /= agent_data[k].n;
    for (int c = 0; c < I; ++c) mix[static_cast<std::size_t>(c)] += weights[k] * q[k][static_cast<std::size_t>(c)];
  }

  // Pooled class-conditional clipped gradients at w, plus raw norm stats.
  std::vector<std::vector<double>> cond(static_cast<std::size_t>(I),
                                        std::vector<double>(w.flat().size(), 0.0));
  std::vector<long> cond_count(static_cast<std::size_t>(I), 0);
  GradientGapReport rep;
  rep.raw_norm_max.assign(N, 0.0);
  rep.raw_norm_mean.assign(N, 0.0);
  rep.sigma_hat.assign(N, 0.0);

  std::vector<double> g;
  std::vector<std::vector<double>> agent_mean(N, std::vector<double>(w.flat().size(), 0.0));
  std::vector<double> agent_sq(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    const auto& ds = agent_data[k];
    for (int i = 0; i < ds.n; ++i) {
      int y = ds.labels[static_cast<std::size_t>(i)];
      g.assign(w.flat().size(), 0.0);
      w.accumulate_sample_gradient(ds.row(i), y, g, 1.0);
      add_l2_gradient(w, g, mu);
      double raw = norm2(g);
      rep.raw_norm_max[k] = std::max(rep.raw_norm_max[k], raw);
      rep.raw_norm_mean[k] += raw;
      clip_to_norm(g, G);
      auto& acc = cond[static_cast<std::size_t>(y)];
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
      cond_count[static_cast<std::size_t>(y)]++;
      for (std::size_t j = 0; j < g.size(); ++j) agent_mean[k][j] += g[j];
      double n2 = 0.0;
      for (double v : g) n2 += v * v;
      agent_sq[k] += n2;
    }
    rep.raw_norm_mean[k] /= ds.n;
    for (double& v : agent_mean[k]) v /= ds.n;
    double mean_sq = 0.0;
    for (double v : agent_mean[k]) mean_sq += v * v;
    rep.sigma_hat[k] = std::sqrt(std::max(0.0, agent_sq[k] / ds.n - mean_sq));
  }
  for (int c = 0; c < I; ++c) {
    if (cond_count[static_cast<std::size_t>(c)] > 0)
      for (double& v : cond[static_cast<std::size_t>(c)])
        v /= static_cast<double>(cond_count[static_cast<std::size_t>(c)]);
  }

  // grad F_k = sum_i q_ik ghat_i ; grad F = sum_i mix_i ghat_i.
  std::vector<double> grad_global(w.flat().size(), 0.0);
  for (int c = 0; c < I; ++c)
    for (std::size_t j = 0; j < grad_global.size(); ++j)
      grad_global[j] += mix[static_cast<std::size_t>(c)] * cond[static_cast<std::size_t>(c)][j];

  rep.gap_sq.assign(N, 0.0);
  rep.bound.assign(N, 0.0);
  rep.delta_mixture.assign(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    std::vector<double> gk(w.flat().size(), 0.0);
    for (int c = 0; c < I; ++c)
      for (std::size_t j = 0; j < gk.size(); ++j)
        gk[j] += q[k][static_cast<std::size_t>(c)] * cond[static_cast<std::size_t>(c)][j];
    double gap = 0.0;
    for (std::size_t j = 0; j < gk.size(); ++j) {
      double diff = gk[j] - grad_global[j];
      gap += diff * diff;
    }
    double delta = 0.0;
    for (int c = 0; c < I; ++c)
      delta += std::abs(q[k][static_cast<std::size_t>(c)] - mix[static_cast<std::size_t>(c)]);
    delta *= 0.5;
    rep.gap_sq[k] = gap;
    rep.delta_mixture[k] = delta;
    rep.bound[k] = 4.0 * G * G * delta * delta;
    if (gap > rep.bound[k] + 1e-12) rep.violations++;
  }
  return rep;
}

// Empirical smoothness probe: max ||grad F(w1)-grad F(w2)|| / ||w1-w2|| over
// random parameter pairs near the given model.
inline double estimate_empirical_L(const Model& at, const LabeledDataset& ds, double mu,
                                   RngStream& rng, int pairs = 8, double radius = 0.5) {
  auto full_gradient = [&](const Model& m) {
    std::vector<double> grad(m.flat().size(), 0.0);
    for (int i = 0; i < ds.n; ++i)
      m.accumulate_sample_gradient(ds.row(i), ds.labels[static_cast<std::size_t>(i)], grad,
                                   1.0 / ds.n);
    add_l2_gradient(m, grad, mu);
    return grad;
  };
  double best = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Model a = at, b = at;
    for (auto& v : a.flat()) v += radius * rng.gaussian();
    for (auto& v : b.flat()) v += radius * rng.gaussian();
    auto ga = full_gradient(a), gb = full_gradient(b);
    double dg = 0.0, dw = 0.0;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      double d1 = ga[i] - gb[i];
      double d2 = a.flat()[i] - b.flat()[i];
      dg += d1 * d1;
      dw += d2 * d2;
    }
    if (dw > 0.0) best = std::max(best, std::sqrt(dg / dw));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Full training run.

enum class MajorityAssignment { differed, identical };

struct DataSettings {
  GaussianTaskParams task;
  int samples_per_round = 500;
  int pool_per_class = 50;
  int local_dataset_n = 2000;
  int test_n = 2000;
  datagen::PartitionMode partition_mode = datagen::PartitionMode::majority_longtail;
  double partition_delta = 0.5;
  double longtail_ratio = 1.0;
  int class_count_p = 10;
  MajorityAssignment majority = MajorityAssignment::differed;
  int majority_class = 0;
};

struct TrainSettings {
  int hidden_dim = 0;  // 0 = softmax regression
  bool record_grad_gap = false;
  bool record_empirical_L = false;
  int threads = 1;
};

inline std::vector<PartitionSpec> build_partition_specs(const HyperParams& hp,
                                                        const DataSettings& data) {
  std::vector<PartitionSpec> specs;
  for (int k = 0; k < hp.num_agents_N; ++k) {
    PartitionSpec s;
    s.mode = data.partition_mode;
    s.delta_target = data.partition_delta;
    s.longtail_ratio = data.longtail_ratio;
    s.class_count_p = data.class_count_p;
    s.majority_class = data.majority == MajorityAssignment::identical
                           ? data.majority_class
                           : (data.majority_class + k) % hp.num_classes_I;
    specs.push_back(s);
  }
  return specs;
}

struct ComplianceStats {
  long checked = 0;
  long violations = 0;
  double max_ratio = 0.0;  // measured / bound over checked points (bound > 0)
};

struct TrainResult {
  TrainingTrace trace;
  Model global;
  std::vector<Model> locals_presync;  // local models at the last sync, pre-averaging
  std::vector<double> weights;
  std::vector<double> partition_deltas;  // Eq-(1) distance of each partition vs uniform
  std::vector<LabeledDataset> agent_data;
  LabeledDataset test_data;
  ComplianceStats divergence_check;
  ComplianceStats grad_gap_check;
  double empirical_L = 0.0;
  std::vector<double> sigma_hat;
};

namespace detail {

inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  int workers = std::min(threads, n);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Runs T rounds of FedAvg. Each round every agent resamples the label mixture
// of a fixed-size working set from its partition, runs E local epochs against
// the round's shared class pools, and the server aggregates with weights p_k.
inline TrainResult run_training(const HyperParams& hp, const std::vector<PartitionSpec>& specs,
                                const DataSettings& data, const TrainSettings& train,
                                std::uint64_t seed) {
  const int N = hp.num_agents_N;
  const int I = hp.num_classes_I;
  if (static_cast<int>(specs.size()) != N)
    throw ConfigError("run_training: one partition spec per agent required");
  auto violations = validate_config(hp);
  if (has_errors(violations)) {
    std::string msg = "run_training: invalid config:";
    for (const auto& v : violations)
      if (!v.warning) msg += " [" + v.field + ": " + v.message + "]";
    throw ConfigError(msg);
  }

  TrainResult result;
  result.weights.assign(static_cast<std::size_t>(N), 1.0 / N);
  const auto& weights = result.weights;
  auto reference = LabelDistribution::uniform(I);

  // Agent partition distributions and materialized local datasets.
  std::vector<LabelDistribution> dists;
  for (int k = 0; k < N; ++k) {
    dists.push_back(datagen::make_label_distribution(specs[static_cast<std::size_t>(k)], I));
    result.partition_deltas.push_back(datagen::wasserstein_delta(dists.back(), reference));
    RngStream rng(seed, "localdata/agent" + std::to_string(k));
    result.agent_data.push_back(
        datagen::sample_dataset(dists.back(), data.local_dataset_n, data.task, rng));
  }
  {
    RngStream rng(seed, "testdata");
    result.test_data = datagen::sample_dataset(reference, data.test_n, data.task, rng);
  }

  ModelShape shape{I, data.task.feature_dim, train.hidden_dim};
  std::vector<Model> models(static_cast<std::size_t>(N), Model(shape));
  Model global(shape);

  TrainingTrace& trace = result.trace;
  auto record_fc = [&](int round, long epoch, const Model& m) {
    Evaluation ev = evaluate(m, result.test_data);
    trace.add(round, epoch, -1, "fc_loss", ev.loss);
    trace.add(round, epoch, -1, "fc_acc", ev.accuracy);
  };

  trace.add(0, 0, -1, "divergence", 0.0);
  trace.add(0, 0, -1, "eta", learning_rate(0, hp));
  for (int k = 0; k < N; ++k)
    trace.add(0, 0, k, "delta_partition", result.partition_deltas[static_cast<std::size_t>(k)]);
  record_fc(0, 0, global);

  std::vector<std::vector<double>> round_q(static_cast<std::size_t>(N));
  std::vector<double> round_deltas(static_cast<std::size_t>(N), 0.0);

  for (int r = 0; r < hp.rounds_T; ++r) {
    RngStream pool_rng(seed, "pool/round" + std::to_string(r));
    auto pools = datagen::sample_class_pools(I, data.pool_per_class, data.task, pool_rng);

    for (int k = 0; k < N; ++k) {
      RngStream arng(seed, "agent" + std::to_string(k) + "/round" + std::to_string(r));
      auto counts = arng.multinomial(data.samples_per_round, dists[static_cast<std::size_t>(k)]);
      auto& q = round_q[static_cast<std::size_t>(k)];
      q.assign(static_cast<std::size_t>(I), 0.0);
      for (int c = 0; c < I; ++c)
        q[static_cast<std::size_t>(c)] =
            static_cast<double>(counts[static_cast<std::size_t>(c)]) / data.samples_per_round;
      round_deltas[static_cast<std::size_t>(k)] =
          datagen::wasserstein_delta(LabelDistribution(q), reference);
    }
    for (int k = 0; k < N; ++k)
      trace.add(r, static_cast<long>(r) * hp.local_epochs_E + 1, k, "delta_round",
                round_deltas[static_cast<std::size_t>(k)]);

    for (int s = 1; s <= hp.local_epochs_E; ++s) {
      long t = static_cast<long>(r) * hp.local_epochs_E + s;
      double eta = learning_rate(t, hp);

      detail::parallel_for(N, train.threads, [&](int k) {
        local_sgd_step_pools(models[static_cast<std::size_t>(k)],
                             round_q[static_cast<std::size_t>(k)], pools,
                             data.task.feature_dim, eta, hp.grad_bound_G, hp.mu, t);
      });

      trace.add(r, t, -1, "eta", eta);
      for (int k = 0; k < N; ++k) {
        const auto& q = round_q[static_cast<std::size_t>(k)];
        const Model& m = models[static_cast<std::size_t>(k)];
        double loss = 0.0, acc = 0.0;
        for (int c = 0; c < I; ++c) {
          if (q[static_cast<std::size_t>(c)] <= 0.0) continue;
          const auto& pool = pools[static_cast<std::size_t>(c)];
          std::size_t mcount = pool.size() / static_cast<std::size_t>(data.task.feature_dim);
          double closs = 0.0;
          long correct = 0;
          for (std::size_t i = 0; i < mcount; ++i) {
            const double* x = pool.data() + i * data.task.feature_dim;
            closs += m.sample_loss(x, c);
            if (m.predict(x) == c) ++correct;
          }
          loss += q[static_cast<std::size_t>(c)] * closs / static_cast<double>(mcount);
          acc += q[static_cast<std::size_t>(c)] * static_cast<double>(correct) /
                 static_cast<double>(mcount);
        }
        trace.add(r, t, k, "local_loss", loss);
        trace.add(r, t, k, "local_acc", acc);
      }

      if (s < hp.local_epochs_E) {
        double div = measure_divergence(models, weights);
        double bound = bounds::divergence_bound(hp, round_deltas, weights, t).value;
        trace.add(r, t, -1, "divergence", div);
        trace.add(r, t, -1, "div_bound", bound);
        result.divergence_check.checked++;
        if (div > bound + 1e-12) result.divergence_check.violations++;
        if (bound > 0.0)
          result.divergence_check.max_ratio =
              std::max(result.divergence_check.max_ratio, div / bound);
      } else {
        // Synchronization epoch: evaluate pre-sync locals, then aggregate.
        for (int k = 0; k < N; ++k) {
          Evaluation ev = evaluate(models[static_cast<std::size_t>(k)], result.test_data);
          trace.add(r, t, k, "local_fc_loss", ev.loss);
          trace.add(r, t, k, "local_fc_acc", ev.accuracy);
        }
        if (r == hp.rounds_T - 1) result.locals_presync = models;
        global = aggregate(models, weights);
        for (auto& m : models) m = global;
        trace.add(r, t, -1, "divergence", 0.0);
        record_fc(r, t, global);

        if (train.record_grad_gap) {
          auto gap = measure_gradient_gap(global, result.agent_data, weights, hp.grad_bound_G,
                                          hp.mu);
          for (int k = 0; k < N; ++k) {
            trace.add(r, t, k, "grad_gap_sq", gap.gap_sq[static_cast<std::size_t>(k)]);
            trace.add(r, t, k, "grad_var_bound", gap.bound[static_cast<std::size_t>(k)]);
            trace.add(r, t, k, "grad_norm_max", gap.raw_norm_max[static_cast<std::size_t>(k)]);
            result.grad_gap_check.checked++;
            if (gap.gap_sq[static_cast<std::size_t>(k)] >
                gap.bound[static_cast<std::size_t>(k)] + 1e-12)
              result.grad_gap_check.violations++;
            if (gap.bound[static_cast<std::size_t>(k)] > 0.0)
              result.grad_gap_check.max_ratio =
                  std::max(result.grad_gap_check.max_ratio,
                           gap.gap_sq[static_cast<std::size_t>(k)] /
                               gap.bound[static_cast<std::size_t>(k)]);
          }
          result.sigma_hat = gap.sigma_hat;
        }
      }
    }
  }

  if (train.record_empirical_L) {
    RngStream lrng(seed, "empirical_L");
    result.empirical_L = estimate_empirical_L(global, result.test_data, hp.mu, lrng);
  }

  result.global = global;
  trace.epochs = static_cast<long>(hp.rounds_T) * hp.local_epochs_E + 1;
  return result;
}

inline TrainResult run_training(const HyperParams& hp, const DataSettings& data,
                                const TrainSettings& train, std::uint64_t seed) {
  return run_training(hp, build_partition_specs(hp, data), data, train, seed);
}

}  // namespace fedgame::fltrain
