#pragma once
// Experiment orchestration: non-iid sweeps, the two-agent peer gap, bound
// verification runs, equilibrium simulations with per-round peer payments,
// the deviation study, and summary re-rendering from stored traces.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedgame/bounds.hpp"
#include "fedgame/config.hpp"
#include "fedgame/fltrain.hpp"
#include "fedgame/manifest.hpp"
#include "fedgame/mechanism.hpp"
#include "fedgame/trace.hpp"

namespace fedgame::harness {

using fltrain::TrainingTrace;
using fltrain::TrainResult;
using nlohmann::json;

inline constexpr const char* kSummaryHeader = "# fedgame-summary v1";

enum class PlanKind { noniid_sweep, peer_gap, bound_verify, equilibrium_sim, deviation_study };

inline PlanKind plan_kind_from_string(const std::string& s) {
  if (s == "noniid_sweep") return PlanKind::noniid_sweep;
  if (s == "peer_gap") return PlanKind::peer_gap;
  if (s == "bound_verify") return PlanKind::bound_verify;
  if (s == "equilibrium_sim") return PlanKind::equilibrium_sim;
  if (s == "deviation_study") return PlanKind::deviation_study;
  throw ConfigError("unknown experiment plan: " + s);
}

inline std::string axis_value_tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Single-run summary, built strictly from trace rows so that `report` can
// regenerate it byte-identically from the stored CSV.

inline json build_run_summary(const TrainingTrace& trace) {
  json j;
  auto fc = trace.series("fc_acc");
  auto fl = trace.series("fc_loss");
  j["epochs"] = trace.epochs;
  j["final_fc_acc"] = fc.empty() ? 0.0 : fc.back().second;
  j["final_fc_loss"] = fl.empty() ? 0.0 : fl.back().second;

  auto div = trace.series("divergence");
  auto bnd = trace.series("div_bound");
  std::map<long, double> bound_at;
  for (const auto& [e, v] : bnd) bound_at[e] = v;
  long checked = 0, violations = 0;
  double max_ratio = 0.0;
  for (const auto& [e, v] : div) {
    auto it = bound_at.find(e);
    if (it == bound_at.end()) continue;
    ++checked;
    if (v > it->second + 1e-12) ++violations;
    if (it->second > 0.0) max_ratio = std::max(max_ratio, v / it->second);
  }
  j["divergence_checked"] = checked;
  j["divergence_violations"] = violations;
  j["divergence_max_ratio"] = max_ratio;

  long gchecked = 0, gviolations = 0;
  double gmax = 0.0;
  for (const auto& r : trace.rows) {
    if (r.metric != "grad_gap_sq") continue;
    for (const auto& b : trace.rows) {
      if (b.metric == "grad_var_bound" && b.epoch == r.epoch && b.agent == r.agent) {
        ++gchecked;
        if (r.value > b.value + 1e-12) ++gviolations;
        if (b.value > 0.0) gmax = std::max(gmax, r.value / b.value);
        break;
      }
    }
  }
  j["grad_gap_checked"] = gchecked;
  j["grad_gap_violations"] = gviolations;
  j["grad_gap_max_ratio"] = gmax;
  return j;
}

// ---------------------------------------------------------------------------
// Non-iid sweep (accuracy direction across heterogeneity degrees). All agents
// of a point share one partition of the given degree.

struct SweepPoint {
  std::string axis;  // "delta" or "class_count"
  double value = 0.0;
  std::uint64_t seed = 0;
  double final_acc = 0.0;
  double final_loss = 0.0;
  std::string trace_file;
};

struct SweepSummary {
  std::vector<SweepPoint> points;

  std::vector<double> values(const std::string& axis) const {
    std::vector<double> vs;
    for (const auto& p : points)
      if (p.axis == axis && std::find(vs.begin(), vs.end(), p.value) == vs.end())
        vs.push_back(p.value);
    return vs;
  }
  double mean_acc(const std::string& axis, double value) const {
    double acc = 0.0;
    int n = 0;
    for (const auto& p : points)
      if (p.axis == axis && p.value == value) {
        acc += p.final_acc;
        ++n;
      }
    return n > 0 ? acc / n : 0.0;
  }
};

inline std::string sweep_points_csv(const SweepSummary& s) {
  std::ostringstream os;
  os << kSummaryHeader << "\n";
  os << "axis,value,seed,final_fc_acc,final_fc_loss\n";
  for (const auto& p : s.points)
    os << p.axis << ',' << fltrain::format_double(p.value) << ',' << p.seed << ','
       << fltrain::format_double(p.final_acc) << ',' << fltrain::format_double(p.final_loss)
       << "\n";
  return os.str();
}

inline std::string sweep_agg_csv(const SweepSummary& s) {
  std::ostringstream os;
  os << kSummaryHeader << "\n";
  os << "axis,value,n_seeds,acc_mean,acc_std,loss_mean,loss_std\n";
  for (const std::string axis : {"delta", "class_count"}) {
    for (double v : s.values(axis)) {
      std::vector<double> accs, losses;
      for (const auto& p : s.points)
        if (p.axis == axis && p.value == v) {
          accs.push_back(p.final_acc);
          losses.push_back(p.final_loss);
        }
      auto mean = [](const std::vector<double>& xs) {
        double m = 0.0;
        for (double x : xs) m += x;
        return m / xs.size();
      };
      auto stdev = [&mean](const std::vector<double>& xs) {
        if (xs.size() < 2) return 0.0;
        double m = mean(xs), acc = 0.0;
        for (double x : xs) acc += (x - m) * (x - m);
        return std::sqrt(acc / (xs.size() - 1));
      };
      os << axis << ',' << fltrain::format_double(v) << ',' << accs.size() << ','
         << fltrain::format_double(mean(accs)) << ',' << fltrain::format_double(stdev(accs))
         << ',' << fltrain::format_double(mean(losses)) << ','
         << fltrain::format_double(stdev(losses)) << "\n";
    }
  }
  return os.str();
}

inline SweepSummary run_noniid_sweep(const RunConfig& base, RunManifest& manifest) {
  SweepSummary summary;
  auto run_point = [&](const std::string& axis, double value, std::uint64_t seed) {
    RunConfig cfg = base;
    cfg.data.majority = fltrain::MajorityAssignment::identical;
    if (axis == "delta") {
      cfg.data.partition_mode = datagen::PartitionMode::majority_longtail;
      cfg.data.partition_delta = value;
    } else {
      cfg.data.partition_mode = datagen::PartitionMode::class_count;
      cfg.data.class_count_p = static_cast<int>(value);
    }
    TrainResult res = fltrain::run_training(cfg.hp, cfg.data, cfg.train, seed);
    SweepPoint p;
    p.axis = axis;
    p.value = value;
    p.seed = seed;
    p.final_acc = res.trace.last("fc_acc");
    p.final_loss = res.trace.last("fc_loss");
    p.trace_file = "trace_" + axis + axis_value_tag(value) + "_seed" + std::to_string(seed) + ".csv";
    fltrain::write_trace_csv(manifest.path(p.trace_file), res.trace);
    manifest.record_file(p.trace_file);
    summary.points.push_back(std::move(p));
  };

  for (double d : base.exp.deltas)
    for (int s = 0; s < base.exp.seeds; ++s) run_point("delta", d, base.seed + static_cast<std::uint64_t>(s));
  for (int p : base.exp.class_counts)
    for (int s = 0; s < base.exp.seeds; ++s)
      run_point("class_count", static_cast<double>(p), base.seed + static_cast<std::uint64_t>(s));

  manifest.write_text("summary_points.csv", sweep_points_csv(summary));
  manifest.write_text("summary_agg.csv", sweep_agg_csv(summary));
  return summary;
}

// Rebuilds the two sweep summary files from stored traces (pure function of
// the trace content plus the filename-encoded axis tags).
inline SweepSummary rebuild_sweep_summary(const std::string& dir) {
  SweepSummary summary;
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("trace_", 0) == 0 && name.find(".csv") != std::string::npos)
      names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    std::string stem = name.substr(6, name.size() - 10);  // strip trace_ and .csv
    auto seed_pos = stem.rfind("_seed");
    if (seed_pos == std::string::npos) continue;
    std::string axis_value = stem.substr(0, seed_pos);
    std::string axis;
    double value = 0.0;
    if (axis_value.rfind("delta", 0) == 0) {
      axis = "delta";
      value = std::stod(axis_value.substr(5));
    } else if (axis_value.rfind("class_count", 0) == 0) {
      axis = "class_count";
      value = std::stod(axis_value.substr(11));
    } else {
      continue;
    }
    TrainingTrace trace = fltrain::read_trace_csv_file((std::filesystem::path(dir) / name).string());
    SweepPoint p;
    p.axis = axis;
    p.value = value;
    p.seed = std::stoull(stem.substr(seed_pos + 5));
    p.final_acc = trace.last("fc_acc");
    p.final_loss = trace.last("fc_loss");
    p.trace_file = name;
    summary.points.push_back(std::move(p));
  }
  // Keep file order deterministic: axis, then value, then seed.
  std::sort(summary.points.begin(), summary.points.end(), [](const SweepPoint& a, const SweepPoint& b) {
    if (a.axis != b.axis) return a.axis < b.axis;
    if (a.value != b.value) return a.value < b.value;
    return a.seed < b.seed;
  });
  return summary;
}

// ---------------------------------------------------------------------------
// Peer gap: two agents at fixed heterogeneity degrees in one federation.

struct PeerGapRound {
  int round = 0;
  double acc_low = 0.0, acc_high = 0.0;
  double loss_low = 0.0, loss_high = 0.0;
  double gap_loss = 0.0;   // F_c(w_high_delta) - F_c(w_low_delta)
  double gap_bound = 0.0;  // one-shot bound with E = elapsed local epochs
};

struct PeerGapResult {
  std::vector<std::vector<PeerGapRound>> per_seed;
  long bound_checked = 0;
  long bound_violations = 0;
  bool upsilon_positive = false;
};

inline PeerGapResult run_peer_gap(const RunConfig& base, RunManifest& manifest,
                                  double delta_low = 0.1, double delta_high = 0.9) {
  RunConfig cfg = base;
  cfg.hp.num_agents_N = 2;
  PeerGapResult out;

  HyperParams one_shot = cfg.hp;
  one_shot.local_epochs_E = 1;  // placeholder, set per round below
  out.upsilon_positive =
      !bounds::compute_upsilon(cfg.hp, bounds::BoundMode::exact).flagged("upsilon_nonpositive");

  for (int s = 0; s < cfg.exp.seeds; ++s) {
    std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
    std::vector<datagen::PartitionSpec> specs(2);
    specs[0].mode = datagen::PartitionMode::majority_longtail;
    specs[0].delta_target = delta_low;
    specs[0].longtail_ratio = cfg.data.longtail_ratio;
    specs[0].majority_class = 0;
    specs[1] = specs[0];
    specs[1].delta_target = delta_high;
    specs[1].majority_class = 1;

    TrainResult res = fltrain::run_training(cfg.hp, specs, cfg.data, cfg.train, seed);
    std::string trace_file = "trace_peergap_seed" + std::to_string(s) + ".csv";
    fltrain::write_trace_csv(manifest.path(trace_file), res.trace);
    manifest.record_file(trace_file);

    auto acc0 = res.trace.series("local_fc_acc", 0);
    auto acc1 = res.trace.series("local_fc_acc", 1);
    auto loss0 = res.trace.series("local_fc_loss", 0);
    auto loss1 = res.trace.series("local_fc_loss", 1);
    auto d0 = res.trace.series("delta_round", 0);
    auto d1 = res.trace.series("delta_round", 1);

    std::vector<PeerGapRound> rounds;
    for (std::size_t r = 0; r < acc0.size(); ++r) {
      PeerGapRound g;
      g.round = static_cast<int>(r);
      g.acc_low = acc0[r].second;
      g.acc_high = acc1[r].second;
      g.loss_low = loss0[r].second;
      g.loss_high = loss1[r].second;
      g.gap_loss = g.loss_high - g.loss_low;

      HyperParams hb = cfg.hp;
      hb.local_epochs_E = static_cast<int>((r + 1)) * cfg.hp.local_epochs_E;
      double phi = bounds::compute_phi(hb, bounds::BoundMode::exact);
      auto ups = bounds::compute_upsilon(hb, bounds::BoundMode::exact);
      double upsilon = ups.value;
      if (ups.flagged("upsilon_nonpositive"))
        upsilon = bounds::compute_upsilon(hb, bounds::BoundMode::simplified).value;
      g.gap_bound = bounds::gap_bound(d1[r].second, d0[r].second, phi, upsilon);
      if (out.upsilon_positive) {
        out.bound_checked++;
        if (g.gap_loss > g.gap_bound + 1e-9) out.bound_violations++;
      }
      rounds.push_back(g);
    }
    out.per_seed.push_back(std::move(rounds));
  }

  std::ostringstream os;
  os << kSummaryHeader << "\n";
  os << "seed,round,acc_low,acc_high,loss_low,loss_high,gap_loss,gap_bound\n";
  for (std::size_t s = 0; s < out.per_seed.size(); ++s)
    for (const auto& g : out.per_seed[s])
      os << s << ',' << g.round << ',' << fltrain::format_double(g.acc_low) << ','
         << fltrain::format_double(g.acc_high) << ',' << fltrain::format_double(g.loss_low) << ','
         << fltrain::format_double(g.loss_high) << ',' << fltrain::format_double(g.gap_loss)
         << ',' << fltrain::format_double(g.gap_bound) << "\n";
  manifest.write_text("peer_gap.csv", os.str());
  return out;
}

// Fraction of rounds after `after_round` where the 3-seed mean accuracy of
// the low-delta agent exceeds the high-delta agent's.
inline double peer_gap_win_fraction(const PeerGapResult& res, int after_round) {
  if (res.per_seed.empty()) return 0.0;
  std::size_t rounds = res.per_seed[0].size();
  long wins = 0, total = 0;
  for (std::size_t r = 0; r < rounds; ++r) {
    if (res.per_seed[0][r].round <= after_round) continue;
    double low = 0.0, high = 0.0;
    for (const auto& seed_rounds : res.per_seed) {
      low += seed_rounds[r].acc_low;
      high += seed_rounds[r].acc_high;
    }
    ++total;
    if (low > high) ++wins;
  }
  return total > 0 ? static_cast<double>(wins) / total : 0.0;
}

// ---------------------------------------------------------------------------
// Bound verification: heterogeneous agents (differed majority classes), with
// divergence and gradient-variance dominance tracked per epoch.

struct BoundVerifyPoint {
  double delta = 0.0;
  std::uint64_t seed = 0;
  fltrain::ComplianceStats divergence;
  fltrain::ComplianceStats grad_gap;
  double empirical_L = 0.0;
  double max_raw_grad_norm = 0.0;
};

inline std::vector<BoundVerifyPoint> run_bound_verify(const RunConfig& base,
                                                      RunManifest& manifest) {
  std::vector<BoundVerifyPoint> points;
  for (double d : base.exp.deltas) {
    for (int s = 0; s < base.exp.seeds; ++s) {
      RunConfig cfg = base;
      cfg.data.majority = fltrain::MajorityAssignment::differed;
      cfg.data.partition_delta = d;
      cfg.train.record_grad_gap = true;
      cfg.train.record_empirical_L = true;
      std::uint64_t seed = base.seed + static_cast<std::uint64_t>(s);
      TrainResult res = fltrain::run_training(cfg.hp, cfg.data, cfg.train, seed);

      std::string trace_file =
          "trace_bounds_delta" + axis_value_tag(d) + "_seed" + std::to_string(s) + ".csv";
      fltrain::write_trace_csv(manifest.path(trace_file), res.trace);
      manifest.record_file(trace_file);

      BoundVerifyPoint p;
      p.delta = d;
      p.seed = seed;
      p.divergence = res.divergence_check;
      p.grad_gap = res.grad_gap_check;
      p.empirical_L = res.empirical_L;
      for (const auto& r : res.trace.rows)
        if (r.metric == "grad_norm_max") p.max_raw_grad_norm = std::max(p.max_raw_grad_norm, r.value);
      points.push_back(p);
    }
  }
  json j = json::array();
  for (const auto& p : points) {
    j.push_back({{"delta", p.delta},
                 {"seed", p.seed},
                 {"divergence_checked", p.divergence.checked},
                 {"divergence_violations", p.divergence.violations},
                 {"divergence_max_ratio", p.divergence.max_ratio},
                 {"grad_gap_checked", p.grad_gap.checked},
                 {"grad_gap_violations", p.grad_gap.violations},
                 {"grad_gap_max_ratio", p.grad_gap.max_ratio},
                 {"empirical_L", p.empirical_L},
                 {"max_raw_grad_norm", p.max_raw_grad_norm}});
  }
  manifest.write_text("bound_verify.json", j.dump(2) + "\n");
  return points;
}

// ---------------------------------------------------------------------------
// Equilibrium simulation: solve the game, train under the equilibrium
// distances, and pay each agent per round against one uniformly drawn peer.

struct UtilityRow {
  int round = 0;
  int agent = 0;
  int peer = 0;
  double payment = 0.0;
  double utility = 0.0;
  double utility_ma = 0.0;  // moving average over the configured window
};

struct EquilibriumSimResult {
  mechanism::EquilibriumResult equilibrium;
  mechanism::QSelection q;
  std::vector<double> efforts;  // actually simulated (after any deviation override)
  std::vector<UtilityRow> rows;
  std::string trace_file;
};

inline EquilibriumSimResult simulate_equilibrium(const RunConfig& cfg, RunManifest* manifest,
                                                 std::uint64_t seed,
                                                 std::optional<std::pair<int, double>> deviation =
                                                     std::nullopt,
                                                 const std::string& tag = "") {
  auto profiles = build_profiles(cfg);
  auto mcfg = build_mechanism_config(cfg);
  auto brd = build_brd_options(cfg);

  EquilibriumSimResult out;
  out.equilibrium = mechanism::best_response_dynamics(profiles, mcfg, brd);
  out.q = mechanism::choose_Q(profiles, mcfg, 1e-9, out.equilibrium.efforts);
  mcfg.Q = out.q.q_star;

  out.efforts = out.equilibrium.efforts;
  if (deviation) out.efforts[static_cast<std::size_t>(deviation->first)] = deviation->second;

  // Partition each agent at its mechanism-level distance.
  const int N = cfg.hp.num_agents_N;
  std::vector<datagen::PartitionSpec> specs;
  std::vector<double> deltas(static_cast<std::size_t>(N), 0.0);
  for (int k = 0; k < N; ++k) {
    deltas[static_cast<std::size_t>(k)] =
        mechanism::delta_at(profiles[static_cast<std::size_t>(k)], out.efforts[static_cast<std::size_t>(k)]);
    specs.push_back(datagen::partition_for_wasserstein(deltas[static_cast<std::size_t>(k)],
                                                       cfg.hp.num_classes_I,
                                                       k % cfg.hp.num_classes_I));
  }
  TrainResult res = fltrain::run_training(cfg.hp, specs, cfg.data, cfg.train, seed);
  if (manifest != nullptr) {
    out.trace_file = "trace_equilibrium" + tag + ".csv";
    fltrain::write_trace_csv(manifest->path(out.trace_file), res.trace);
    manifest->record_file(out.trace_file);
  }

  std::uint64_t peer_seed = cfg.exp.peer_seed != 0 ? cfg.exp.peer_seed : seed;
  RngStream peer_rng(peer_seed, "peer");
  std::vector<std::vector<double>> utilities(static_cast<std::size_t>(N));
  for (int r = 0; r < cfg.hp.rounds_T; ++r) {
    for (int k = 0; k < N; ++k) {
      int peer_ix = peer_rng.uniform_int(N - 1);
      int peer = peer_ix >= k ? peer_ix + 1 : peer_ix;
      double pay = mechanism::payment_from_deltas(deltas[static_cast<std::size_t>(k)],
                                                  deltas[static_cast<std::size_t>(peer)], mcfg);
      double u = pay - mechanism::cost(out.efforts[static_cast<std::size_t>(k)],
                                       profiles[static_cast<std::size_t>(k)]);
      utilities[static_cast<std::size_t>(k)].push_back(u);
      UtilityRow row;
      row.round = r;
      row.agent = k;
      row.peer = peer;
      row.payment = pay;
      row.utility = u;
      int w = std::max(1, cfg.exp.averaging_window);
      int from = std::max(0, r - w + 1);
      double ma = 0.0;
      for (int i = from; i <= r; ++i) ma += utilities[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      row.utility_ma = ma / (r - from + 1);
      out.rows.push_back(row);
    }
  }
  return out;
}

inline std::string utilities_csv(const std::vector<UtilityRow>& rows) {
  std::ostringstream os;
  os << kSummaryHeader << "\n";
  os << "round,agent_id,peer_id,payment,utility,utility_ma\n";
  for (const auto& r : rows)
    os << r.round << ',' << r.agent << ',' << r.peer << ',' << fltrain::format_double(r.payment)
       << ',' << fltrain::format_double(r.utility) << ',' << fltrain::format_double(r.utility_ma)
       << "\n";
  return os.str();
}

inline EquilibriumSimResult run_equilibrium_sim(const RunConfig& cfg, RunManifest& manifest) {
  EquilibriumSimResult out = simulate_equilibrium(cfg, &manifest, cfg.seed);
  manifest.write_text("utilities.csv", utilities_csv(out.rows));

  json j;
  j["efforts"] = out.equilibrium.efforts;
  j["expected_utilities"] = out.equilibrium.utilities;
  j["converged"] = out.equilibrium.converged;
  j["residual"] = out.equilibrium.residual;
  j["iterations"] = out.equilibrium.iterations;
  j["deviation_audit"] = out.equilibrium.deviation_audit;
  j["q_star"] = out.q.q_star;
  j["q_closed_form"] = out.q.q_closed_form;
  j["binding_agent"] = out.q.binding_agent;
  manifest.write_text("equilibrium.json", j.dump(2) + "\n");
  return out;
}

// Deviation study: one designated agent sweeps an effort grid (plus its
// equilibrium effort) while the others hold theirs; utilities are averaged
// over rounds and seeds.

struct DeviationPoint {
  double effort = 0.0;
  bool is_equilibrium = false;
  double mean_utility = 0.0;  // mean over seeds of the per-run round average
};

inline std::vector<DeviationPoint> run_deviation_study(const RunConfig& cfg,
                                                       RunManifest& manifest) {
  auto profiles = build_profiles(cfg);
  auto mcfg = build_mechanism_config(cfg);
  auto eq = mechanism::best_response_dynamics(profiles, mcfg, build_brd_options(cfg));
  int agent = cfg.exp.deviation_agent;
  double e_star = eq.efforts[static_cast<std::size_t>(agent)];

  std::vector<std::pair<double, bool>> grid;
  for (double g : cfg.exp.deviation_grid) grid.emplace_back(g, false);
  grid.emplace_back(e_star, true);

  std::vector<DeviationPoint> points;
  std::ostringstream os;
  os << kSummaryHeader << "\n";
  os << "grid_effort,is_equilibrium,seed,mean_utility\n";
  for (const auto& [g, is_eq] : grid) {
    DeviationPoint p;
    p.effort = g;
    p.is_equilibrium = is_eq;
    for (int s = 0; s < cfg.exp.deviation_seeds; ++s) {
      std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
      RunConfig c2 = cfg;
      c2.exp.peer_seed = seed + 7919;  // peer draws vary per seed
      auto sim = simulate_equilibrium(c2, nullptr, seed, std::make_pair(agent, g));
      double mean = 0.0;
      long n = 0;
      for (const auto& r : sim.rows)
        if (r.agent == agent) {
          mean += r.utility;
          ++n;
        }
      mean /= n;
      p.mean_utility += mean;
      os << fltrain::format_double(g) << ',' << (is_eq ? 1 : 0) << ',' << s << ','
         << fltrain::format_double(mean) << "\n";
    }
    p.mean_utility /= cfg.exp.deviation_seeds;
    points.push_back(p);
  }
  manifest.write_text("deviation_study.csv", os.str());

  json j = json::array();
  for (const auto& p : points)
    j.push_back({{"effort", p.effort},
                 {"is_equilibrium", p.is_equilibrium},
                 {"mean_utility", p.mean_utility}});
  manifest.write_text("deviation_points.json", j.dump(2) + "\n");
  return points;
}

// ---------------------------------------------------------------------------
// Report: re-render summaries from stored traces without recomputation.

inline void rerender_reports(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(dir)) throw ConfigError("report: directory not found: " + dir);

  bool any = false;
  // Per-run JSON summaries for every stored trace.
  std::vector<std::string> traces;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("trace", 0) == 0 && entry.path().extension() == ".csv") traces.push_back(name);
  }
  std::sort(traces.begin(), traces.end());
  for (const auto& name : traces) {
    TrainingTrace trace = fltrain::read_trace_csv_file((fs::path(dir) / name).string());
    json j = build_run_summary(trace);
    std::string out = name.substr(0, name.size() - 4) + "_summary.json";
    std::ofstream f((fs::path(dir) / out).string(), std::ios::binary);
    f << j.dump(2) << "\n";
    any = true;
  }
  // Sweep summaries when axis-tagged traces are present.
  SweepSummary sweep = rebuild_sweep_summary(dir);
  if (!sweep.points.empty()) {
    std::ofstream p((fs::path(dir) / "summary_points.csv").string(), std::ios::binary);
    p << sweep_points_csv(sweep);
    std::ofstream a((fs::path(dir) / "summary_agg.csv").string(), std::ios::binary);
    a << sweep_agg_csv(sweep);
    any = true;
  }
  if (!any) throw ConfigError("report: no trace files found in " + dir);
}

}  // namespace fedgame::harness
