#pragma once
// Run configuration: JSON file with nested sections, FEDGAME_* environment
// overrides for every scalar hyperparameter, and lossless round-tripping into
// the run manifest.

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedgame/bounds.hpp"
#include "fedgame/core.hpp"
#include "fedgame/fltrain.hpp"
#include "fedgame/mechanism.hpp"

namespace fedgame {

using nlohmann::json;

struct MechanismSettings {
  mechanism::PaymentForm payment_form = mechanism::PaymentForm::logarithmic;
  double kappa_lin = 1.0;
  std::vector<double> marginal_cost = {0.2};  // scalar broadcast or per-agent
  double delta0 = 1.0;
  double reward_scale = 1.0;
  double brd_tol = 1e-6;
  int brd_max_sweeps = 200;
  double brd_damping = 0.0;
  double initial_effort = 1.0;
  int audit_grid = 101;
};

struct ExperimentSettings {
  int seeds = 3;
  int averaging_window = 5;
  std::vector<double> deltas = {0.1, 0.5, 0.9};
  std::vector<int> class_counts = {10, 5, 1};
  std::vector<double> deviation_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  int deviation_seeds = 5;
  int deviation_agent = 0;
  std::uint64_t peer_seed = 0;  // 0 = derive from the run seed
};

struct RunConfig {
  std::uint64_t seed = 42;
  HyperParams hp;
  fltrain::DataSettings data;
  fltrain::TrainSettings train;
  MechanismSettings mech;
  ExperimentSettings exp;
};

// ---------------------------------------------------------------------------
// JSON mapping. Absent keys keep defaults; unknown keys are rejected so typos
// fail loudly.

namespace detail {

inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("config: unknown key '" + it.key() + "' in section " + section);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void maybe_vec(const json& j, const char* key, std::vector<double>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_number()) out = {v.get<double>()};
  else out = v.get<std::vector<double>>();
}

}  // namespace detail

inline json hyperparams_to_json(const HyperParams& hp) {
  json j;
  j["eta0"] = hp.eta0;
  j["schedule"] = to_string(hp.schedule);
  j["lipschitz_L"] = hp.lipschitz_L;
  j["mu"] = hp.mu;
  j["grad_bound_G"] = hp.grad_bound_G;
  j["local_epochs_E"] = hp.local_epochs_E;
  j["rounds_T"] = hp.rounds_T;
  j["num_agents_N"] = hp.num_agents_N;
  j["num_classes_I"] = hp.num_classes_I;
  j["sigma_k"] = hp.sigma_k;
  j["gamma_het"] = hp.gamma_het;
  j["omega"] = hp.omega;
  j["bound_coeff"] = hp.bound_coeff;
  j["payment_Q"] = hp.payment_Q;
  j["phi"] = hp.phi;
  j["upsilon"] = hp.upsilon;
  j["gamma_sched_override"] = hp.gamma_sched_override;
  return j;
}

inline HyperParams hyperparams_from_json(const json& j) {
  detail::check_keys(j, {"eta0", "schedule", "lipschitz_L", "mu", "grad_bound_G",
                         "local_epochs_E", "rounds_T", "num_agents_N", "num_classes_I",
                         "sigma_k", "gamma_het", "omega", "bound_coeff", "payment_Q",
                         "phi", "upsilon", "gamma_sched_override"},
                     "hyperparams");
  HyperParams hp;
  detail::maybe(j, "eta0", hp.eta0);
  if (j.contains("schedule")) {
    std::string s = j.at("schedule").get<std::string>();
    if (s == "constant") hp.schedule = LrSchedule::constant;
    else if (s == "decaying") hp.schedule = LrSchedule::decaying;
    else throw ConfigError("config: schedule must be 'constant' or 'decaying', got '" + s + "'");
  }
  detail::maybe(j, "lipschitz_L", hp.lipschitz_L);
  detail::maybe(j, "mu", hp.mu);
  detail::maybe(j, "grad_bound_G", hp.grad_bound_G);
  detail::maybe(j, "local_epochs_E", hp.local_epochs_E);
  detail::maybe(j, "rounds_T", hp.rounds_T);
  detail::maybe(j, "num_agents_N", hp.num_agents_N);
  detail::maybe(j, "num_classes_I", hp.num_classes_I);
  detail::maybe_vec(j, "sigma_k", hp.sigma_k);
  detail::maybe(j, "gamma_het", hp.gamma_het);
  detail::maybe(j, "omega", hp.omega);
  detail::maybe(j, "bound_coeff", hp.bound_coeff);
  detail::maybe(j, "payment_Q", hp.payment_Q);
  detail::maybe(j, "phi", hp.phi);
  detail::maybe(j, "upsilon", hp.upsilon);
  detail::maybe(j, "gamma_sched_override", hp.gamma_sched_override);
  return hp;
}

inline json run_config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["hyperparams"] = hyperparams_to_json(c.hp);
  json d;
  d["feature_dim"] = c.data.task.feature_dim;
  d["class_separation"] = c.data.task.class_separation;
  d["noise_sigma"] = c.data.task.noise_sigma;
  d["samples_per_round"] = c.data.samples_per_round;
  d["pool_per_class"] = c.data.pool_per_class;
  d["local_dataset_n"] = c.data.local_dataset_n;
  d["test_n"] = c.data.test_n;
  d["partition_mode"] = c.data.partition_mode == datagen::PartitionMode::majority_longtail
                            ? "majority_longtail"
                            : "class_count";
  d["partition_delta"] = c.data.partition_delta;
  d["longtail_ratio"] = c.data.longtail_ratio;
  d["class_count_p"] = c.data.class_count_p;
  d["majority"] =
      c.data.majority == fltrain::MajorityAssignment::differed ? "differed" : "identical";
  d["majority_class"] = c.data.majority_class;
  j["data"] = d;
  json t;
  t["hidden_dim"] = c.train.hidden_dim;
  t["record_grad_gap"] = c.train.record_grad_gap;
  t["record_empirical_L"] = c.train.record_empirical_L;
  t["threads"] = c.train.threads;
  j["train"] = t;
  json m;
  m["payment_form"] =
      c.mech.payment_form == mechanism::PaymentForm::logarithmic ? "logarithmic" : "linear";
  m["kappa_lin"] = c.mech.kappa_lin;
  m["marginal_cost"] = c.mech.marginal_cost;
  m["delta0"] = c.mech.delta0;
  m["reward_scale"] = c.mech.reward_scale;
  m["brd_tol"] = c.mech.brd_tol;
  m["brd_max_sweeps"] = c.mech.brd_max_sweeps;
  m["brd_damping"] = c.mech.brd_damping;
  m["initial_effort"] = c.mech.initial_effort;
  m["audit_grid"] = c.mech.audit_grid;
  j["mechanism"] = m;
  json e;
  e["seeds"] = c.exp.seeds;
  e["averaging_window"] = c.exp.averaging_window;
  e["deltas"] = c.exp.deltas;
  e["class_counts"] = c.exp.class_counts;
  e["deviation_grid"] = c.exp.deviation_grid;
  e["deviation_seeds"] = c.exp.deviation_seeds;
  e["deviation_agent"] = c.exp.deviation_agent;
  e["peer_seed"] = c.exp.peer_seed;
  j["experiment"] = e;
  return j;
}

inline RunConfig run_config_from_json(const json& j) {
  detail::check_keys(j, {"seed", "hyperparams", "data", "train", "mechanism", "experiment"},
                     "(root)");
  RunConfig c;
  detail::maybe(j, "seed", c.seed);
  if (j.contains("hyperparams")) c.hp = hyperparams_from_json(j.at("hyperparams"));
  if (j.contains("data")) {
    const json& d = j.at("data");
    detail::check_keys(d, {"feature_dim", "class_separation", "noise_sigma", "samples_per_round",
                           "pool_per_class", "local_dataset_n", "test_n", "partition_mode",
                           "partition_delta", "longtail_ratio", "class_count_p", "majority",
                           "majority_class"},
                       "data");
    detail::maybe(d, "feature_dim", c.data.task.feature_dim);
    detail::maybe(d, "class_separation", c.data.task.class_separation);
    detail::maybe(d, "noise_sigma", c.data.task.noise_sigma);
    detail::maybe(d, "samples_per_round", c.data.samples_per_round);
    detail::maybe(d, "pool_per_class", c.data.pool_per_class);
    detail::maybe(d, "local_dataset_n", c.data.local_dataset_n);
    detail::maybe(d, "test_n", c.data.test_n);
    if (d.contains("partition_mode")) {
      std::string s = d.at("partition_mode").get<std::string>();
      if (s == "majority_longtail") c.data.partition_mode = datagen::PartitionMode::majority_longtail;
      else if (s == "class_count") c.data.partition_mode = datagen::PartitionMode::class_count;
      else throw ConfigError("config: bad partition_mode '" + s + "'");
    }
    detail::maybe(d, "partition_delta", c.data.partition_delta);
    detail::maybe(d, "longtail_ratio", c.data.longtail_ratio);
    detail::maybe(d, "class_count_p", c.data.class_count_p);
    if (d.contains("majority")) {
      std::string s = d.at("majority").get<std::string>();
      if (s == "differed") c.data.majority = fltrain::MajorityAssignment::differed;
      else if (s == "identical") c.data.majority = fltrain::MajorityAssignment::identical;
      else throw ConfigError("config: bad majority assignment '" + s + "'");
    }
    detail::maybe(d, "majority_class", c.data.majority_class);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    detail::check_keys(t, {"hidden_dim", "record_grad_gap", "record_empirical_L", "threads"},
                       "train");
    detail::maybe(t, "hidden_dim", c.train.hidden_dim);
    detail::maybe(t, "record_grad_gap", c.train.record_grad_gap);
    detail::maybe(t, "record_empirical_L", c.train.record_empirical_L);
    detail::maybe(t, "threads", c.train.threads);
  }
  if (j.contains("mechanism")) {
    const json& m = j.at("mechanism");
    detail::check_keys(m, {"payment_form", "kappa_lin", "marginal_cost", "delta0", "reward_scale",
                           "brd_tol", "brd_max_sweeps", "brd_damping", "initial_effort",
                           "audit_grid"},
                       "mechanism");
    if (m.contains("payment_form")) {
      std::string s = m.at("payment_form").get<std::string>();
      if (s == "logarithmic") c.mech.payment_form = mechanism::PaymentForm::logarithmic;
      else if (s == "linear") c.mech.payment_form = mechanism::PaymentForm::linear;
      else throw ConfigError("config: bad payment_form '" + s + "'");
    }
    detail::maybe(m, "kappa_lin", c.mech.kappa_lin);
    detail::maybe_vec(m, "marginal_cost", c.mech.marginal_cost);
    detail::maybe(m, "delta0", c.mech.delta0);
    detail::maybe(m, "reward_scale", c.mech.reward_scale);
    detail::maybe(m, "brd_tol", c.mech.brd_tol);
    detail::maybe(m, "brd_max_sweeps", c.mech.brd_max_sweeps);
    detail::maybe(m, "brd_damping", c.mech.brd_damping);
    detail::maybe(m, "initial_effort", c.mech.initial_effort);
    detail::maybe(m, "audit_grid", c.mech.audit_grid);
  }
  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    detail::check_keys(e, {"seeds", "averaging_window", "deltas", "class_counts",
                           "deviation_grid", "deviation_seeds", "deviation_agent", "peer_seed"},
                       "experiment");
    detail::maybe(e, "seeds", c.exp.seeds);
    detail::maybe(e, "averaging_window", c.exp.averaging_window);
    detail::maybe_vec(e, "deltas", c.exp.deltas);
    if (e.contains("class_counts")) c.exp.class_counts = e.at("class_counts").get<std::vector<int>>();
    detail::maybe_vec(e, "deviation_grid", c.exp.deviation_grid);
    detail::maybe(e, "deviation_seeds", c.exp.deviation_seeds);
    detail::maybe(e, "deviation_agent", c.exp.deviation_agent);
    detail::maybe(e, "peer_seed", c.exp.peer_seed);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Environment overrides: FEDGAME_<FIELD> for every scalar hyperparameter
// (plus FEDGAME_SEED), applied after the file is read.

inline void apply_env_overrides(RunConfig& c) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
  auto as_double = [](const std::string& name, const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad numeric value for " + name + ": '" + s + "'");
    }
  };

  if (auto v = env("FEDGAME_SEED")) c.seed = static_cast<std::uint64_t>(std::stoull(*v));
  if (auto v = env("FEDGAME_ETA0")) c.hp.eta0 = as_double("FEDGAME_ETA0", *v);
  if (auto v = env("FEDGAME_SCHEDULE")) {
    if (*v == "constant") c.hp.schedule = LrSchedule::constant;
    else if (*v == "decaying") c.hp.schedule = LrSchedule::decaying;
    else throw ConfigError("FEDGAME_SCHEDULE must be 'constant' or 'decaying'");
  }
  if (auto v = env("FEDGAME_LIPSCHITZ_L")) c.hp.lipschitz_L = as_double("FEDGAME_LIPSCHITZ_L", *v);
  if (auto v = env("FEDGAME_MU")) c.hp.mu = as_double("FEDGAME_MU", *v);
  if (auto v = env("FEDGAME_GRAD_BOUND_G")) c.hp.grad_bound_G = as_double("FEDGAME_GRAD_BOUND_G", *v);
  if (auto v = env("FEDGAME_LOCAL_EPOCHS_E")) c.hp.local_epochs_E = std::stoi(*v);
  if (auto v = env("FEDGAME_ROUNDS_T")) c.hp.rounds_T = std::stoi(*v);
  if (auto v = env("FEDGAME_NUM_AGENTS_N")) c.hp.num_agents_N = std::stoi(*v);
  if (auto v = env("FEDGAME_NUM_CLASSES_I")) c.hp.num_classes_I = std::stoi(*v);
  if (auto v = env("FEDGAME_SIGMA_K")) c.hp.sigma_k = {as_double("FEDGAME_SIGMA_K", *v)};
  if (auto v = env("FEDGAME_GAMMA_HET")) c.hp.gamma_het = as_double("FEDGAME_GAMMA_HET", *v);
  if (auto v = env("FEDGAME_OMEGA")) c.hp.omega = as_double("FEDGAME_OMEGA", *v);
  if (auto v = env("FEDGAME_BOUND_COEFF")) c.hp.bound_coeff = as_double("FEDGAME_BOUND_COEFF", *v);
  if (auto v = env("FEDGAME_PAYMENT_Q")) c.hp.payment_Q = as_double("FEDGAME_PAYMENT_Q", *v);
  if (auto v = env("FEDGAME_PHI")) c.hp.phi = as_double("FEDGAME_PHI", *v);
  if (auto v = env("FEDGAME_UPSILON")) c.hp.upsilon = as_double("FEDGAME_UPSILON", *v);
  if (auto v = env("FEDGAME_GAMMA_SCHED_OVERRIDE"))
    c.hp.gamma_sched_override = as_double("FEDGAME_GAMMA_SCHED_OVERRIDE", *v);
}

// Reads a config file; a stored run manifest is accepted transparently (its
// embedded config snapshot is used), so a run can be reproduced from its
// manifest alone.
inline RunConfig load_config_file(const std::string& path, bool with_env = true) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config file not found: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (j.contains("fedgame_manifest") && j.contains("config")) j = j.at("config");
  RunConfig c = run_config_from_json(j);
  if (with_env) apply_env_overrides(c);
  return c;
}

// ---------------------------------------------------------------------------
// Derived mechanism objects.

inline mechanism::MechanismConfig build_mechanism_config(const RunConfig& c) {
  mechanism::MechanismConfig m;
  m.payment_form = c.mech.payment_form;
  m.kappa_lin = c.mech.kappa_lin;
  m.Q = c.hp.payment_Q;
  auto gc = bounds::resolve_gap_constants(c.hp);
  m.phi = gc.phi;
  m.upsilon = gc.upsilon;
  m.reward_scale = c.mech.reward_scale;
  m.omega = c.hp.omega;
  m.bound_coeff = c.hp.bound_coeff;
  m.rounds_T = c.hp.rounds_T;
  return m;
}

inline std::vector<mechanism::AgentProfile> build_profiles(const RunConfig& c) {
  std::vector<mechanism::AgentProfile> out;
  const int n = c.hp.num_agents_N;
  for (int k = 0; k < n; ++k) {
    mechanism::AgentProfile a;
    a.id = k;
    a.weight = 1.0 / n;
    a.marginal_cost = c.mech.marginal_cost.size() == 1
                          ? c.mech.marginal_cost[0]
                          : c.mech.marginal_cost.at(static_cast<std::size_t>(k));
    a.effort = c.mech.initial_effort;
    a.delta0 = c.mech.delta0;
    out.push_back(a);
  }
  return out;
}

inline mechanism::BrdOptions build_brd_options(const RunConfig& c) {
  mechanism::BrdOptions o;
  o.tol = c.mech.brd_tol;
  o.max_sweeps = c.mech.brd_max_sweeps;
  o.damping = c.mech.brd_damping;
  o.audit_grid = c.mech.audit_grid;
  return o;
}

}  // namespace fedgame
