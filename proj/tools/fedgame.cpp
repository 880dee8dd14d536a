// fedgame: command-line front end for the simulator and mechanism library.
//
// Subcommands:
//   partition   emit per-agent label distributions and their distances
//   train       run one federated training job (trace + summary + manifest)
//   bounds      print bound reports from a config, no training
//   solve       equilibrium efforts, Q*, and the learner payoff
//   experiment  full pipelines: noniid_sweep | peer_gap | bound_verify |
//               equilibrium_sim | deviation_study
//   report      re-render summaries from stored traces
//
// Exit codes: 0 success, 1 configuration error, 2 numerical fault.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedgame/bounds.hpp"
#include "fedgame/config.hpp"
#include "fedgame/experiments.hpp"
#include "fedgame/idx.hpp"
#include "fedgame/manifest.hpp"
#include "fedgame/mechanism.hpp"

using nlohmann::json;
using namespace fedgame;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> deltas_csv;
  std::optional<int> seeds;
};

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = load_config_file(opts.config_path);
  } else {
    apply_env_overrides(cfg);
  }
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.deltas_csv) {
    std::vector<double> ds;
    std::stringstream ss(*opts.deltas_csv);
    std::string item;
    while (std::getline(ss, item, ',')) ds.push_back(std::stod(item));
    if (ds.empty()) throw ConfigError("--deltas: empty list");
    cfg.exp.deltas = ds;
  }
  if (opts.seeds) {
    if (*opts.seeds < 1) throw ConfigError("--seeds: must be >= 1");
    cfg.exp.seeds = *opts.seeds;
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_axis = false) {
  cmd->add_option("--config", opts.config_path, "config file (or a stored run manifest)");
  cmd->add_option("--seed", opts.seed, "master seed override");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--format", opts.format, "stdout format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  if (with_axis) {
    cmd->add_option("--deltas", opts.deltas_csv, "comma-separated heterogeneity degrees");
    cmd->add_option("--seeds", opts.seeds, "seeds per experiment point");
  }
}

int cmd_partition(const CommonOpts& opts) {
  RunConfig cfg = resolve_config(opts);
  auto specs = fltrain::build_partition_specs(cfg.hp, cfg.data);
  auto reference = LabelDistribution::uniform(cfg.hp.num_classes_I);
  if (opts.format == "json") {
    json out = json::array();
    for (std::size_t k = 0; k < specs.size(); ++k) {
      auto dist = datagen::make_label_distribution(specs[k], cfg.hp.num_classes_I);
      out.push_back({{"agent_id", k},
                     {"majority_class", specs[k].majority_class},
                     {"delta_partition_knob", cfg.data.partition_delta},
                     {"delta_eq1", datagen::wasserstein_delta(dist, reference)},
                     {"probs", dist.probs()}});
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "agent_id,majority_class,delta_partition_knob,delta_eq1";
    for (int c = 0; c < cfg.hp.num_classes_I; ++c) std::cout << ",p" << c;
    std::cout << "\n";
    for (std::size_t k = 0; k < specs.size(); ++k) {
      auto dist = datagen::make_label_distribution(specs[k], cfg.hp.num_classes_I);
      std::cout << k << ',' << specs[k].majority_class << ','
                << fltrain::format_double(cfg.data.partition_delta) << ','
                << fltrain::format_double(datagen::wasserstein_delta(dist, reference));
      for (int c = 0; c < cfg.hp.num_classes_I; ++c)
        std::cout << ',' << fltrain::format_double(dist[c]);
      std::cout << "\n";
    }
  }
  return 0;
}

int cmd_train(const CommonOpts& opts) {
  RunConfig cfg = resolve_config(opts);
  harness::RunManifest manifest(cfg, opts.out_dir);
  auto res = fltrain::run_training(cfg.hp, cfg.data, cfg.train, cfg.seed);
  fltrain::write_trace_csv(manifest.path("trace.csv"), res.trace);
  manifest.record_file("trace.csv");
  manifest.record_dataset("test", fnv1a64_bytes(res.test_data.features.data(),
                                                res.test_data.features.size() * sizeof(double)));
  json summary = harness::build_run_summary(res.trace);
  manifest.write_text("summary.json", summary.dump(2) + "\n");
  manifest.finalize();
  std::cout << "final fc_acc=" << summary["final_fc_acc"] << " fc_loss=" << summary["final_fc_loss"]
            << " -> " << opts.out_dir << "\n";
  return 0;
}

int cmd_bounds(const CommonOpts& opts, long t, long T_elapsed) {
  RunConfig cfg = resolve_config(opts);
  auto specs = fltrain::build_partition_specs(cfg.hp, cfg.data);
  auto reference = LabelDistribution::uniform(cfg.hp.num_classes_I);
  std::vector<double> deltas;
  std::vector<double> weights(specs.size(), 1.0 / static_cast<double>(specs.size()));
  for (const auto& s : specs)
    deltas.push_back(datagen::wasserstein_delta(
        datagen::make_label_distribution(s, cfg.hp.num_classes_I), reference));

  auto report_json = [](const bounds::BoundReport& r) {
    json j;
    j["value"] = r.value;
    j["formula"] = bounds::to_string(r.formula);
    j["inputs"] = r.inputs;
    j["flags"] = r.flags;
    return j;
  };

  json out;
  out["deltas"] = deltas;
  out["divergence"] = report_json(bounds::divergence_bound(cfg.hp, deltas, weights, t));
  if (cfg.hp.schedule == LrSchedule::decaying) {
    out["convergence"] =
        report_json(bounds::convergence_bound(cfg.hp, deltas, weights, T_elapsed));
  } else {
    out["convergence"] = "skipped: requires the decaying schedule";
  }
  out["phi_exact"] = bounds::compute_phi(cfg.hp, bounds::BoundMode::exact);
  out["phi_simplified"] = bounds::compute_phi(cfg.hp, bounds::BoundMode::simplified);
  out["upsilon_exact"] = report_json(bounds::compute_upsilon(cfg.hp, bounds::BoundMode::exact));
  out["upsilon_simplified"] =
      report_json(bounds::compute_upsilon(cfg.hp, bounds::BoundMode::simplified));
  auto gc = bounds::resolve_gap_constants(cfg.hp);
  out["gap_bound_first_two_agents"] =
      deltas.size() >= 2 ? json(bounds::gap_bound(deltas[0], deltas[1], gc.phi, gc.upsilon))
                         : json("skipped: needs two agents");
  json gv = json::array();
  for (double d : deltas) gv.push_back(bounds::grad_variance_bound(d, cfg.hp.grad_bound_G));
  out["grad_variance"] = gv;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_solve(const CommonOpts& opts) {
  RunConfig cfg = resolve_config(opts);
  auto profiles = build_profiles(cfg);
  auto mcfg = build_mechanism_config(cfg);
  auto eq = mechanism::best_response_dynamics(profiles, mcfg, build_brd_options(cfg));
  json out;
  out["efforts"] = eq.efforts;
  out["expected_utilities"] = eq.utilities;
  out["iterations"] = eq.iterations;
  out["residual"] = eq.residual;
  out["converged"] = eq.converged;
  out["deviation_audit"] = eq.deviation_audit;
  if (mcfg.payment_form == mechanism::PaymentForm::logarithmic) {
    auto q = mechanism::choose_Q(profiles, mcfg, 1e-9, eq.efforts);
    out["q_star"] = q.q_star;
    out["q_closed_form"] = q.q_closed_form;
    out["binding_agent"] = q.binding_agent;
    out["utilities_at_q_star"] = q.utilities_at_q;
    mechanism::MechanismConfig at_q = mcfg;
    at_q.Q = q.q_star;
    out["learner_payoff_at_q_star"] = mechanism::learner_payoff(eq.efforts, profiles, at_q);
  } else {
    out["learner_payoff"] = mechanism::learner_payoff(eq.efforts, profiles, mcfg);
  }
  out["simplified_bound"] = mechanism::simplified_bound(eq.efforts, profiles, mcfg);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_experiment(const CommonOpts& opts, const std::string& kind_str) {
  RunConfig cfg = resolve_config(opts);
  harness::PlanKind kind = harness::plan_kind_from_string(kind_str);
  harness::RunManifest manifest(cfg, opts.out_dir);
  switch (kind) {
    case harness::PlanKind::noniid_sweep: {
      auto s = harness::run_noniid_sweep(cfg, manifest);
      std::cout << "noniid_sweep: " << s.points.size() << " points -> " << opts.out_dir << "\n";
      break;
    }
    case harness::PlanKind::peer_gap: {
      double lo = cfg.exp.deltas.front(), hi = cfg.exp.deltas.back();
      auto r = harness::run_peer_gap(cfg, manifest, lo, hi);
      std::cout << "peer_gap: low-delta agent ahead in "
                << 100.0 * harness::peer_gap_win_fraction(r, 5) << "% of rounds after round 5 -> "
                << opts.out_dir << "\n";
      break;
    }
    case harness::PlanKind::bound_verify: {
      auto pts = harness::run_bound_verify(cfg, manifest);
      long viol = 0;
      for (const auto& p : pts) viol += p.divergence.violations + p.grad_gap.violations;
      std::cout << "bound_verify: " << pts.size() << " runs, " << viol << " violations -> "
                << opts.out_dir << "\n";
      break;
    }
    case harness::PlanKind::equilibrium_sim: {
      auto r = harness::run_equilibrium_sim(cfg, manifest);
      std::cout << "equilibrium_sim: converged=" << (r.equilibrium.converged ? "yes" : "no")
                << " Q*=" << r.q.q_star << " -> " << opts.out_dir << "\n";
      break;
    }
    case harness::PlanKind::deviation_study: {
      auto pts = harness::run_deviation_study(cfg, manifest);
      double best_e = 0.0, best_u = -1e300;
      for (const auto& p : pts)
        if (p.mean_utility > best_u) {
          best_u = p.mean_utility;
          best_e = p.effort;
        }
      std::cout << "deviation_study: best grid effort " << best_e << " -> " << opts.out_dir << "\n";
      break;
    }
  }
  manifest.finalize();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedgame: federated-learning simulator and incentive mechanism library"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string experiment_kind;
  long bounds_t = 0, bounds_T = 1;
  std::string report_dir;
  std::string idx_images, idx_labels;

  auto* partition = app.add_subcommand("partition", "emit per-agent label distributions");
  add_common(partition, opts);

  auto* train = app.add_subcommand("train", "run one training job");
  add_common(train, opts);

  auto* bounds_cmd = app.add_subcommand("bounds", "print bound reports from a config");
  add_common(bounds_cmd, opts);
  bounds_cmd->add_option("--t", bounds_t, "epoch index for the divergence bound");
  bounds_cmd->add_option("--T-elapsed", bounds_T, "elapsed rounds for the convergence bound");

  auto* solve = app.add_subcommand("solve", "solve the incentive game");
  add_common(solve, opts);

  auto* experiment = app.add_subcommand("experiment", "run a full experiment plan");
  experiment->add_option("kind", experiment_kind,
                         "noniid_sweep | peer_gap | bound_verify | equilibrium_sim | deviation_study")
      ->required();
  add_common(experiment, opts, /*with_axis=*/true);

  auto* report = app.add_subcommand("report", "re-render summaries from stored traces");
  report->add_option("--out", report_dir, "directory holding trace CSVs")->required();

  auto* idx = app.add_subcommand("idx-info", "parse an IDX image/label pair and print stats");
  idx->add_option("--images", idx_images)->required();
  idx->add_option("--labels", idx_labels)->required();
  add_common(idx, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return 0;
    }
    std::cerr << e.what() << "\n" << app.help() << std::flush;
    return 1;
  }

  try {
    if (partition->parsed()) return cmd_partition(opts);
    if (train->parsed()) return cmd_train(opts);
    if (bounds_cmd->parsed()) return cmd_bounds(opts, bounds_t, bounds_T);
    if (solve->parsed()) return cmd_solve(opts);
    if (experiment->parsed()) return cmd_experiment(opts, experiment_kind);
    if (report->parsed()) {
      harness::rerender_reports(report_dir);
      std::cout << "report: summaries re-rendered in " << report_dir << "\n";
      return 0;
    }
    if (idx->parsed()) {
      RunConfig cfg = resolve_config(opts);
      auto ds = harness::load_idx_dataset(idx_images, idx_labels, cfg.hp.num_classes_I);
      std::cout << "n=" << ds.n << " d=" << ds.d << " classes=" << ds.classes << "\n";
      return 0;
    }
  } catch (const NumericalFault& e) {
    std::cerr << "numerical fault: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
