#pragma once
// Two-stage Stackelberg incentive mechanism: payment/cost/utility evaluation,
// payment concavity checks, optimal-effort solvers (closed-form quadratic for
// the logarithmic payment, quartic for the linear payment, golden-section
// numeric fallback), best-response dynamics with a deviation audit, and the
// learner's minimal initial payment Q.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedgame/core.hpp"
#include "fedgame/datagen.hpp"

namespace fedgame::mechanism {

using datagen::EffortMap;

enum class PaymentForm { logarithmic, linear };

struct MechanismConfig {
  PaymentForm payment_form = PaymentForm::logarithmic;
  double kappa_lin = 1.0;   // slope of the linear payment form
  double Q = 25000.0;       // initial payment
  double phi = 3000.0;      // gap-bound slope
  double upsilon = 20000.0; // gap-bound offset
  double reward_scale = 1.0;  // g(x) = reward_scale * x
  double omega = 0.5;         // constant of the simplified bound
  double bound_coeff = 1.0;   // coefficient of sum p_k delta_k^2
  int rounds_T = 50;          // payment rounds in the learner's payoff

  void check() const {
    if (!(Q > 0.0)) throw ConfigError("mechanism: Q must be > 0");
    if (!(phi > 0.0) || !(upsilon > 0.0))
      throw ConfigError("mechanism: phi and upsilon must be > 0");
    if (payment_form == PaymentForm::linear && !(kappa_lin > 0.0))
      throw ConfigError("mechanism: kappa_lin must be > 0");
    if (omega < 0.0 || bound_coeff < 0.0)
      throw ConfigError("mechanism: omega and bound_coeff must be >= 0");
    if (!(omega > 0.0) && !(bound_coeff > 0.0))
      throw ConfigError("mechanism: simplified bound would be 0 (omega and bound_coeff both 0)");
  }
};

struct AgentProfile {
  int id = 0;
  double weight = 1.0;         // p_k
  double marginal_cost = 0.2;  // c
  double effort = 1.0;         // e_k, also the best-response starting point
  EffortMap effort_map;
  double delta0 = 1.0;  // delta_k(0); 1 for exp(-e), 1/2 in the data-sharing convention

  void check() const {
    if (!(marginal_cost > 0.0)) throw ConfigError("agent: marginal_cost must be > 0");
    if (effort < 0.0 || effort > 1.0) throw ConfigError("agent: effort must lie in [0,1]");
    if (delta0 < 0.0 || delta0 > 1.0) throw ConfigError("agent: delta0 must lie in [0,1]");
  }
};

// Agent k's distance at effort e: delta0 * exp(-e).
inline double delta_at(const AgentProfile& a, double e) {
  return a.delta0 * datagen::effort_to_delta(e, a.effort_map);
}

// ---------------------------------------------------------------------------
// Payment, cost, utility.

// D = Phi dk^2 + Phi dk'^2 + Upsilon; log form returns ln(Q/D), linear form
// kappa * Q / D.
inline double payment_from_deltas(double delta_k, double delta_kp, const MechanismConfig& cfg) {
  double D = cfg.phi * delta_k * delta_k + cfg.phi * delta_kp * delta_kp + cfg.upsilon;
  if (!(D > 0.0))
    throw ConfigError("payment: gap bound is not positive (upsilon must be > 0)");
  if (cfg.payment_form == PaymentForm::logarithmic) return std::log(cfg.Q / D);
  return cfg.kappa_lin * cfg.Q / D;
}

inline double payment(double e_k, double e_kp, const MechanismConfig& cfg,
                      double delta0 = 1.0) {
  double dk = delta0 * datagen::effort_to_delta(e_k);
  double dkp = delta0 * datagen::effort_to_delta(e_kp);
  return payment_from_deltas(dk, dkp, cfg);
}

// Cost_k(e) = c * |delta_k(0) - delta_k(e)| with the linear distance scale.
inline double cost(double e_k, const AgentProfile& a) {
  return a.marginal_cost * std::abs(a.delta0 - delta_at(a, e_k));
}

inline double utility(double e_k, double e_kp, const AgentProfile& a,
                      const MechanismConfig& cfg) {
  return payment(e_k, e_kp, cfg, a.delta0) - cost(e_k, a);
}

// Expected utility under uniform peer selection: mean over peers of the
// pairwise payment, minus the cost.
inline double expected_utility_deltas(double e_k, const std::vector<double>& peer_deltas,
                                      const AgentProfile& a, const MechanismConfig& cfg) {
  if (peer_deltas.empty())
    throw ConfigError("expected_utility: at least one peer required (N >= 2)");
  double dk = delta_at(a, e_k);
  double pay = 0.0;
  for (double dp : peer_deltas) pay += payment_from_deltas(dk, dp, cfg);
  pay /= static_cast<double>(peer_deltas.size());
  return pay - cost(e_k, a);
}

inline double expected_utility(double e_k, const std::vector<AgentProfile>& profiles,
                               int agent_index, const std::vector<double>& efforts,
                               const MechanismConfig& cfg) {
  std::vector<double> peer_deltas;
  for (std::size_t j = 0; j < profiles.size(); ++j)
    if (static_cast<int>(j) != agent_index)
      peer_deltas.push_back(delta_at(profiles[j], efforts[j]));
  return expected_utility_deltas(e_k, peer_deltas, profiles[static_cast<std::size_t>(agent_index)],
                                 cfg);
}

// ---------------------------------------------------------------------------
// Payment concavity (Assumption-5 style check). For the exponential effort
// map (delta' = -delta, delta'' = delta) the analytic condition for the log
// form reduces to Phi dk^2 < Phi dk'^2 + Upsilon; the linear form is concave
// unconditionally.

struct ConcavityViolation {
  double effort = 0.0;
  double first_derivative = 0.0;
  double second_derivative = 0.0;
  bool analytic = false;  // true when the analytic sign condition fails here
};

struct ConcavityReport {
  std::vector<ConcavityViolation> violations;
  int grid_points = 0;
  bool ok() const { return violations.empty(); }
};

inline ConcavityReport check_payment_concavity(const MechanismConfig& cfg,
                                               const AgentProfile& a, int grid_points,
                                               double peer_effort = 0.0) {
  if (grid_points < 11) throw ConfigError("check_payment_concavity: grid resolution >= 11");
  cfg.check();
  double dkp = delta_at(a, peer_effort);
  double peer_term = cfg.phi * dkp * dkp + cfg.upsilon;

  auto f = [&](double e) {
    double dk = delta_at(a, e);
    return payment_from_deltas(dk, dkp, cfg);
  };

  ConcavityReport rep;
  rep.grid_points = grid_points;
  const double h = 1e-5;
  for (int i = 0; i < grid_points; ++i) {
    double e = static_cast<double>(i) / (grid_points - 1);
    double dk = delta_at(a, e);

    bool analytic_bad;
    if (cfg.payment_form == PaymentForm::logarithmic) {
      // (3 Phi dk^2 - Phi dk'^2 - Upsilon) dk'^2_deriv - (...) dk dk'' < 0
      // reduces to Phi dk^2 - peer_term < 0 for the exponential map.
      analytic_bad = !(cfg.phi * dk * dk - peer_term < 0.0);
    } else {
      // (peer_term - Phi dk^2) delta'^2 + (peer_term + Phi dk^2) dk dk'' > 0
      // reduces to 2 dk^2 peer_term > 0: always holds for dk > 0.
      analytic_bad = !(2.0 * dk * dk * peer_term > 0.0);
    }

    double ec = std::min(1.0 - h, std::max(h, e));
    double f0 = f(ec), fp = f(ec + h), fm = f(ec - h);
    double d1 = (fp - fm) / (2.0 * h);
    double d2 = (fp - 2.0 * f0 + fm) / (h * h);
    bool numeric_bad = (d1 <= 0.0) || (d2 >= 0.0);

    if (analytic_bad || numeric_bad)
      rep.violations.push_back({e, d1, d2, analytic_bad});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Optimal effort.

enum class EffortCase { zero, interior, clamped };

inline std::string to_string(EffortCase c) {
  switch (c) {
    case EffortCase::zero: return "zero";
    case EffortCase::interior: return "interior";
    case EffortCase::clamped: return "clamped";
  }
  return "?";
}

enum class SolveMethod { closed_form, numeric };

struct OptimalEffort {
  double effort = 0.0;
  double utility = 0.0;
  EffortCase kase = EffortCase::zero;
  std::vector<double> stationary_deltas;  // accepted roots, in delta space
};

namespace detail {

// Real roots of the quadratic x^2 + bx + c via the numerically stable form.
inline std::vector<double> quadratic_roots(double b, double c) {
  double disc = b * b - 4.0 * c;
  if (disc < 0.0) return {};
  double sq = std::sqrt(disc);
  double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  std::vector<double> roots;
  roots.push_back(q);
  if (q != 0.0) roots.push_back(c / q);
  else roots.push_back(-b - q);
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Real roots of a polynomial on [lo, hi] by dense sign-change bracketing and
// bisection. Tangent roots without a sign change are not found; callers treat
// the result as stationary-point candidates, not an exhaustive factorization.
inline std::vector<double> bracketed_roots(const std::function<double(double)>& poly,
                                           double lo, double hi, int grid = 4096) {
  std::vector<double> roots;
  double prev_x = lo, prev_v = poly(lo);
  if (prev_v == 0.0) roots.push_back(lo);
  for (int i = 1; i <= grid; ++i) {
    double x = lo + (hi - lo) * i / grid;
    double v = poly(x);
    if (v == 0.0) {
      roots.push_back(x);
    } else if (prev_v != 0.0 && ((prev_v < 0.0) != (v < 0.0))) {
      double a = prev_x, b = x, fa = prev_v;
      for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        double fm = poly(m);
        if (fm == 0.0) { a = b = m; break; }
        if ((fa < 0.0) != (fm < 0.0)) b = m;
        else { a = m; fa = fm; }
        if (b - a < 1e-15) break;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_v = v;
  }
  return roots;
}

struct Candidate {
  double effort;
  bool from_clamped_root;
  double stationary_delta;  // NaN when not root-derived
};

}  // namespace detail

// Stationary-point roots (in delta space) of the interior optimality
// condition. Logarithmic form: delta^2 - (2/c) delta + (dkp2 + Upsilon/Phi) = 0.
inline std::vector<double> log_form_stationary_deltas(double marginal_cost, double peer_delta_sq,
                                                      const MechanismConfig& cfg) {
  return detail::quadratic_roots(-2.0 / marginal_cost,
                                 peer_delta_sq + cfg.upsilon / cfg.phi);
}

// Linear form: delta^4 + 2 (dkp2 + v) delta^2 - (2 kappa Q / (c Phi)) delta
// + (dkp2 + v)^2 = 0 with v = Upsilon/Phi (stationarity of kappa Q / D - c
// applied to the squared denominator).
inline double linear_form_quartic(double delta, double marginal_cost, double peer_delta_sq,
                                  const MechanismConfig& cfg) {
  double v = cfg.upsilon / cfg.phi;
  double a = peer_delta_sq + v;
  return delta * delta * delta * delta + 2.0 * a * delta * delta -
         2.0 * cfg.kappa_lin * cfg.Q / (marginal_cost * cfg.phi) * delta + a * a;
}

inline OptimalEffort optimal_effort(const AgentProfile& a, const std::vector<double>& peer_deltas,
                                    const MechanismConfig& cfg,
                                    SolveMethod method = SolveMethod::closed_form) {
  cfg.check();
  a.check();
  auto eu = [&](double e) { return expected_utility_deltas(e, peer_deltas, a, cfg); };

  if (method == SolveMethod::numeric) {
    // Coarse scan then golden-section refinement; robust to the dip-then-rise
    // shape the payment/cost composition can take.
    const int scan = 2000;
    int best_i = 0;
    double best_u = eu(0.0);
    for (int i = 1; i <= scan; ++i) {
      double e = static_cast<double>(i) / scan;
      double u = eu(e);
      if (u > best_u) {
        best_u = u;
        best_i = i;
      }
    }
    double lo = std::max(0.0, (best_i - 1.0) / scan);
    double hi = std::min(1.0, (best_i + 1.0) / scan);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = eu(x1), f2 = eu(x2);
    while (hi - lo > 1e-8) {
      if (f1 < f2) {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + gr * (hi - lo); f2 = eu(x2);
      } else {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - gr * (hi - lo); f1 = eu(x1);
      }
    }
    double e_star = 0.5 * (lo + hi);
    double u_star = eu(e_star);
    // Boundaries can beat the refined interior point when the max sits there.
    for (double b : {0.0, 1.0}) {
      double u = eu(b);
      if (u > u_star) { u_star = u; e_star = b; }
    }
    OptimalEffort out;
    if (u_star <= 0.0) return {0.0, eu(0.0), EffortCase::zero, {}};
    out.effort = e_star;
    out.utility = u_star;
    out.kase = e_star <= 0.0 ? EffortCase::zero
               : (e_star >= 1.0 ? EffortCase::clamped : EffortCase::interior);
    return out;
  }

  double peer_sq = 0.0;
  for (double d : peer_deltas) peer_sq += d * d;
  peer_sq /= static_cast<double>(peer_deltas.empty() ? 1 : peer_deltas.size());

  std::vector<detail::Candidate> candidates;
  std::vector<double> accepted;
  if (cfg.payment_form == PaymentForm::logarithmic) {
    for (double root : log_form_stationary_deltas(a.marginal_cost, peer_sq, cfg)) {
      if (root <= 0.0) continue;
      auto inv = datagen::delta_to_effort(std::min(1.0, root / std::max(a.delta0, 1e-300)));
      bool clamped = inv.clamped || root > a.delta0;
      candidates.push_back({inv.effort, clamped, root});
      accepted.push_back(root);
    }
  } else {
    auto poly = [&](double x) { return linear_form_quartic(x, a.marginal_cost, peer_sq, cfg); };
    for (double root : detail::bracketed_roots(poly, 0.0, std::max(1.0, a.delta0))) {
      if (root <= 0.0) continue;
      if (std::abs(poly(root)) >= 1e-9) continue;  // accepted roots must be true roots
      auto inv = datagen::delta_to_effort(std::min(1.0, root / std::max(a.delta0, 1e-300)));
      bool clamped = inv.clamped || root > a.delta0;
      candidates.push_back({inv.effort, clamped, root});
      accepted.push_back(root);
    }
  }
  candidates.push_back({0.0, false, std::numeric_limits<double>::quiet_NaN()});
  candidates.push_back({1.0, false, std::numeric_limits<double>::quiet_NaN()});

  double best_u = -std::numeric_limits<double>::infinity();
  detail::Candidate best{0.0, false, 0.0};
  for (const auto& c : candidates) {
    double u = eu(c.effort);
    if (u > best_u) {
      best_u = u;
      best = c;
    }
  }

  OptimalEffort out;
  out.stationary_deltas = accepted;
  if (best_u <= 0.0) {  // high-cost case: no incentive to participate
    out.effort = 0.0;
    out.utility = eu(0.0);
    out.kase = EffortCase::zero;
    return out;
  }
  out.effort = best.effort;
  out.utility = best_u;
  if (best.effort <= 0.0) out.kase = EffortCase::zero;
  else if (best.effort >= 1.0 || best.from_clamped_root) out.kase = EffortCase::clamped;
  else out.kase = EffortCase::interior;
  return out;
}

// ---------------------------------------------------------------------------
// Best-response dynamics to a pure Nash equilibrium.

struct EquilibriumResult {
  std::vector<double> efforts;
  std::vector<double> utilities;        // expected utilities at the fixed point
  int iterations = 0;                   // sweeps executed
  double residual = 0.0;                // max effort change in the last sweep
  bool converged = false;
  std::vector<double> deviation_audit;  // per-agent best improvement on the grid
  std::vector<std::vector<double>> effort_history;  // efforts after each sweep
};

struct BrdOptions {
  double tol = 1e-6;
  int max_sweeps = 200;
  double damping = 0.0;  // e <- damping * old + (1-damping) * response
  int audit_grid = 101;
  SolveMethod method = SolveMethod::closed_form;
};

inline EquilibriumResult best_response_dynamics(const std::vector<AgentProfile>& profiles,
                                                const MechanismConfig& cfg,
                                                const BrdOptions& opt = {}) {
  const int N = static_cast<int>(profiles.size());
  if (N < 2) throw ConfigError("best_response_dynamics: N >= 2 required");
  if (!(opt.tol > 0.0)) throw ConfigError("best_response_dynamics: tol must be > 0");
  double wsum = 0.0;
  for (const auto& p : profiles) wsum += p.weight;
  if (std::abs(wsum - 1.0) > 1e-9)
    throw ConfigError("best_response_dynamics: agent weights must sum to 1");

  EquilibriumResult res;
  res.efforts.resize(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) res.efforts[static_cast<std::size_t>(k)] = profiles[static_cast<std::size_t>(k)].effort;

  std::vector<double> next(static_cast<std::size_t>(N), 0.0);
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    for (int k = 0; k < N; ++k) {
      std::vector<double> peer_deltas;
      for (int j = 0; j < N; ++j)
        if (j != k)
          peer_deltas.push_back(
              delta_at(profiles[static_cast<std::size_t>(j)], res.efforts[static_cast<std::size_t>(j)]));
      double response =
          optimal_effort(profiles[static_cast<std::size_t>(k)], peer_deltas, cfg, opt.method).effort;
      next[static_cast<std::size_t>(k)] =
          opt.damping * res.efforts[static_cast<std::size_t>(k)] + (1.0 - opt.damping) * response;
    }
    double residual = 0.0;
    for (int k = 0; k < N; ++k)
      residual = std::max(residual,
                          std::abs(next[static_cast<std::size_t>(k)] - res.efforts[static_cast<std::size_t>(k)]));
    res.efforts = next;
    res.effort_history.push_back(res.efforts);
    res.iterations = sweep;
    res.residual = residual;
    if (residual < opt.tol) break;
  }

  // Deviation audit: Theorem-6 certificate on a uniform effort grid.
  res.deviation_audit.assign(static_cast<std::size_t>(N), 0.0);
  res.utilities.assign(static_cast<std::size_t>(N), 0.0);
  bool no_improvement = true;
  for (int k = 0; k < N; ++k) {
    double base = expected_utility(res.efforts[static_cast<std::size_t>(k)], profiles, k,
                                   res.efforts, cfg);
    res.utilities[static_cast<std::size_t>(k)] = base;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < opt.audit_grid; ++i) {
      double e = static_cast<double>(i) / (opt.audit_grid - 1);
      double gain = expected_utility(e, profiles, k, res.efforts, cfg) - base;
      best_gain = std::max(best_gain, gain);
    }
    res.deviation_audit[static_cast<std::size_t>(k)] = best_gain;
    if (best_gain > 10.0 * opt.tol) no_improvement = false;
  }
  res.converged = res.residual < opt.tol && no_improvement;
  return res;
}

// ---------------------------------------------------------------------------
// Learner side: the simplified convergence proxy, the payoff, and the minimal
// initial payment Q.

inline double simplified_bound(const std::vector<double>& efforts,
                               const std::vector<AgentProfile>& profiles,
                               const MechanismConfig& cfg) {
  double acc = 0.0;
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    double d = delta_at(profiles[k], efforts[k]);
    acc += profiles[k].weight * d * d;
  }
  return cfg.omega + cfg.bound_coeff * acc;
}

inline double learner_payoff(const std::vector<double>& efforts,
                             const std::vector<AgentProfile>& profiles,
                             const MechanismConfig& cfg) {
  double bound = simplified_bound(efforts, profiles, cfg);
  if (!(bound > 0.0)) throw ConfigError("learner_payoff: simplified bound must be positive");
  double payments = 0.0;
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    std::vector<double> peer_deltas;
    for (std::size_t j = 0; j < profiles.size(); ++j)
      if (j != k) peer_deltas.push_back(delta_at(profiles[j], efforts[j]));
    double dk = delta_at(profiles[k], efforts[k]);
    double pay = 0.0;
    for (double dp : peer_deltas) pay += payment_from_deltas(dk, dp, cfg);
    payments += pay / static_cast<double>(peer_deltas.size());
  }
  return cfg.reward_scale / bound - static_cast<double>(cfg.rounds_T) * payments;
}

// Minimal Q with u_k(e*) >= 0 for all k, log form. The log-form optimum is
// Q-independent, so the equilibrium is solved once; the closed form is
// Q_k = exp(mean_k' ln D_kk' + cost_k) and Q* = max_k Q_k.
struct QSelection {
  double q_star = 0.0;        // bisection result
  double q_closed_form = 0.0; // max_k D_k exp(cost_k), D_k the peer geometric mean
  int binding_agent = 0;
  std::vector<double> efforts;
  std::vector<double> utilities_at_q;  // expected utilities at q_star
};

inline QSelection choose_Q(const std::vector<AgentProfile>& profiles, MechanismConfig cfg,
                           double tol = 1e-9,
                           const std::optional<std::vector<double>>& efforts_hint = std::nullopt) {
  if (cfg.payment_form != PaymentForm::logarithmic)
    throw ConfigError("choose_Q: requires the logarithmic payment form");
  if (!(tol > 0.0)) throw ConfigError("choose_Q: tol must be > 0");
  const int N = static_cast<int>(profiles.size());

  QSelection sel;
  sel.efforts = efforts_hint ? *efforts_hint
                             : best_response_dynamics(profiles, cfg).efforts;

  // ln Q_k = mean over peers of ln D_kk' + cost_k.
  std::vector<double> ln_qk(static_cast<std::size_t>(N), 0.0);
  for (int k = 0; k < N; ++k) {
    double dk = delta_at(profiles[static_cast<std::size_t>(k)], sel.efforts[static_cast<std::size_t>(k)]);
    double mean_ln_d = 0.0;
    int peers = 0;
    for (int j = 0; j < N; ++j) {
      if (j == k) continue;
      double dp = delta_at(profiles[static_cast<std::size_t>(j)], sel.efforts[static_cast<std::size_t>(j)]);
      mean_ln_d += std::log(cfg.phi * dk * dk + cfg.phi * dp * dp + cfg.upsilon);
      ++peers;
    }
    if (peers == 0) throw ConfigError("choose_Q: N >= 2 required");
    mean_ln_d /= peers;
    ln_qk[static_cast<std::size_t>(k)] =
        mean_ln_d + cost(sel.efforts[static_cast<std::size_t>(k)], profiles[static_cast<std::size_t>(k)]);
  }
  int binding = 0;
  for (int k = 1; k < N; ++k)
    if (ln_qk[static_cast<std::size_t>(k)] > ln_qk[static_cast<std::size_t>(binding)]) binding = k;
  sel.binding_agent = binding;
  sel.q_closed_form = std::exp(ln_qk[static_cast<std::size_t>(binding)]);

  auto min_utility = [&](double q) {
    MechanismConfig c2 = cfg;
    c2.Q = q;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < N; ++k)
      worst = std::min(worst, expected_utility(sel.efforts[static_cast<std::size_t>(k)], profiles, k,
                                               sel.efforts, c2));
    return worst;
  };

  double lo = sel.q_closed_form, hi = sel.q_closed_form;
  int guard = 0;
  while (min_utility(lo) > 0.0) {
    lo *= 0.5;
    if (++guard > 200) throw ConfigError("choose_Q: bracket expansion failed (low side)");
  }
  guard = 0;
  while (min_utility(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 200) throw ConfigError("choose_Q: bracket expansion failed (high side)");
  }
  while ((hi - lo) / hi > tol) {
    double mid = 0.5 * (lo + hi);
    if (min_utility(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  sel.q_star = hi;

  MechanismConfig at_q = cfg;
  at_q.Q = sel.q_star;
  sel.utilities_at_q.resize(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k)
    sel.utilities_at_q[static_cast<std::size_t>(k)] =
        expected_utility(sel.efforts[static_cast<std::size_t>(k)], profiles, k, sel.efforts, at_q);
  return sel;
}

// Symmetric profile helper used by defaults and tests.
inline std::vector<AgentProfile> symmetric_profiles(int n, double marginal_cost,
                                                    double initial_effort = 1.0,
                                                    double delta0 = 1.0) {
  std::vector<AgentProfile> out;
  for (int k = 0; k < n; ++k) {
    AgentProfile a;
    a.id = k;
    a.weight = 1.0 / n;
    a.marginal_cost = marginal_cost;
    a.effort = initial_effort;
    a.delta0 = delta0;
    out.push_back(a);
  }
  return out;
}

}  // namespace fedgame::mechanism
