#pragma once
// Closed-form bound calculators: model divergence, convergence, the
// generalization-gap constants Phi/Upsilon, the gap bound itself and the
// gradient-variance bound.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedgame/core.hpp"

namespace fedgame::bounds {

using fedgame::ConfigError;
using fedgame::HyperParams;
using fedgame::learning_rate;

enum class BoundFormula { divergence, convergence, gap, grad_variance, phi, upsilon };

inline std::string to_string(BoundFormula f) {
  switch (f) {
    case BoundFormula::divergence: return "divergence";
    case BoundFormula::convergence: return "convergence";
    case BoundFormula::gap: return "gap";
    case BoundFormula::grad_variance: return "grad_variance";
    case BoundFormula::phi: return "phi";
    case BoundFormula::upsilon: return "upsilon";
  }
  return "?";
}

struct BoundReport {
  double value = 0.0;
  BoundFormula formula = BoundFormula::divergence;
  std::map<std::string, double> inputs;  // everything needed to recompute value
  std::vector<std::string> flags;

  bool flagged(const std::string& name) const {
    for (const auto& f : flags)
      if (f == name) return true;
    return false;
  }
};

enum class BoundMode { exact, simplified };

// ---------------------------------------------------------------------------
// Divergence bound: 64 (E-1) G^2 eta_t^2 (1 + 2 eta_t L)^(2(E-1)) sum_k p_k delta_k^2.

inline BoundReport divergence_bound(const HyperParams& hp, const std::vector<double>& deltas,
                                    const std::vector<double>& weights, long t) {
  if (deltas.size() != weights.size())
    throw ConfigError("divergence_bound: deltas/weights size mismatch");
  double weighted = 0.0;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (deltas[k] < 0.0 || deltas[k] > 1.0)
      throw ConfigError("divergence_bound: delta_k must lie in [0,1]");
    weighted += weights[k] * deltas[k] * deltas[k];
  }
  double eta = learning_rate(t, hp);
  double E = static_cast<double>(hp.local_epochs_E);
  double G = hp.grad_bound_G;
  double L = hp.lipschitz_L;
  double growth = std::pow(1.0 + 2.0 * eta * L, 2.0 * (E - 1.0));
  BoundReport rep;
  rep.formula = BoundFormula::divergence;
  rep.value = 64.0 * (E - 1.0) * G * G * eta * eta * growth * weighted;
  rep.inputs = {{"E", E},   {"G", G},    {"L", L},
                {"eta_t", eta}, {"t", static_cast<double>(t)},
                {"sum_pk_delta_sq", weighted}};
  return rep;
}

// delta-dependent term of the constant B, i.e. the divergence bound above.
inline double divergence_term_of_B(const HyperParams& hp, const std::vector<double>& deltas,
                                   const std::vector<double>& weights, long t) {
  return divergence_bound(hp, deltas, weights, t).value;
}

// ---------------------------------------------------------------------------
// Convergence bound (decaying schedule):
//   kappa / (gamma + T - 1) * (2B/mu + (mu*gamma/2) * E||w_1 - w*||^2)
// with B = divergence term + sum p_k^2 sigma_k^2 + 6 L Gamma. The divergence
// term is evaluated at t = 0, the largest step of the decaying schedule.
// When the initial distance is unobservable the 4G^2/mu^2 surrogate is used
// and flagged.

inline BoundReport convergence_bound(const HyperParams& hp, const std::vector<double>& deltas,
                                     const std::vector<double>& weights, long T_elapsed,
                                     std::optional<double> w_init_dist_sq = std::nullopt) {
  if (hp.schedule != LrSchedule::decaying)
    throw ConfigError("convergence_bound: requires the decaying schedule "
                      "(constant schedule configured)");
  if (T_elapsed < 1) throw ConfigError("convergence_bound: T_elapsed must be >= 1");

  double div_term = divergence_term_of_B(hp, deltas, weights, 0);
  double var_term = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    double s = hp.sigma(static_cast<int>(k));
    var_term += weights[k] * weights[k] * s * s;
  }
  double B = div_term + var_term + 6.0 * hp.lipschitz_L * hp.gamma_het;

  BoundReport rep;
  rep.formula = BoundFormula::convergence;
  double w0;
  if (w_init_dist_sq.has_value()) {
    w0 = *w_init_dist_sq;
  } else {
    double G = hp.grad_bound_G;
    w0 = 4.0 * G * G / (hp.mu * hp.mu);
    rep.flags.push_back("w_init_dist_sq_surrogate");
  }
  double gamma = hp.gamma_sched();
  double kappa = hp.kappa();
  rep.value = kappa / (gamma + static_cast<double>(T_elapsed) - 1.0) *
              (2.0 * B / hp.mu + hp.mu * gamma / 2.0 * w0);
  rep.inputs = {{"kappa", kappa},       {"gamma_sched", gamma},
                {"T_elapsed", static_cast<double>(T_elapsed)},
                {"B", B},               {"B_divergence_term", div_term},
                {"B_variance_term", var_term},
                {"gamma_het", hp.gamma_het}, {"L", hp.lipschitz_L},
                {"mu", hp.mu},          {"w_init_dist_sq", w0}};
  return rep;
}

// ---------------------------------------------------------------------------
// Gap-bound constants.
//   exact:      Phi = 16 L^2 G^2 sum_{t=0}^{E-1} (eta_t^2 (1 + 2 eta_t^2 L^2))^t
//   simplified: Phi = 6 E G^2   (constant eta = 0.01, L = 100 regime)

inline double compute_phi(const HyperParams& hp, BoundMode mode) {
  if (hp.local_epochs_E < 1) throw ConfigError("compute_phi: E must be >= 1");
  double G = hp.grad_bound_G;
  if (mode == BoundMode::simplified)
    return 6.0 * static_cast<double>(hp.local_epochs_E) * G * G;
  double L = hp.lipschitz_L;
  double sum = 0.0;
  for (int t = 0; t < hp.local_epochs_E; ++t) {
    double eta = learning_rate(t, hp);
    sum += std::pow(eta * eta * (1.0 + 2.0 * eta * eta * L * L), t);
  }
  return 16.0 * L * L * G * G * sum;
}

//   exact:      Upsilon = prod_{t}(1-2 eta_t L)^t * 2G^2 L / mu^2
//                         + (L G^2 / 2) sum_t (1-2 eta_t L)^t eta_t^2
//   simplified: Upsilon = 2 G^2 / mu  (even-E regime)
// A non-positive exact value is flagged; callers fall back to simplified.

inline BoundReport compute_upsilon(const HyperParams& hp, BoundMode mode) {
  if (hp.local_epochs_E < 1) throw ConfigError("compute_upsilon: E must be >= 1");
  double G = hp.grad_bound_G;
  BoundReport rep;
  rep.formula = BoundFormula::upsilon;
  rep.inputs = {{"G", G}, {"mu", hp.mu}, {"L", hp.lipschitz_L},
                {"E", static_cast<double>(hp.local_epochs_E)},
                {"mode", mode == BoundMode::exact ? 1.0 : 0.0}};
  if (mode == BoundMode::simplified) {
    rep.value = 2.0 * G * G / hp.mu;
    return rep;
  }
  double L = hp.lipschitz_L;
  double prod = 1.0;
  double sum = 0.0;
  for (int t = 0; t < hp.local_epochs_E; ++t) {
    double eta = learning_rate(t, hp);
    double base = 1.0 - 2.0 * eta * L;
    double pow_t = std::pow(base, t);
    prod *= pow_t;
    sum += pow_t * eta * eta;
  }
  rep.value = prod * 2.0 * G * G * L / (hp.mu * hp.mu) + L * G * G / 2.0 * sum;
  if (!(rep.value > 0.0)) rep.flags.push_back("upsilon_nonpositive");
  return rep;
}

// Resolved (Phi, Upsilon) pair for a config: explicit values win, otherwise
// the simplified formulas (the exact Upsilon flips sign under the default
// eta*L = 1 schedule, so simplified is the working default).
struct GapConstants {
  double phi = 0.0;
  double upsilon = 0.0;
};

inline GapConstants resolve_gap_constants(const HyperParams& hp) {
  GapConstants g;
  g.phi = hp.phi > 0.0 ? hp.phi : compute_phi(hp, BoundMode::simplified);
  g.upsilon = hp.upsilon > 0.0 ? hp.upsilon : compute_upsilon(hp, BoundMode::simplified).value;
  return g;
}

// ---------------------------------------------------------------------------
// Generalization-gap bound: Phi dk^2 + Phi dk'^2 + Upsilon.

inline double gap_bound(double delta_k, double delta_kp, double phi, double upsilon) {
  if (delta_k < 0.0 || delta_kp < 0.0)
    throw ConfigError("gap_bound: deltas must be >= 0");
  if (!(phi > 0.0) || !(upsilon > 0.0))
    throw ConfigError("gap_bound: phi and upsilon must be > 0");
  return phi * delta_k * delta_k + phi * delta_kp * delta_kp + upsilon;
}

// ---------------------------------------------------------------------------
// Gradient-variance bound: ||grad F_k - grad F||^2 <= 4 G^2 delta_k^2.

inline double grad_variance_bound(double delta_k, double G) {
  if (delta_k < 0.0 || delta_k > 1.0)
    throw ConfigError("grad_variance_bound: delta_k must lie in [0,1]");
  if (!(G > 0.0)) throw ConfigError("grad_variance_bound: G must be > 0");
  return 4.0 * G * G * delta_k * delta_k;
}

}  // namespace fedgame::bounds
