#pragma once
// Shared domain types: label distributions, hyperparameters, learning-rate
// schedules and deterministic RNG streams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fedgame {

// ---------------------------------------------------------------------------
// Errors. The CLI maps ConfigError -> exit 1 and NumericalFault -> exit 2.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFault : public std::runtime_error {
 public:
  NumericalFault(const std::string& what, long epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"),
        epoch_(epoch) {}
  long epoch() const { return epoch_; }

 private:
  long epoch_;
};

// ---------------------------------------------------------------------------
// Small hash utilities, used for RNG stream derivation and file fingerprints.

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64_bytes(const void* data, std::size_t n,
                                   std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// ---------------------------------------------------------------------------
// LabelDistribution: probability vector over I component classes.
// Construction renormalizes and rejects drift beyond 1e-9.

class LabelDistribution {
 public:
  explicit LabelDistribution(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.size() < 2) {
      throw ConfigError("LabelDistribution requires at least 2 classes, got " +
                        std::to_string(p_.size()));
    }
    double sum = 0.0;
    for (double v : p_) {
      if (!(v >= -1e-15) || v > 1.0 + 1e-9) {
        throw ConfigError("LabelDistribution entry out of [0,1]: " +
                          std::to_string(v));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("LabelDistribution drift too large: sum = " +
                        std::to_string(sum));
    }
    for (double& v : p_) v = std::max(0.0, v / sum);
  }

  // Normalizes an arbitrary non-negative weight vector.
  static LabelDistribution normalized(std::vector<double> weights) {
    double sum = 0.0;
    for (double v : weights) {
      if (!(v >= 0.0)) throw ConfigError("negative weight in distribution");
      sum += v;
    }
    if (sum <= 0.0) throw ConfigError("distribution weights sum to zero");
    for (double& v : weights) v /= sum;
    return LabelDistribution(std::move(weights));
  }

  static LabelDistribution uniform(int classes) {
    if (classes < 2) throw ConfigError("uniform distribution needs >= 2 classes");
    return LabelDistribution(
        std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
  }

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& probs() const { return p_; }

 private:
  std::vector<double> p_;
};

// ---------------------------------------------------------------------------
// RngStream: deterministic, named random streams. Identical (seed, stream_id)
// reproduces identical draws bit-for-bit; distinct ids give independent
// streams. Samplers are hand-rolled on top of mt19937_64 so draws do not
// depend on the standard library's distribution implementations.

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view stream_id)
      : seed_(seed),
        stream_id_(stream_id),
        engine_(splitmix64(seed ^ fnv1a64(stream_id))) {}

  std::uint64_t seed() const { return seed_; }
  const std::string& stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller with a cached spare.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]; keeps log() finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Categorical draw by CDF inversion.
  int categorical(const LabelDistribution& dist) {
    double u = uniform();
    double acc = 0.0;
    int last = dist.size() - 1;
    for (int i = 0; i < last; ++i) {
      acc += dist[i];
      if (u < acc) return i;
    }
    return last;
  }

  // n i.i.d. categorical draws reduced to per-class counts.
  std::vector<int> multinomial(int n, const LabelDistribution& dist) {
    std::vector<int> counts(static_cast<std::size_t>(dist.size()), 0);
    for (int s = 0; s < n; ++s) counts[static_cast<std::size_t>(categorical(dist))]++;
    return counts;
  }

  int uniform_int(int n) {  // [0, n)
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

 private:
  std::uint64_t seed_;
  std::string stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Hyperparameters.

enum class LrSchedule { constant, decaying };

inline std::string to_string(LrSchedule s) {
  return s == LrSchedule::constant ? "constant" : "decaying";
}

struct HyperParams {
  double eta0 = 0.01;
  LrSchedule schedule = LrSchedule::constant;
  double lipschitz_L = 100.0;
  double mu = 0.01;
  double grad_bound_G = 10.0;
  int local_epochs_E = 5;
  int rounds_T = 50;
  int num_agents_N = 10;
  int num_classes_I = 10;
  std::vector<double> sigma_k;  // empty means all-zero
  double gamma_het = 0.0;       // never defined numerically upstream; stays 0 unless configured
  double omega = 0.5;
  double bound_coeff = 1.0;
  double payment_Q = 25000.0;
  double phi = 0.0;      // 0 means "derive from the simplified formula"
  double upsilon = 0.0;  // likewise
  double gamma_sched_override = 0.0;  // 0 means auto: max{8*kappa, E}

  double kappa() const { return lipschitz_L / mu; }
  double gamma_sched() const {
    if (gamma_sched_override > 0.0) return gamma_sched_override;
    return std::max(8.0 * kappa(), static_cast<double>(local_epochs_E));
  }
  double sigma(int k) const {
    if (sigma_k.empty()) return 0.0;
    if (sigma_k.size() == 1) return sigma_k[0];
    return sigma_k[static_cast<std::size_t>(k)];
  }
};

// Learning rate at global epoch t. Constant mode returns eta0; decaying mode
// follows eta_t = 2 / (mu * (gamma + t)) with gamma = max{8*kappa, E}.
inline double learning_rate(long t, const HyperParams& hp) {
  if (t < 0) throw ConfigError("learning_rate: negative epoch index");
  if (hp.schedule == LrSchedule::constant) return hp.eta0;
  return 2.0 / (hp.mu * (hp.gamma_sched() + static_cast<double>(t)));
}

struct ConfigViolation {
  std::string field;
  std::string message;
  bool warning = false;  // warnings do not fail validation
};

inline std::vector<ConfigViolation> validate_config(const HyperParams& hp) {
  std::vector<ConfigViolation> out;
  auto err = [&out](const std::string& f, const std::string& m) {
    out.push_back({f, m, false});
  };
  auto warn = [&out](const std::string& f, const std::string& m) {
    out.push_back({f, m, true});
  };

  if (!(hp.eta0 > 0.0)) err("eta0", "must be > 0");
  if (!(hp.lipschitz_L > 0.0)) err("lipschitz_L", "must be > 0");
  if (!(hp.mu > 0.0)) err("mu", "must be > 0");
  if (!(hp.grad_bound_G > 0.0)) err("grad_bound_G", "must be > 0");
  else if (hp.grad_bound_G > 10.0)
    warn("grad_bound_G", "outside the expected range [0,10]");
  if (hp.local_epochs_E < 1) err("local_epochs_E", "must be a positive integer");
  if (hp.rounds_T < 1) err("rounds_T", "must be a positive integer");
  if (hp.num_agents_N < 1) err("num_agents_N", "must be a positive integer");
  if (hp.num_classes_I < 2) err("num_classes_I", "must be >= 2");
  for (std::size_t i = 0; i < hp.sigma_k.size(); ++i) {
    if (!(hp.sigma_k[i] >= 0.0))
      err("sigma_k", "entry " + std::to_string(i) + " must be >= 0");
  }
  if (!hp.sigma_k.empty() && hp.sigma_k.size() != 1 &&
      hp.sigma_k.size() != static_cast<std::size_t>(hp.num_agents_N))
    err("sigma_k", "length must be 1 or num_agents_N");
  if (!(hp.gamma_het >= 0.0)) err("gamma_het", "must be >= 0");
  if (!(hp.omega >= 0.0)) err("omega", "must be >= 0");
  if (!(hp.bound_coeff > 0.0)) err("bound_coeff", "must be > 0");
  if (!(hp.payment_Q > 0.0)) err("payment_Q", "must be > 0");
  if (hp.phi < 0.0) err("phi", "must be > 0 when set");
  if (hp.upsilon < 0.0) err("upsilon", "must be > 0 when set");
  if (hp.gamma_sched_override < 0.0)
    err("gamma_sched_override", "must be >= 0");

  if (hp.schedule == LrSchedule::decaying && hp.mu > 0.0 && hp.lipschitz_L > 0.0) {
    double gamma = hp.gamma_sched();
    if (gamma < 8.0 * hp.kappa() - 1e-12) {
      double eta_max = 2.0 / (hp.mu * gamma);
      if (eta_max > 1.0 / (4.0 * hp.lipschitz_L)) {
        warn("gamma_sched_override",
             "gamma_sched < 8*kappa: eta_t <= 1/(4L) is not guaranteed "
             "(eta_0 = " + std::to_string(eta_max) + ")");
      }
    }
  }
  return out;
}

inline bool has_errors(const std::vector<ConfigViolation>& v) {
  return std::any_of(v.begin(), v.end(),
                     [](const ConfigViolation& c) { return !c.warning; });
}

}  // namespace fedgame
