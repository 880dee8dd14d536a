#pragma once
// Classifier families behind one flat parameter view: multinomial logistic
// regression (default) and a one-hidden-layer tanh MLP. Strong convexity of
// the training objective comes from an explicit l2 term with coefficient mu.

#include <cmath>
#include <vector>

#include "fedgame/core.hpp"
#include "fedgame/datagen.hpp"

namespace fedgame::fltrain {

using datagen::LabeledDataset;

struct ModelShape {
  int classes = 0;
  int feature_dim = 0;
  int hidden_dim = 0;  // 0 = plain softmax regression

  std::size_t param_count() const {
    if (hidden_dim == 0)
      return static_cast<std::size_t>(classes) * feature_dim + classes;
    return static_cast<std::size_t>(hidden_dim) * feature_dim + hidden_dim +
           static_cast<std::size_t>(classes) * hidden_dim + classes;
  }
};

class Model {
 public:
  Model() = default;
  explicit Model(ModelShape shape)
      : shape_(shape), params_(shape.param_count(), 0.0) {}
  Model(ModelShape shape, std::vector<double> params)
      : shape_(shape), params_(std::move(params)) {
    if (params_.size() != shape_.param_count())
      throw ConfigError("Model: parameter vector length mismatch");
  }

  const ModelShape& shape() const { return shape_; }
  std::vector<double>& flat() { return params_; }
  const std::vector<double>& flat() const { return params_; }

  bool finite() const {
    for (double v : params_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  // Unnormalized class scores for one sample.
  void logits(const double* x, std::vector<double>& out,
              std::vector<double>* hidden_scratch = nullptr) const {
    const int I = shape_.classes, d = shape_.feature_dim, h = shape_.hidden_dim;
    out.assign(static_cast<std::size_t>(I), 0.0);
    const double* p = params_.data();
    if (h == 0) {
      // W (I x d) then b (I)
      for (int c = 0; c < I; ++c) {
        double z = p[static_cast<std::size_t>(I) * d + c];
        const double* w = p + static_cast<std::size_t>(c) * d;
        for (int j = 0; j < d; ++j) z += w[j] * x[j];
        out[static_cast<std::size_t>(c)] = z;
      }
      return;
    }
    // W1 (h x d), b1 (h), W2 (I x h), b2 (I)
    thread_local std::vector<double> local_hidden;
    std::vector<double>& hid = hidden_scratch ? *hidden_scratch : local_hidden;
    hid.assign(static_cast<std::size_t>(h), 0.0);
    const double* w1 = p;
    const double* b1 = p + static_cast<std::size_t>(h) * d;
    const double* w2 = b1 + h;
    const double* b2 = w2 + static_cast<std::size_t>(I) * h;
    for (int u = 0; u < h; ++u) {
      double z = b1[u];
      const double* w = w1 + static_cast<std::size_t>(u) * d;
      for (int j = 0; j < d; ++j) z += w[j] * x[j];
      hid[static_cast<std::size_t>(u)] = std::tanh(z);
    }
    for (int c = 0; c < I; ++c) {
      double z = b2[c];
      const double* w = w2 + static_cast<std::size_t>(c) * h;
      for (int u = 0; u < h; ++u) z += w[u] * hid[static_cast<std::size_t>(u)];
      out[static_cast<std::size_t>(c)] = z;
    }
  }

  // Cross-entropy of one sample (no regularizer).
  double sample_loss(const double* x, int y) const {
    std::vector<double> z;
    logits(x, z);
    return -log_softmax_at(z, y);
  }

  // Prediction with deterministic tie-break: lowest class index wins.
  int predict(const double* x) const {
    std::vector<double> z;
    logits(x, z);
    int best = 0;
    for (int c = 1; c < shape_.classes; ++c)
      if (z[static_cast<std::size_t>(c)] > z[static_cast<std::size_t>(best)]) best = c;
    return best;
  }

  // Gradient of [cross-entropy + (mu/2)||theta||^2] for one sample,
  // accumulated into `grad` (same length as flat()) after scaling by `scale`.
  // The mu term is added by the caller once per sample via add_l2_gradient.
  void accumulate_sample_gradient(const double* x, int y, std::vector<double>& grad,
                                  double scale) const {
    const int I = shape_.classes, d = shape_.feature_dim, h = shape_.hidden_dim;
    std::vector<double> z;
    std::vector<double> hid;
    logits(x, z, &hid);
    softmax_inplace(z);
    z[static_cast<std::size_t>(y)] -= 1.0;  // dL/dlogits
    if (h == 0) {
      for (int c = 0; c < I; ++c) {
        double g = scale * z[static_cast<std::size_t>(c)];
        double* gw = grad.data() + static_cast<std::size_t>(c) * d;
        for (int j = 0; j < d; ++j) gw[j] += g * x[j];
        grad[static_cast<std::size_t>(I) * d + c] += g;
      }
      return;
    }
    const double* p = params_.data();
    const double* w2 = p + static_cast<std::size_t>(h) * d + h;
    double* g1 = grad.data();
    double* gb1 = grad.data() + static_cast<std::size_t>(h) * d;
    double* g2 = gb1 + h;
    double* gb2 = g2 + static_cast<std::size_t>(I) * h;
    std::vector<double> dhid(static_cast<std::size_t>(h), 0.0);
    for (int c = 0; c < I; ++c) {
      double g = scale * z[static_cast<std::size_t>(c)];
      const double* w = w2 + static_cast<std::size_t>(c) * h;
      double* gw = g2 + static_cast<std::size_t>(c) * h;
      for (int u = 0; u < h; ++u) {
        gw[u] += g * hid[static_cast<std::size_t>(u)];
        dhid[static_cast<std::size_t>(u)] += g * w[u];
      }
      gb2[c] += g;
    }
    for (int u = 0; u < h; ++u) {
      double t = hid[static_cast<std::size_t>(u)];
      double dz = dhid[static_cast<std::size_t>(u)] * (1.0 - t * t);
      double* gw = g1 + static_cast<std::size_t>(u) * d;
      for (int j = 0; j < d; ++j) gw[j] += dz * x[j];
      gb1[u] += dz;
    }
  }

  static void softmax_inplace(std::vector<double>& z) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double sum = 0.0;
    for (double& v : z) {
      v = std::exp(v - m);
      sum += v;
    }
    for (double& v : z) v /= sum;
  }

  static double log_softmax_at(const std::vector<double>& z, int y) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    return z[static_cast<std::size_t>(y)] - m - std::log(sum);
  }

 private:
  ModelShape shape_;
  std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// Flat-vector helpers shared by the training engine.

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Scales `v` so its norm does not exceed G. Returns true when clipping fired.
inline bool clip_to_norm(std::vector<double>& v, double G) {
  double n = norm2(v);
  if (n > G) {
    double s = G / n;
    for (double& x : v) x *= s;
    return true;
  }
  return false;
}

inline void add_l2_gradient(const Model& m, std::vector<double>& grad, double mu) {
  const auto& p = m.flat();
  for (std::size_t i = 0; i < p.size(); ++i) grad[i] += mu * p[i];
}

// Gradient of one sample (cross-entropy + mu/2 l2), clipped to norm G.
inline void clipped_sample_gradient(const Model& m, const double* x, int y, double mu,
                                    double G, std::vector<double>& out) {
  out.assign(m.flat().size(), 0.0);
  m.accumulate_sample_gradient(x, y, out, 1.0);
  add_l2_gradient(m, out, mu);
  clip_to_norm(out, G);
}

}  // namespace fedgame::fltrain
