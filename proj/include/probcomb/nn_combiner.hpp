#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "probcomb/adam.hpp"
#include "probcomb/core.hpp"
#include "probcomb/random.hpp"

namespace probcomb {

inline constexpr double kDefaultL2 = 0.039;
inline constexpr double kLogClamp = 1e-12;

// Single dense layer with non-negative weights followed by a shifted
// sigmoid: forward(p) = sigmoid(sum_i w_i p_i - b), class 1 iff forward >= t.
struct CombinerWeights {
  std::vector<std::string> model_names;
  std::vector<double> w;
  double b = 0.5;
  Threshold t{};

  std::size_t size() const { return w.size(); }

  void validate() const {
    if (w.empty()) throw ValidationError("combiner needs at least one weight");
    if (model_names.size() != w.size()) throw ValidationError("combiner: name count does not match weight count");
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!std::isfinite(w[i])) throw ValidationError("combiner: non-finite weight for '" + model_names[i] + "'");
      if (w[i] < 0.0) {
        throw ConstraintError("combiner: negative weight for '" + model_names[i] + "': " + std::to_string(w[i]));
      }
    }
    if (!std::isfinite(b)) throw ValidationError("combiner: non-finite shift b");
  }
};

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 200;
  int batch_size = 32;
  double l2 = kDefaultL2;
  std::uint64_t seed = 0;
  bool shuffle_each_epoch = true;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DomainError("learning rate must be positive");
    if (epochs <= 0) throw DomainError("epochs must be positive");
    if (batch_size <= 0) throw DomainError("batch size must be positive");
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw DomainError("l2 must be non-negative");
  }
};

struct TrainResult {
  CombinerWeights weights;
  TrainConfig config;
  // Set when the projection w_i <- max(w_i, 0) fired at least once.
  bool clipped_any = false;
  std::size_t clip_events = 0;
  // Smallest weight observed after any projected step; never negative.
  double min_weight_seen = std::numeric_limits<double>::infinity();
  // All training labels belong to one class.
  bool degenerate_labels = false;
  std::size_t steps = 0;
};

inline double raw_score(const CombinerWeights& cw, std::span<const double> p) {
  if (p.size() != cw.w.size()) throw DomainError("raw_score: expected " + std::to_string(cw.w.size()) + " inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw DomainError("raw_score: probability out of [0,1]");
    s += cw.w[i] * p[i];
  }
  return s;
}

inline double forward(const CombinerWeights& cw, std::span<const double> p) {
  return shifted_sigmoid(raw_score(cw, p), cw.b);
}

// Columns are matched by name, so m may order or extend them freely.
inline Series predict(const CombinerWeights& cw, const PredictionMatrix& m) {
  auto idx = m.indices_of(cw.model_names);
  std::vector<double> out(m.rows());
  std::vector<double> buf(idx.size());
  for (std::size_t j = 0; j < m.rows(); ++j) {
    m.row(j, idx, buf);
    out[j] = forward(cw, buf);
  }
  return Series(m.ids(), std::move(out));
}

namespace detail {

// Row-major N x K design matrix in weight order plus 0/1 targets.
struct Design {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> x;
  std::vector<double> y;

  Design(const PredictionMatrix& m, std::span<const std::string> names, const LabelVector& labels) {
    require_aligned(m.ids(), labels.ids(), "combiner");
    auto idx = m.indices_of(names);
    n = m.rows();
    k = idx.size();
    x.resize(n * k);
    y.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      m.row(j, idx, std::span<double>(x.data() + j * k, k));
      y[j] = static_cast<double>(labels[j]);
    }
  }

  double z(std::span<const double> w, double b, std::size_t j) const {
    const double* row = x.data() + j * k;
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += w[i] * row[i];
    return s - b;
  }
};

inline double bce(double q, double y) {
  double qc = std::clamp(q, kLogClamp, 1.0 - kLogClamp);
  return -(y * std::log(qc) + (1.0 - y) * std::log(1.0 - qc));
}

// Gradient of mean BCE over rows + l2 * |w|^2 with respect to (w, b).
// grad has length k + 1; the last entry is d/db.
template <typename RowRange>
void accumulate_gradient(const Design& d, std::span<const double> w, double b, double l2, const RowRange& rows,
                         std::size_t count, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t j : rows) {
    const double r = sigmoid(d.z(w, b, j)) - d.y[j];
    const double* row = d.x.data() + j * d.k;
    for (std::size_t i = 0; i < d.k; ++i) grad[i] += r * row[i];
    grad[d.k] -= r;
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i <= d.k; ++i) grad[i] *= inv;
  for (std::size_t i = 0; i < d.k; ++i) grad[i] += 2.0 * l2 * w[i];
}

}  // namespace detail

// Mean binary cross-entropy plus l2 * sum w_i^2 (b is not penalized).
inline double loss(const CombinerWeights& cw, const PredictionMatrix& m, const LabelVector& labels,
                   double l2 = kDefaultL2) {
  detail::Design d(m, cw.model_names, labels);
  double total = 0.0;
  for (std::size_t j = 0; j < d.n; ++j) total += detail::bce(sigmoid(d.z(cw.w, cw.b, j)), d.y[j]);
  double reg = 0.0;
  for (double wi : cw.w) reg += wi * wi;
  return total / static_cast<double>(d.n) + l2 * reg;
}

// Analytic gradient of loss(): K partials for w followed by d/db.
inline std::vector<double> gradient(const CombinerWeights& cw, const PredictionMatrix& m, const LabelVector& labels,
                                    double l2 = kDefaultL2) {
  detail::Design d(m, cw.model_names, labels);
  std::vector<std::size_t> rows(d.n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<double> grad(d.k + 1);
  detail::accumulate_gradient(d, cw.w, cw.b, l2, rows, d.n, grad);
  return grad;
}

// Minibatch ADAM on loss(); after every step negative weights are projected
// to zero. Weights start at 1/K and b at 0.5. Samples are visited in
// canonical id order, reshuffled each epoch from cfg.seed, so the result is
// a pure function of (m, labels, cfg). on_step, if given, sees the projected
// weights after each step.
inline TrainResult train(const PredictionMatrix& m, const LabelVector& labels, const TrainConfig& cfg,
                         const std::function<void(std::span<const double>)>& on_step = {}) {
  cfg.validate();
  detail::Design d(m, m.names(), labels);
  if (d.n < d.k + 1) {
    throw ValidationError("train: need at least K + 1 = " + std::to_string(d.k + 1) + " samples");
  }

  TrainResult res;
  res.config = cfg;
  res.weights.model_names = m.names();
  std::size_t positives = labels.count_positive();
  res.degenerate_labels = positives == 0 || positives == d.n;

  std::vector<double> params(d.k + 1, 1.0 / static_cast<double>(d.k));
  params[d.k] = 0.5;
  std::span<double> w(params.data(), d.k);

  Adam opt(params.size(), AdamConfig{cfg.learning_rate});
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(d.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(d.k + 1);
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < d.n; start += batch) {
      std::size_t stop = std::min(start + batch, d.n);
      std::span<const std::size_t> rows(order.data() + start, stop - start);
      detail::accumulate_gradient(d, w, params[d.k], cfg.l2, rows, rows.size(), grad);
      opt.step(params, grad);
      for (double& wi : w) {
        if (wi < 0.0) {
          wi = 0.0;
          res.clipped_any = true;
          ++res.clip_events;
        }
        res.min_weight_seen = std::min(res.min_weight_seen, wi);
      }
      ++res.steps;
      if (on_step) on_step(w);
    }
  }

  res.weights.w.assign(w.begin(), w.end());
  res.weights.b = params[d.k];
  return res;
}

}  // namespace probcomb
