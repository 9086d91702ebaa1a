#pragma once

#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "probcomb/core.hpp"
#include "probcomb/nn_combiner.hpp"

namespace probcomb {

// Weight-sum interval for a trained combiner. With A = ||u||_t,
// e = ||u - sigma_b(y)||_t and e_hat = ||u - sigma_b(y_hat)||_t:
//   (A - e) / (A + e_hat)  <=  W  <=  (A + e) / (A - e_hat)
// where y_hat is the interpolation predictor sum_i (w_i / W) p_i.
struct BoundReport {
  double W = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double norm_u = 0.0;
  double err_y = 0.0;
  double err_yhat = 0.0;
  bool contained = false;
  // A - e_hat <= 0: the upper bound is undefined and reported as +inf.
  bool degenerate = false;
};

inline double weight_sum(const CombinerWeights& cw) { return std::accumulate(cw.w.begin(), cw.w.end(), 0.0); }

inline double interpolation_score(const CombinerWeights& cw, std::span<const double> p) {
  const double W = weight_sum(cw);
  if (!(W > 0.0)) throw DomainError("interpolation_score: weight sum is zero");
  return raw_score(cw, p) / W;
}

// The shifted sigmoid of y_hat reuses the combiner's b and t.
inline BoundReport theorem_bounds(const CombinerWeights& cw, const PredictionMatrix& m, const LabelVector& labels) {
  require_aligned(m.ids(), labels.ids(), "theorem_bounds");
  BoundReport r;
  r.W = weight_sum(cw);
  if (!(r.W > 0.0)) throw DomainError("theorem_bounds: weight sum is zero");

  auto idx = m.indices_of(cw.model_names);
  std::vector<double> buf(idx.size());
  std::vector<double> u(m.rows());
  std::vector<double> y(m.rows());
  std::vector<double> yhat(m.rows());
  for (std::size_t j = 0; j < m.rows(); ++j) {
    m.row(j, idx, buf);
    u[j] = static_cast<double>(labels[j]);
    y[j] = forward(cw, buf);
    yhat[j] = shifted_sigmoid(interpolation_score(cw, buf), cw.b);
  }

  r.norm_u = thresholded_norm(u, cw.t);
  r.err_y = thresholded_distance(u, y, cw.t);
  r.err_yhat = thresholded_distance(u, yhat, cw.t);
  // Both norms vanish only for all-zero labels with a perfect y_hat.
  r.lower = r.norm_u + r.err_yhat > 0.0 ? (r.norm_u - r.err_y) / (r.norm_u + r.err_yhat)
                                        : -std::numeric_limits<double>::infinity();
  const double denom = r.norm_u - r.err_yhat;
  if (denom <= 0.0) {
    r.degenerate = true;
    r.upper = std::numeric_limits<double>::infinity();
    r.contained = r.lower <= r.W;
  } else {
    r.upper = (r.norm_u + r.err_y) / denom;
    r.contained = r.lower <= r.W && r.W <= r.upper;
  }
  return r;
}

}  // namespace probcomb
