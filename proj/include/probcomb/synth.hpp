#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "probcomb/core.hpp"
#include "probcomb/random.hpp"

namespace probcomb {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Acklam's rational approximation followed by one Halley step against
// erfc; absolute error well below 1e-9 on (0, 1).
inline double inv_norm_cdf(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("inv_norm_cdf: argument must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  constexpr double phigh = 1.0 - plow;

  double x;
  if (q < plow) {
    double r = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  } else if (q <= phigh) {
    double r0 = q - 0.5;
    double r = r0 * r0;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * r0 /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double r = std::sqrt(-2.0 * std::log1p(-q));
    x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }

  double e = norm_cdf(x) - q;
  double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// Calibrated synthetic predictors. For sample j with label u_j and sign
// s_j = 2u_j - 1, model i sees the latent
//   z_ij = mu_i s_j + sqrt(rho) g_j + sqrt(1 - rho) e_ij,  mu_i = inv_norm_cdf(acc_i)
// with shared g_j and private e_ij standard normal, and reports
// p_ij = sigmoid(sharpness * z_ij). Hardening at 0.5 is correct iff
// sign(z_ij) = s_j, so model i has expected accuracy acc_i.
struct SyntheticSpec {
  std::vector<double> target_acc;
  double rho = 0.3;
  std::size_t n = 1000;
  double balance = 0.5;
  double sharpness = 2.0;
  std::uint64_t seed = 0;
  // Sample ids are id_prefix followed by the index, zero-padded to a
  // common width when pad_ids is set.
  std::string id_prefix = "s";
  bool pad_ids = true;

  std::size_t k() const { return target_acc.size(); }

  void validate() const {
    if (target_acc.empty()) throw ValidationError("synthetic spec: need at least one model");
    for (double a : target_acc) {
      if (!(a >= 0.5 && a <= 0.999)) throw ValidationError("synthetic spec: target accuracy must lie in [0.5, 0.999]");
    }
    if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("synthetic spec: rho must lie in [0, 1)");
    if (n == 0) throw ValidationError("synthetic spec: n must be positive");
    if (!(balance > 0.0 && balance < 1.0)) throw ValidationError("synthetic spec: balance must lie in (0, 1)");
    if (!(sharpness > 0.0) || !std::isfinite(sharpness)) throw ValidationError("synthetic spec: sharpness must be positive");
  }

  std::vector<std::string> model_names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k(); ++i) out.push_back("M" + std::to_string(i + 1));
    return out;
  }
};

struct SyntheticData {
  LabelVector labels;
  PredictionMatrix preds;
};

inline SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t k = spec.k();
  std::vector<double> mu(k);
  for (std::size_t i = 0; i < k; ++i) mu[i] = inv_norm_cdf(spec.target_acc[i]);

  const std::size_t width = spec.pad_ids ? std::to_string(spec.n - 1).size() : 0;
  std::vector<SampleId> ids(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) {
    std::string num = std::to_string(j);
    ids[j] = spec.id_prefix + std::string(width > num.size() ? width - num.size() : 0, '0') + num;
  }

  const double shared = std::sqrt(spec.rho);
  const double priv = std::sqrt(1.0 - spec.rho);
  std::vector<int> labels(spec.n);
  std::vector<std::vector<double>> cols(k, std::vector<double>(spec.n));
  Rng rng(spec.seed);
  // Draw order per sample: label, shared noise, then one private noise per model.
  for (std::size_t j = 0; j < spec.n; ++j) {
    labels[j] = rng.bernoulli(spec.balance) ? 1 : 0;
    const double s = 2.0 * labels[j] - 1.0;
    const double g = rng.normal();
    for (std::size_t i = 0; i < k; ++i) {
      const double z = mu[i] * s + shared * g + priv * rng.normal();
      cols[i][j] = sigmoid(spec.sharpness * z);
    }
  }
  IdSet idset(std::move(ids));
  return {LabelVector(idset, std::move(labels)), PredictionMatrix(idset, spec.model_names(), std::move(cols))};
}

// Pearson correlation between hardened-error indicators of every model
// pair. Entries involving a model with constant errors are NaN, except the
// diagonal, which is always 1.
inline std::vector<std::vector<double>> estimate_error_correlation(const PredictionMatrix& m,
                                                                   const LabelVector& labels) {
  require_aligned(m.ids(), labels.ids(), "estimate_error_correlation");
  const std::size_t k = m.cols();
  const std::size_t n = m.rows();
  std::vector<std::vector<double>> err(k, std::vector<double>(n));
  std::vector<double> mean(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    auto col = m.column(i);
    for (std::size_t j = 0; j < n; ++j) {
      err[i][j] = assign_class(col[j]) != labels[j] ? 1.0 : 0.0;
      mean[i] += err[i][j];
    }
    mean[i] /= static_cast<double>(n);
  }
  std::vector<std::vector<double>> out(k, std::vector<double>(k, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t a = 0; a < k; ++a) {
    out[a][a] = 1.0;
    for (std::size_t b = a + 1; b < k; ++b) {
      double sab = 0.0, saa = 0.0, sbb = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double da = err[a][j] - mean[a];
        const double db = err[b][j] - mean[b];
        sab += da * db;
        saa += da * da;
        sbb += db * db;
      }
      if (saa > 0.0 && sbb > 0.0) out[a][b] = out[b][a] = sab / std::sqrt(saa * sbb);
    }
  }
  return out;
}

}  // namespace probcomb
