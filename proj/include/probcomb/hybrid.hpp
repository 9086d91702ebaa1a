#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "probcomb/core.hpp"
#include "probcomb/rules.hpp"

namespace probcomb {

// Trust `base` while its confidence is at least theta; below that, decide
// with `rule` over the auxiliary models.
struct HybridConfig {
  std::string base;
  std::vector<std::string> aux;
  RuleKind rule = RuleKind::max;
  double theta = 0.9;

  // Everything except theta; used before a theta has been chosen.
  void validate_structure() const {
    if (base.empty()) throw ValidationError("hybrid: base model not set");
    if (aux.empty()) throw ValidationError("hybrid: auxiliary model list is empty");
    for (std::size_t i = 0; i < aux.size(); ++i) {
      if (aux[i] == base) throw ValidationError("hybrid: base model '" + base + "' is also auxiliary");
      for (std::size_t j = 0; j < i; ++j) {
        if (aux[j] == aux[i]) throw ValidationError("hybrid: duplicate auxiliary model '" + aux[i] + "'");
      }
    }
    check_rule_subset(rule, aux.size());
  }

  void validate() const {
    validate_structure();
    check_theta(theta);
  }

  static void check_theta(double theta) {
    if (!(theta > 0.5 && theta < 1.0)) {
      throw ConstraintError("hybrid: theta must lie in (0.5, 1), got " + std::to_string(theta));
    }
  }
};

inline double confidence(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("confidence: probability out of [0,1]");
  return std::max(p, 1.0 - p);
}

enum class Source { base, aux };

struct HybridOutput {
  IdSet ids;
  // Base probability where the base model decided, else the rule's score.
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<Source> sources;

  std::size_t aux_count() const {
    return static_cast<std::size_t>(std::count(sources.begin(), sources.end(), Source::aux));
  }
};

inline HybridOutput hybrid_predict(const HybridConfig& cfg, const PredictionMatrix& m) {
  cfg.validate();
  const std::size_t base_idx = m.indices_of(std::span<const std::string>(&cfg.base, 1)).front();
  auto aux_idx = m.indices_of(cfg.aux);
  HybridOutput out{m.ids(), std::vector<double>(m.rows()), std::vector<int>(m.rows()),
                   std::vector<Source>(m.rows())};
  std::vector<double> buf(aux_idx.size());
  auto base_col = m.column(base_idx);
  for (std::size_t j = 0; j < m.rows(); ++j) {
    const double p = base_col[j];
    if (confidence(p) >= cfg.theta) {
      out.scores[j] = p;
      out.labels[j] = assign_class(p);
      out.sources[j] = Source::base;
    } else {
      m.row(j, aux_idx, buf);
      auto d = apply_rule(cfg.rule, buf);
      out.scores[j] = d.score;
      out.labels[j] = d.label;
      out.sources[j] = Source::aux;
    }
  }
  return out;
}

struct SweepPoint {
  double theta = 0.0;
  double accuracy = 0.0;
  double fallback_fraction = 0.0;
};

struct SweepResult {
  double best_theta = 0.0;
  double best_accuracy = 0.0;
  std::vector<SweepPoint> points;
};

// Evenly spaced grid lo, lo + step, ..., hi (inclusive within half a step).
// Values are rounded to 12 decimals so 0.51:0.99:0.01 yields exactly 49
// two-decimal points.
inline std::vector<double> theta_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw ValidationError("theta grid: need lo <= hi and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12);
  return out;
}

inline std::vector<double> default_theta_grid() { return theta_grid(0.51, 0.99, 0.01); }

// Accuracy at every grid theta; the best theta is the smallest one
// reaching the maximal accuracy. cfg.theta is ignored.
inline SweepResult theta_sweep(const HybridConfig& cfg, const PredictionMatrix& m, const LabelVector& labels,
                               std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("theta sweep: empty grid");
  cfg.validate_structure();
  require_aligned(m.ids(), labels.ids(), "theta_sweep");
  for (double th : grid) HybridConfig::check_theta(th);

  SweepResult res;
  res.points.reserve(grid.size());
  bool first = true;
  for (double th : grid) {
    HybridConfig c = cfg;
    c.theta = th;
    auto out = hybrid_predict(c, m);
    SweepPoint pt{th, label_accuracy(out.labels, labels.values()),
                  static_cast<double>(out.aux_count()) / static_cast<double>(m.rows())};
    if (first || pt.accuracy > res.best_accuracy || (pt.accuracy == res.best_accuracy && th < res.best_theta)) {
      res.best_theta = th;
      res.best_accuracy = pt.accuracy;
      first = false;
    }
    res.points.push_back(pt);
  }
  return res;
}

}  // namespace probcomb
