#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probcomb/core.hpp"

namespace probcomb {

// Bayesian decision rules over K class-1 posteriors. Each model votes at
// 0.5 and aggregate ties go to class 1.
enum class RuleKind { sum, avg, max, maj };

inline std::string_view to_string(RuleKind r) {
  switch (r) {
    case RuleKind::sum: return "sum";
    case RuleKind::avg: return "avg";
    case RuleKind::max: return "max";
    case RuleKind::maj: return "maj";
  }
  return "?";
}

inline RuleKind parse_rule(std::string_view s) {
  if (s == "sum") return RuleKind::sum;
  if (s == "avg") return RuleKind::avg;
  if (s == "max") return RuleKind::max;
  if (s == "maj") return RuleKind::maj;
  throw ValidationError("unknown rule '" + std::string(s) + "'");
}

struct RuleDecision {
  int label = 0;
  double score = 0.0;
};

namespace detail {

inline void check_posteriors(std::span<const double> p) {
  if (p.empty()) throw DomainError("rule: empty probability vector");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("rule: probability out of [0,1]");
  }
}

inline double mean(std::span<const double> p) {
  return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

}  // namespace detail

// Class 1 iff sum(p) >= sum(1 - p). Score is mean(p).
inline RuleDecision sum_rule(std::span<const double> p) {
  detail::check_posteriors(p);
  double s1 = std::accumulate(p.begin(), p.end(), 0.0);
  double s0 = 0.0;
  for (double v : p) s0 += 1.0 - v;
  return {s1 >= s0 ? 1 : 0, detail::mean(p)};
}

// Same decision as sum_rule, reached through the mean posterior.
inline RuleDecision average_rule(std::span<const double> p) {
  detail::check_posteriors(p);
  double m1 = detail::mean(p);
  double m0 = 0.0;
  for (double v : p) m0 += 1.0 - v;
  m0 /= static_cast<double>(p.size());
  return {m1 >= m0 ? 1 : 0, m1};
}

// Class 1 iff max(p) >= max(1 - p). Score is max(p) / (max(p) + max(1 - p)).
inline RuleDecision max_rule(std::span<const double> p) {
  detail::check_posteriors(p);
  auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  double m1 = *hi;
  double m0 = 1.0 - *lo;
  if (m1 == m0) return {1, 0.5};
  return {m1 >= m0 ? 1 : 0, m1 / (m1 + m0)};
}

// Hard votes at 0.5; K must be odd. Score is the fraction of 1-votes.
inline RuleDecision majority_vote(std::span<const double> p) {
  detail::check_posteriors(p);
  if (p.size() % 2 == 0) {
    throw ConstraintError("majority vote needs an odd number of models, got " + std::to_string(p.size()));
  }
  std::size_t ones = 0;
  for (double v : p) ones += static_cast<std::size_t>(assign_class(v));
  return {2 * ones > p.size() ? 1 : 0, static_cast<double>(ones) / static_cast<double>(p.size())};
}

inline RuleDecision apply_rule(RuleKind rule, std::span<const double> p) {
  switch (rule) {
    case RuleKind::sum: return sum_rule(p);
    case RuleKind::avg: return average_rule(p);
    case RuleKind::max: return max_rule(p);
    case RuleKind::maj: return majority_vote(p);
  }
  throw DomainError("unknown rule");
}

struct RuleOutput {
  IdSet ids;
  std::vector<double> scores;
  std::vector<int> labels;
};

inline void check_rule_subset(RuleKind rule, std::size_t k) {
  if (k == 0) throw ValidationError("rule: empty model subset");
  if (rule == RuleKind::maj && k % 2 == 0) {
    throw ConstraintError("majority vote needs an odd number of models, got " + std::to_string(k));
  }
}

// Applies a rule per sample over the named columns.
inline RuleOutput apply_rule(RuleKind rule, const PredictionMatrix& m, std::span<const std::string> subset) {
  check_rule_subset(rule, subset.size());
  auto idx = m.indices_of(subset);
  RuleOutput out{m.ids(), std::vector<double>(m.rows()), std::vector<int>(m.rows())};
  std::vector<double> buf(idx.size());
  for (std::size_t j = 0; j < m.rows(); ++j) {
    m.row(j, idx, buf);
    auto d = apply_rule(rule, buf);
    out.scores[j] = d.score;
    out.labels[j] = d.label;
  }
  return out;
}

}  // namespace probcomb
