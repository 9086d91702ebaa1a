#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "probcomb/bound_check.hpp"
#include "probcomb/core.hpp"
#include "probcomb/hybrid.hpp"
#include "probcomb/nn_combiner.hpp"
#include "probcomb/numfmt.hpp"
#include "probcomb/random.hpp"
#include "probcomb/rules.hpp"

namespace probcomb {

// Disjoint folds of positions into a canonical IdSet.
struct FoldSplit {
  std::vector<std::vector<std::size_t>> folds;

  std::vector<SampleId> ids(const IdSet& all, std::size_t f) const {
    std::vector<SampleId> out;
    for (auto p : folds[f]) out.push_back(all[p]);
    return out;
  }
};

// Seeded shuffle of the canonically sorted ids, then contiguous blocks; the
// first n % n_folds folds get one extra element.
inline FoldSplit kfold_split(const IdSet& ids, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ValidationError("kfold_split: need at least 2 folds");
  if (ids.size() < n_folds) throw ValidationError("kfold_split: fewer ids than folds");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  FoldSplit split;
  const std::size_t base = ids.size() / n_folds;
  const std::size_t extra = ids.size() % n_folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < n_folds; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    split.folds.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                             order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return split;
}

struct RunPlan {
  std::size_t n_folds = 5;
  std::size_t repeats_per_fold = 30;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_folds < 2) throw ValidationError("run plan: need at least 2 folds");
    if (repeats_per_fold < 1) throw ValidationError("run plan: need at least 1 repeat");
  }
};

struct NnMethod {
  TrainConfig train;  // seed is replaced per run
};

struct RuleMethod {
  RuleKind rule = RuleKind::sum;
  std::vector<std::string> models;  // empty: every model, in matrix order
};

struct HybridMethod {
  HybridConfig config;  // theta is tuned per fold
  std::vector<double> grid = default_theta_grid();
};

using Method = std::variant<NnMethod, RuleMethod, HybridMethod>;

inline std::string method_name(const Method& m) {
  if (std::holds_alternative<NnMethod>(m)) return "nn";
  if (auto* r = std::get_if<RuleMethod>(&m)) return std::string(to_string(r->rule));
  return "hybrid";
}

struct RunRecord {
  std::size_t fold = 0;
  std::size_t repeat = 0;
  double accuracy = 0.0;
  std::optional<TrainResult> trained;  // nn
  std::optional<BoundReport> bound;    // nn, on the fold it was trained on
  std::optional<double> theta;         // hybrid
};

struct MeanStdev {
  double mean = 0.0;
  double stdev = 0.0;
};

// Arithmetic mean and sample (n - 1) standard deviation; stdev is 0 for n = 1.
inline MeanStdev mean_stdev(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean_stdev: empty list");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

struct EvalReport {
  std::string method;
  std::size_t n_folds = 0;
  std::size_t repeats_per_fold = 0;
  std::vector<RunRecord> runs;  // ordered by (fold, repeat)
  double mean = 0.0;
  double stdev = 0.0;
};

namespace detail {

inline RunRecord run_one(const Method& method, std::uint64_t plan_seed, std::size_t fold, std::size_t repeat,
                         const PredictionMatrix& fit_preds, const LabelVector& fit_labels,
                         const PredictionMatrix& test_preds, const LabelVector& test_labels) {
  RunRecord rec;
  rec.fold = fold;
  rec.repeat = repeat;
  if (auto* nn = std::get_if<NnMethod>(&method)) {
    TrainConfig cfg = nn->train;
    cfg.seed = derive_seed(plan_seed, fold, repeat);
    auto res = train(fit_preds, fit_labels, cfg);
    rec.accuracy = accuracy(predict(res.weights, test_preds), test_labels, res.weights.t);
    if (weight_sum(res.weights) > 0.0) rec.bound = theorem_bounds(res.weights, fit_preds, fit_labels);
    rec.trained = std::move(res);
  } else if (auto* rm = std::get_if<RuleMethod>(&method)) {
    const auto& models = rm->models.empty() ? test_preds.names() : rm->models;
    auto out = apply_rule(rm->rule, test_preds, models);
    rec.accuracy = label_accuracy(out.labels, test_labels.values());
  } else {
    const auto& hm = std::get<HybridMethod>(method);
    auto sweep = theta_sweep(hm.config, fit_preds, fit_labels, hm.grid);
    HybridConfig cfg = hm.config;
    cfg.theta = sweep.best_theta;
    auto out = hybrid_predict(cfg, test_preds);
    rec.accuracy = label_accuracy(out.labels, test_labels.values());
    rec.theta = sweep.best_theta;
  }
  return rec;
}

inline void check_same_models(const PredictionMatrix& a, const PredictionMatrix& b) {
  auto na = a.names();
  auto nb = b.names();
  std::sort(na.begin(), na.end());
  std::sort(nb.begin(), nb.end());
  if (na != nb) throw ValidationError("train and test prediction matrices name different models");
}

}  // namespace detail

// Fits the method on each fold's held-out rows of the training pool and
// scores it on the full test set. The nn method runs repeats_per_fold times
// per fold with seed derive_seed(plan.seed, fold, repeat); rules and the
// hybrid are deterministic and run once per fold. Runs are independent, so
// `threads` changes only wall time, never the report.
inline EvalReport cross_validate(const RunPlan& plan, const PredictionMatrix& train_preds,
                                 const LabelVector& train_labels, const PredictionMatrix& test_preds,
                                 const LabelVector& test_labels, const Method& method, unsigned threads = 1) {
  plan.validate();
  detail::check_same_models(train_preds, test_preds);
  require_aligned(train_preds.ids(), train_labels.ids(), "cross_validate (train)");
  require_aligned(test_preds.ids(), test_labels.ids(), "cross_validate (test)");

  // Test columns in training order so trained weights line up by name.
  const auto test = test_preds.select(train_preds.names());
  const auto split = kfold_split(train_preds.ids(), plan.n_folds, plan.seed);
  std::vector<PredictionMatrix> fold_preds;
  std::vector<LabelVector> fold_labels;
  for (const auto& f : split.folds) {
    fold_preds.push_back(train_preds.take_rows(f));
    fold_labels.push_back(train_labels.take_rows(f));
  }

  const std::size_t repeats = std::holds_alternative<NnMethod>(method) ? plan.repeats_per_fold : 1;
  const std::size_t total = plan.n_folds * repeats;
  std::vector<std::optional<RunRecord>> records(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const std::size_t fold = i / repeats;
      const std::size_t rep = i % repeats;
      try {
        records[i] = detail::run_one(method, plan.seed, fold, rep, fold_preds[fold], fold_labels[fold], test,
                                     test_labels);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(total);
      }
    }
  };

  threads = std::max(1u, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EvalReport report;
  report.method = method_name(method);
  report.n_folds = plan.n_folds;
  report.repeats_per_fold = repeats;
  std::vector<double> accs;
  for (auto& r : records) {
    accs.push_back(r->accuracy);
    report.runs.push_back(std::move(*r));
  }
  auto ms = mean_stdev(accs);
  report.mean = ms.mean;
  report.stdev = ms.stdev;
  return report;
}

// Summary section: a header and one row; mean and stdev are exact
// round-trip decimals, *_pct are percents (2 and 4 decimals). With
// `detail`, a blank line and a per-run table follow.
inline std::string report_render(const EvalReport& r, bool detail = false) {
  std::ostringstream os;
  os << "method\truns\tmean\tstdev\tmean_pct\tstdev_pct\n";
  os << r.method << '\t' << r.runs.size() << '\t' << format_real(r.mean) << '\t' << format_real(r.stdev) << '\t'
     << format_fixed(100.0 * r.mean, 2) << '\t' << format_fixed(100.0 * r.stdev, 4) << '\n';
  if (!detail) return os.str();

  os << "\nfold\trepeat\taccuracy\ttheta\tW\tlower\tupper\tcontained\tclipped_any\tb\tweights\n";
  for (const auto& run : r.runs) {
    os << run.fold << '\t' << run.repeat << '\t' << format_real(run.accuracy) << '\t'
       << (run.theta ? format_fixed(*run.theta, 2) : "-") << '\t';
    if (run.bound) {
      os << format_real(run.bound->W) << '\t' << format_real(run.bound->lower) << '\t'
         << format_real(run.bound->upper) << '\t' << (run.bound->contained ? 1 : 0) << '\t';
    } else {
      os << "-\t-\t-\t-\t";
    }
    if (run.trained) {
      os << (run.trained->clipped_any ? 1 : 0) << '\t' << format_real(run.trained->weights.b) << '\t';
      const auto& w = run.trained->weights.w;
      for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << format_real(w[i]);
    } else {
      os << "-\t-\t-";
    }
    os << '\n';
  }
  return os.str();
}

struct ReportSummary {
  std::string method;
  std::size_t runs = 0;
  double mean = 0.0;
  double stdev = 0.0;
};

inline ReportSummary parse_report_summary(const std::string& text) {
  std::istringstream is(text);
  std::string header, row;
  if (!std::getline(is, header) || header != "method\truns\tmean\tstdev\tmean_pct\tstdev_pct" ||
      !std::getline(is, row)) {
    throw ValidationError("report: missing summary header or row");
  }
  std::vector<std::string> f;
  std::istringstream rs(row);
  for (std::string cell; std::getline(rs, cell, '\t');) f.push_back(cell);
  if (f.size() != 6) throw ValidationError("report: summary row needs 6 fields");
  ReportSummary s;
  s.method = f[0];
  try {
    s.runs = static_cast<std::size_t>(std::stoull(f[1]));
  } catch (const std::exception&) {
    throw ValidationError("report: bad run count '" + f[1] + "'");
  }
  s.mean = parse_real(f[2]);
  s.stdev = parse_real(f[3]);
  return s;
}

}  // namespace probcomb
