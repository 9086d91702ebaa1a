// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include "fd_check.hpp"
#include "probcomb/probcomb.hpp"

namespace fs = std::filesystem;
using namespace probcomb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

// Lines are collected and printed in criterion order at the end.
std::map<int, std::string> lines;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  char head[32];
  std::snprintf(head, sizeof head, "%s  C%-2d ", ok ? "PASS" : "FAIL", id);
  lines[id] = head + what + "  [" + detail + "]";
  if (!ok) ++failures;
}

std::string fmt(double v, int decimals = 4) { return format_fixed(v, decimals); }

// Running tally over every training run in this binary.
struct NonnegTally {
  std::size_t runs = 0;
  std::size_t steps = 0;
  std::size_t negative_seen = 0;
  std::size_t runs_clipped = 0;
  std::size_t clip_events = 0;
} nonneg;

TrainResult tracked_train(const PredictionMatrix& m, const LabelVector& labels, const TrainConfig& cfg) {
  auto res = train(m, labels, cfg, [](std::span<const double> w) {
    ++nonneg.steps;
    for (double v : w) nonneg.negative_seen += v < 0.0;
  });
  ++nonneg.runs;
  for (double v : res.weights.w) nonneg.negative_seen += v < 0.0;
  nonneg.runs_clipped += res.clipped_any;
  nonneg.clip_events += res.clip_events;
  return res;
}

std::vector<double> random_probs(std::mt19937_64& gen, std::size_t k) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(k);
  for (auto& v : p) v = u(gen);
  return p;
}

// Two-class argmax over per-class aggregated posteriors, ties to class 1.
int oracle_rule(RuleKind rule, const std::vector<double>& p) {
  double agg[2] = {0.0, 0.0};
  for (int c = 0; c < 2; ++c) {
    double best = -1.0;
    for (double v : p) {
      const double post = c == 1 ? v : 1.0 - v;
      switch (rule) {
        case RuleKind::sum: agg[c] += post; break;
        case RuleKind::avg: agg[c] += post / static_cast<double>(p.size()); break;
        case RuleKind::max: best = std::max(best, post); break;
        case RuleKind::maj: agg[c] += (v >= 0.5) == (c == 1) ? 1.0 : 0.0; break;
      }
    }
    if (rule == RuleKind::max) agg[c] = best;
  }
  return agg[1] >= agg[0] ? 1 : 0;
}

void criterion1() {
  auto t0 = Clock::now();
  std::mt19937_64 gen(101);
  std::size_t mismatches = 0;
  for (std::size_t k = 1; k <= 7; ++k) {
    for (int i = 0; i < 10000; ++i) {
      auto p = random_probs(gen, k);
      mismatches += sum_rule(p).label != average_rule(p).label;
    }
  }
  std::size_t max_mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    auto p = random_probs(gen, 2);
    max_mismatches += sum_rule(p).label != max_rule(p).label;
  }
  const double secs = seconds_since(t0);
  report(1, mismatches == 0 && max_mismatches == 0 && secs < 5.0, "rule equivalences",
         "avg!=sum " + std::to_string(mismatches) + "/70000, K=2 max!=sum " + std::to_string(max_mismatches) +
             "/10000, " + fmt(secs, 3) + " s");
}

void criterion2() {
  std::mt19937_64 gen(202);
  std::size_t mismatches = 0, checks = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t k = 1 + 2 * static_cast<std::size_t>(i % 4);
    auto p = random_probs(gen, k);
    for (auto r : {RuleKind::sum, RuleKind::avg, RuleKind::max, RuleKind::maj}) {
      mismatches += apply_rule(r, p).label != oracle_rule(r, p);
      ++checks;
    }
  }
  report(2, mismatches == 0, "rule oracle", std::to_string(mismatches) + " mismatches in " + std::to_string(checks));
}

// Independent loss in plain loops for the gradient check.
double oracle_loss(const std::vector<double>& params, const std::vector<std::vector<double>>& rows,
                   const std::vector<int>& y, double l2) {
  const std::size_t k = params.size() - 1;
  double total = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    double s = -params[k];
    for (std::size_t i = 0; i < k; ++i) s += params[i] * rows[j][i];
    const double q = std::clamp(1.0 / (1.0 + std::exp(-s)), 1e-12, 1.0 - 1e-12);
    total -= y[j] ? std::log(q) : std::log(1.0 - q);
  }
  double reg = 0.0;
  for (std::size_t i = 0; i < k; ++i) reg += params[i] * params[i];
  return total / static_cast<double>(rows.size()) + l2 * reg;
}

void criterion4() {
  Rng rng(404);
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t k = 1 + rng.below(5);
    const std::size_t n = 1 + rng.below(200);
    std::vector<std::vector<double>> rows(n, std::vector<double>(k));
    std::vector<std::vector<double>> cols(k, std::vector<double>(n));
    std::vector<int> y(n);
    std::vector<SampleId> ids;
    for (std::size_t j = 0; j < n; ++j) {
      ids.push_back("r" + std::to_string(1000 + j));
      y[j] = rng.bernoulli(0.5);
      for (std::size_t i = 0; i < k; ++i) rows[j][i] = cols[i][j] = rng.uniform01();
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back("M" + std::to_string(i + 1));
    IdSet idset(ids);
    PredictionMatrix m(idset, names, cols);
    LabelVector labels(idset, y);
    CombinerWeights cw{names, std::vector<double>(k), 0.0, Threshold()};
    for (auto& w : cw.w) w = 2.0 * rng.uniform01();
    cw.b = 2.0 * rng.uniform01() - 0.5;
    const double l2 = 0.05 * rng.uniform01();
    auto analytic = gradient(cw, m, labels, l2);
    std::vector<double> params(cw.w);
    params.push_back(cw.b);
    auto numeric = probcomb::testing::central_differences(
        [&](const std::vector<double>& q) { return oracle_loss(q, rows, y, l2); }, params, 1e-5);
    worst = std::max(worst, probcomb::testing::max_relative_error(analytic, numeric));
  }
  std::ostringstream os;
  os << "max relative error " << worst << " over 50 instances";
  report(4, worst < 1e-4, "gradient check", os.str());
}

// Brute-force interval from the raw norm definitions.
struct OracleInterval {
  double W, lower, upper;
};

OracleInterval oracle_interval(const CombinerWeights& cw, const PredictionMatrix& m, const LabelVector& labels) {
  const double t = cw.t.value();
  double W = 0.0;
  for (double w : cw.w) W += w;
  double a2 = 0.0, e2 = 0.0, eh2 = 0.0;
  for (std::size_t j = 0; j < m.rows(); ++j) {
    double y = 0.0, yh = 0.0;
    for (std::size_t i = 0; i < cw.w.size(); ++i) {
      y += cw.w[i] * m.column(i)[j];
      yh += cw.w[i] / W * m.column(i)[j];
    }
    const double u = labels[j];
    const double cy = 1.0 / (1.0 + std::exp(-(y - cw.b))) >= t ? 1.0 : 0.0;
    const double cyh = 1.0 / (1.0 + std::exp(-(yh - cw.b))) >= t ? 1.0 : 0.0;
    const double cu = u >= t ? 1.0 : 0.0;
    a2 += cu * cu;
    e2 += (cu - cy) * (cu - cy);
    eh2 += (cu - cyh) * (cu - cyh);
  }
  const double A = std::sqrt(a2), e = std::sqrt(e2), eh = std::sqrt(eh2);
  const double lower = A + eh > 0.0 ? (A - e) / (A + eh) : -INFINITY;
  const double upper = A - eh > 0.0 ? (A + e) / (A - eh) : INFINITY;
  return {W, lower, upper};
}

bool same(double a, double b) { return (std::isinf(a) && a == b) || std::abs(a - b) <= 1e-12; }

struct SuiteSeed {
  SyntheticData train;
  SyntheticData test;
};

const std::vector<double> kSuiteAcc{0.88, 0.90, 0.93, 0.88};
constexpr int kSuiteSeeds = 10;

SuiteSeed suite_seed(int s) {
  return {generate({kSuiteAcc, 0.3, 5000, 0.5, 2.0, static_cast<std::uint64_t>(1000 + s), "a"}),
          generate({kSuiteAcc, 0.3, 25000, 0.5, 2.0, static_cast<std::uint64_t>(2000 + s), "b"})};
}

struct SuiteResults {
  std::vector<double> nn_acc;
  std::vector<std::vector<double>> model_acc;  // [model][seed]
  std::size_t contained = 0;
  std::size_t degenerate = 0;
  double seconds = 0.0;
};

SuiteResults run_suite(std::vector<SuiteSeed>& seeds) {
  SuiteResults r;
  r.model_acc.assign(kSuiteAcc.size(), {});
  auto t0 = Clock::now();
  for (int s = 0; s < kSuiteSeeds; ++s) {
    const auto& d = seeds[s];
    TrainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    auto res = tracked_train(d.train.preds, d.train.labels, cfg);
    r.nn_acc.push_back(accuracy(predict(res.weights, d.test.preds), d.test.labels));
    for (std::size_t i = 0; i < kSuiteAcc.size(); ++i) {
      r.model_acc[i].push_back(accuracy(d.test.preds.series(d.test.preds.names()[i]), d.test.labels));
    }
    auto b = theorem_bounds(res.weights, d.train.preds, d.train.labels);
    r.contained += b.contained;
    r.degenerate += b.degenerate;
  }
  r.seconds = seconds_since(t0);
  return r;
}

void criterion5(const SuiteResults& r) {
  const double nn = mean_stdev(r.nn_acc).mean;
  double best = 0.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < r.model_acc.size(); ++i) {
    const double m = mean_stdev(r.model_acc[i]).mean;
    if (m > best) best = m, best_i = i;
  }
  report(5, nn > best && r.seconds < 120.0, "combination beats individuals",
         "nn mean " + fmt(nn) + " vs best individual M" + std::to_string(best_i + 1) + " " + fmt(best) + ", " +
             fmt(r.seconds, 1) + " s");
}

void criterion6(const SuiteResults& suite) {
  // (a) oracle agreement on random instances
  Rng rng(606);
  std::size_t mismatches = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t k = 1 + rng.below(5);
    const std::size_t n = 5 + rng.below(200);
    std::vector<std::vector<double>> cols(k, std::vector<double>(n));
    std::vector<int> y(n);
    std::vector<SampleId> ids;
    for (std::size_t j = 0; j < n; ++j) {
      ids.push_back("q" + std::to_string(j));
      y[j] = rng.bernoulli(0.5);
      for (std::size_t i = 0; i < k; ++i) cols[i][j] = rng.uniform01();
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back("M" + std::to_string(i + 1));
    IdSet idset(ids);
    PredictionMatrix m(idset, names, cols);
    LabelVector labels(idset, y);
    CombinerWeights cw{names, std::vector<double>(k), 0.0, Threshold(0.2 + 0.6 * rng.uniform01())};
    for (auto& w : cw.w) w = 0.05 + 2.0 * rng.uniform01();
    cw.b = 3.0 * rng.uniform01() - 1.0;
    auto got = theorem_bounds(cw, m, labels);
    auto want = oracle_interval(cw, m, labels);
    mismatches += !(same(got.W, want.W) && same(got.lower, want.lower) && same(got.upper, want.upper));
  }

  // (b) K = 1 trained combiners
  std::size_t k1_contained = 0;
  const int k1_runs = 20;
  for (int s = 0; s < k1_runs; ++s) {
    auto d = generate({{0.7 + 0.01 * s}, 0.0, 2000, 0.5, 2.0, static_cast<std::uint64_t>(3000 + s)});
    TrainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    auto res = tracked_train(d.preds, d.labels, cfg);
    k1_contained += theorem_bounds(res.weights, d.preds, d.labels).contained;
  }

  // (c) zero-error case: the interval collapses to [1, 1]
  auto labels = LabelVector(IdSet({"a", "b", "c", "d"}), {1, 0, 1, 0});
  PredictionMatrix m(labels.ids(), {"A", "B"}, {{1.0, 0.0, 1.0, 0.0}, {1.0, 0.0, 1.0, 0.0}});
  auto zero = theorem_bounds(CombinerWeights{{"A", "B"}, {0.5, 0.5}, 0.5, Threshold()}, m, labels);
  const bool exact_one = zero.lower == 1.0 && zero.upper == 1.0 && zero.contained;

  const double rate = static_cast<double>(suite.contained) / kSuiteSeeds;
  report(6, mismatches == 0 && k1_contained == k1_runs && exact_one, "theorem-bound checker",
         "oracle mismatches " + std::to_string(mismatches) + "/100, K=1 contained " + std::to_string(k1_contained) +
             "/" + std::to_string(k1_runs) + ", zero-error [" + format_real(zero.lower) + "," +
             format_real(zero.upper) + "], suite containment " + fmt(100.0 * rate, 1) + "% (" +
             std::to_string(suite.degenerate) + "/" + std::to_string(kSuiteSeeds) + " upper bound unbounded)");
}

void criterion7(std::vector<SuiteSeed>& seeds, const SuiteResults& suite) {
  std::vector<double> test_acc;
  bool tuning_ok = true;
  std::string worst;
  for (int s = 0; s < kSuiteSeeds; ++s) {
    const auto& d = seeds[s];
    HybridConfig cfg{"M3", {"M1", "M2", "M4"}, RuleKind::max, 0.9};
    auto sweep = theta_sweep(cfg, d.train.preds, d.train.labels, default_theta_grid());
    const double base_acc = accuracy(d.train.preds.series("M3"), d.train.labels);
    if (sweep.best_accuracy < base_acc) {
      tuning_ok = false;
      worst = " (seed " + std::to_string(s) + ": " + fmt(sweep.best_accuracy) + " < " + fmt(base_acc) + ")";
    }
    cfg.theta = sweep.best_theta;
    auto out = hybrid_predict(cfg, d.test.preds);
    test_acc.push_back(label_accuracy(out.labels, d.test.labels.values()));
  }
  const double hybrid = mean_stdev(test_acc).mean;
  const double nn = mean_stdev(suite.nn_acc).mean;
  const double gap_pp = 100.0 * std::abs(hybrid - nn);
  report(7, tuning_ok && gap_pp <= 1.0, "hybrid sweep",
         std::string("tuning >= base ") + (tuning_ok ? "yes" : "no") + worst + ", hybrid test " + fmt(hybrid) +
             " vs nn " + fmt(nn) + ", gap " + fmt(gap_pp, 3) + " pp");
}

int sh(const std::string& cmd) {
  int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string bin() { return PROBCOMB_BIN; }

std::string preds_in(const fs::path& dir, int k) {
  std::string s;
  for (int i = 1; i <= k; ++i) s += " " + (dir / ("M" + std::to_string(i) + ".csv")).string();
  return s;
}

void criterion8(const fs::path& work) {
  auto t0 = Clock::now();
  const auto pool = work / "c8_pool";
  const auto test = work / "c8_test";
  bool ok = sh(bin() + " synth --acc 0.88,0.90,0.93,0.88 --rho 0.3 --n 25000 --seed 81 --id-prefix p --out " +
               pool.string()) == 0 &&
            sh(bin() + " synth --acc 0.88,0.90,0.93,0.88 --rho 0.3 --n 25000 --seed 82 --id-prefix t --out " +
               test.string()) == 0;
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  const auto out = work / "c8_report.tsv";
  ok = ok && sh(bin() + " cv --folds 5 --repeats 30 --seed 8 --method nn --detail --threads " +
                std::to_string(threads) + " --train-preds" + preds_in(pool, 4) + " --train-labels " +
                (pool / "labels.csv").string() + " --test-preds" + preds_in(test, 4) + " --test-labels " +
                (test / "labels.csv").string() + " --out " + out.string()) == 0;
  if (!ok) {
    report(8, false, "protocol fidelity", "cv invocation failed");
    return;
  }
  auto text = read_text(out);
  auto summary = parse_report_summary(text);
  // Per-run rows follow the blank line.
  std::istringstream is(text.substr(text.find("\n\n") + 2));
  std::string line;
  std::getline(is, line);
  std::vector<std::size_t> per_fold(5, 0);
  std::vector<double> accs;
  for (; std::getline(is, line);) {
    std::istringstream ls(line);
    std::string fold, rep, acc;
    std::getline(ls, fold, '\t');
    std::getline(ls, rep, '\t');
    std::getline(ls, acc, '\t');
    const auto f = std::stoul(fold);
    if (f < 5) ++per_fold[f];
    accs.push_back(parse_real(acc));
  }
  auto ms = mean_stdev(accs);
  auto split = kfold_split(read_label_file(pool / "labels.csv").ids(), 5, 8);
  bool equal_folds = true;
  for (const auto& f : split.folds) equal_folds = equal_folds && f.size() == 5000;
  bool thirty_each = std::all_of(per_fold.begin(), per_fold.end(), [](std::size_t c) { return c == 30; });
  const bool stats = summary.mean == ms.mean && std::abs(summary.stdev - ms.stdev) <= 1e-15 && ms.stdev > 0.0;
  report(8, summary.runs == 150 && accs.size() == 150 && thirty_each && equal_folds && stats, "protocol fidelity",
         std::to_string(summary.runs) + " runs, folds of 5000: " + (equal_folds ? "yes" : "no") + ", mean " +
             fmt(summary.mean) + " stdev " + fmt(summary.stdev, 6) + ", " + fmt(seconds_since(t0), 1) + " s");
}

void criterion9() {
  bool calibrated = true;
  std::string detail;
  double worst_z = 0.0;
  const std::vector<double> acc{0.6, 0.75, 0.88, 0.93, 0.97};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto d = generate({acc, 0.3, 50000, 0.5, 2.0, 900 + seed});
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const double got = accuracy(d.preds.series(d.preds.names()[i]), d.labels);
      const double sd = std::sqrt(acc[i] * (1.0 - acc[i]) / 50000.0);
      worst_z = std::max(worst_z, std::abs(got - acc[i]) / sd);
      calibrated = calibrated && std::abs(got - acc[i]) <= 3.0 * sd;
    }
  }
  std::vector<double> corr;
  for (double rho : {0.0, 0.3, 0.6}) {
    auto d = generate({{0.85, 0.9}, rho, 50000, 0.5, 2.0, 950});
    corr.push_back(estimate_error_correlation(d.preds, d.labels)[0][1]);
  }
  const bool monotone = corr[0] < corr[1] && corr[1] < corr[2];
  report(9, calibrated && monotone, "synthetic calibration",
         "worst |acc-target| " + fmt(worst_z, 2) + " sd over 5 seeds x 5 models, error corr " + fmt(corr[0], 3) +
             " < " + fmt(corr[1], 3) + " < " + fmt(corr[2], 3));
}

std::vector<std::string> pipeline(const fs::path& d) {
  const std::string b = bin();
  const auto s = (d / "s").string();
  const auto t = (d / "t").string();
  return {
      b + " synth --acc 0.8,0.85,0.9 --rho 0.3 --n 2000 --seed 5 --out " + s,
      b + " synth --acc 0.8,0.85,0.9 --rho 0.3 --n 1000 --seed 6 --id-prefix t --out " + t,
      b + " train-nn --epochs 30 --seed 3 --labels " + s + "/labels.csv --out " + (d / "w.json").string() +
          " --preds" + preds_in(d / "s", 3),
      b + " combine --method nn --weights " + (d / "w.json").string() + " --out " + (d / "nn.csv").string() +
          " --preds" + preds_in(d / "t", 3),
      b + " combine --method max --out " + (d / "max.csv").string() + " --preds" + preds_in(d / "t", 3),
      b + " combine --method hybrid --hybrid-base M3 --theta 0.91 --out " + (d / "hy.csv").string() +
          " --sources-out " + (d / "src.csv").string() + " --preds" + preds_in(d / "t", 3),
      b + " eval --labels " + t + "/labels.csv --combined " + (d / "nn.csv").string() + " " +
          (d / "max.csv").string() + " --out " + (d / "eval.tsv").string() + " --preds" + preds_in(d / "t", 3),
      b + " sweep-theta --hybrid-base M3 --labels " + s + "/labels.csv --out " + (d / "sweep.tsv").string() +
          " --preds" + preds_in(d / "s", 3),
      b + " check-bound --weights " + (d / "w.json").string() + " --labels " + s + "/labels.csv --out " +
          (d / "bound.tsv").string() + " --preds" + preds_in(d / "s", 3),
      b + " cv --folds 5 --repeats 2 --epochs 10 --seed 4 --threads 3 --method nn --detail --train-preds" +
          preds_in(d / "s", 3) + " --train-labels " + s + "/labels.csv --test-preds" + preds_in(d / "t", 3) +
          " --test-labels " + t + "/labels.csv --out " + (d / "cv.tsv").string(),
  };
}

void criterion10(const fs::path& work) {
  const auto a = work / "c10_a";
  const auto b = work / "c10_b";
  bool ran = true;
  for (const auto& dir : {a, b}) {
    fs::create_directories(dir);
    for (const auto& cmd : pipeline(dir)) ran = ran && sh(cmd) == 0;
  }
  // Outputs embed no paths, so the two trees must match file for file.
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    auto other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || read_text(e.path()) != read_text(other)) ++differing;
  }
  report(10, ran && files >= 15 && differing == 0, "determinism",
         std::to_string(files) + " files compared, " + std::to_string(differing) + " differ");
}

void criterion11(const fs::path& work, Clock::time_point suite_start) {
  const auto d = work / "c11";
  fs::create_directories(d);
  const std::vector<std::string> pos{"great", "wonderful", "loved", "superb", "fun"};
  const std::vector<std::string> neg{"awful", "boring", "hated", "dull", "terrible"};
  const std::vector<std::string> filler{"the", "movie", "plot", "was", "and", "cast"};
  std::mt19937_64 gen(11);
  std::string corpus, labels = "id,label\n";
  for (int i = 0; i < 40; ++i) {
    const int y = i % 2;
    const auto& words = y ? pos : neg;
    std::string doc;
    for (int w = 0; w < 6; ++w) {
      doc += (w ? " " : "") + (w % 2 ? words[gen() % words.size()] : filler[gen() % filler.size()]);
    }
    corpus += doc + "\n";
    labels += std::to_string(i) + "," + std::to_string(y) + "\n";
  }
  write_text_atomic(d / "corpus.txt", corpus);
  write_text_atomic(d / "labels.csv", labels);
  const std::string b = bin();
  bool ok = sh(b + " text-model --corpus " + (d / "corpus.txt").string() + " --labels " +
               (d / "labels.csv").string() + " --out " + (d / "text.csv").string()) == 0;
  ok = ok && sh(b + " synth --acc 0.8 --n 40 --seed 12 --id-prefix '' --no-pad --out " + (d / "peer").string()) == 0;
  ok = ok && sh(b + " combine --method sum --out " + (d / "sum.csv").string() + " --preds TEXT=" +
                (d / "text.csv").string() + " PEER=" + (d / "peer" / "M1.csv").string()) == 0;
  ok = ok && sh(b + " eval --labels " + (d / "labels.csv").string() + " --out " + (d / "eval.tsv").string() +
                " --combined SUM=" + (d / "sum.csv").string() + " --preds TEXT=" + (d / "text.csv").string()) == 0;
  std::string detail = ok ? "pipeline ran" : "pipeline failed";
  if (ok) {
    auto m = load_matrix({d / "text.csv", d / "sum.csv"}, {"TEXT", "SUM"});
    auto lv = read_label_file(d / "labels.csv");
    detail += ", text acc " + fmt(accuracy(m.series("TEXT"), lv)) + ", sum acc " + fmt(accuracy(m.series("SUM"), lv));
  }
  const double total = seconds_since(suite_start);
  detail += ", suite total " + fmt(total, 1) + " s";
  report(11, ok && total < 300.0, "end-to-end text run", detail);
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const auto work = fs::temp_directory_path() / ("probcomb_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  try {
    criterion1();
    criterion2();
    criterion4();

    std::vector<SuiteSeed> seeds;
    for (int s = 0; s < kSuiteSeeds; ++s) seeds.push_back(suite_seed(s));
    auto suite = run_suite(seeds);
    criterion5(suite);
    criterion6(suite);
    criterion7(seeds, suite);

    // Forced clipping: a column anti-correlated with the labels.
    auto d = generate({{0.9}, 0.0, 1000, 0.5, 2.0, 77});
    auto col = d.preds.column(0);
    std::vector<double> good(col.begin(), col.end()), flipped;
    for (double p : good) flipped.push_back(1.0 - p);
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    tracked_train(PredictionMatrix(d.preds.ids(), {"G", "F"}, {good, flipped}), d.labels, cfg);
    report(3, nonneg.negative_seen == 0 && nonneg.clip_events > 0, "nn constraint",
           std::to_string(nonneg.runs) + " runs, " + std::to_string(nonneg.steps) + " steps, " +
               std::to_string(nonneg.negative_seen) + " negative weights seen, " +
               std::to_string(nonneg.runs_clipped) + " runs clipped, " + std::to_string(nonneg.clip_events) +
               " clip events");

    criterion8(work);
    criterion9();
    criterion10(work);
    criterion11(work, start);
  } catch (const std::exception& e) {
    std::printf("FAIL  acceptance aborted: %s\n", e.what());
    ++failures;
  }

  fs::remove_all(work);
  for (int id = 1; id <= 11; ++id) {
    if (!lines.count(id)) report(id, false, "not run", "aborted before this criterion");
  }
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%s: %d criteria failed, %.1f s\n", failures ? "FAILED" : "ALL PASSED", failures, seconds_since(start));
  return failures ? 1 : 0;
}
