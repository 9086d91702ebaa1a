#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "probcomb/adam.hpp"
#include "probcomb/core.hpp"
#include "probcomb/random.hpp"

namespace probcomb {

// Lowercased runs of ASCII alphanumerics.
inline std::vector<std::string> tokenize(std::string_view doc) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : doc) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty()) throw ValidationError("vocabulary needs at least one token");
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], i).second) throw ValidationError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<std::size_t> find(const std::string& tok) const {
    auto it = index_.find(tok);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Top-v tokens by frequency; ties go to the lexicographically smaller token.
inline Vocabulary build_vocab(std::span<const std::string> corpus, std::size_t v) {
  if (corpus.empty()) throw ValidationError("build_vocab: empty corpus");
  if (v == 0) throw DomainError("build_vocab: vocabulary size must be positive");
  std::map<std::string, std::size_t> freq;
  for (const auto& doc : corpus) {
    for (auto& tok : tokenize(doc)) ++freq[tok];
  }
  if (freq.empty()) throw ValidationError("build_vocab: corpus has no tokens");
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  ranked.resize(std::min(v, ranked.size()));
  std::vector<std::string> tokens;
  for (auto& [tok, n] : ranked) tokens.push_back(tok);
  return Vocabulary(std::move(tokens));
}

// Multi-hot presence vector.
inline std::vector<double> encode(std::string_view doc, const Vocabulary& vocab) {
  std::vector<double> x(vocab.size(), 0.0);
  for (const auto& tok : tokenize(doc)) {
    if (auto i = vocab.find(tok)) x[*i] = 1.0;
  }
  return x;
}

struct LogisticModel {
  Vocabulary vocab;
  std::vector<double> weights;
  double bias = 0.0;
};

inline double predict_proba(const LogisticModel& m, std::span<const double> x) {
  double z = m.bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += m.weights[i] * x[i];
  return sigmoid(z);
}

inline double predict_proba(const LogisticModel& m, std::string_view doc) {
  return predict_proba(m, encode(doc, m.vocab));
}

struct LogisticConfig {
  std::size_t vocab_size = 1000;
  int epochs = 100;
  double learning_rate = 0.05;
  int batch_size = 8;
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

// Mean BCE (log clamped at 1e-12) + l2 * |w|^2 over encoded rows.
inline double logistic_loss(const LogisticModel& m, std::span<const std::vector<double>> xs, std::span<const int> ys,
                            double l2 = 0.0) {
  double total = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double q = std::clamp(predict_proba(m, xs[j]), 1e-12, 1.0 - 1e-12);
    total -= ys[j] == 1 ? std::log(q) : std::log(1.0 - q);
  }
  double reg = 0.0;
  for (double w : m.weights) reg += w * w;
  return total / static_cast<double>(xs.size()) + l2 * reg;
}

// d loss / d weights followed by d loss / d bias, over the selected rows.
inline std::vector<double> logistic_gradient(const LogisticModel& m, std::span<const std::vector<double>> xs,
                                             std::span<const int> ys, std::span<const std::size_t> rows,
                                             double l2 = 0.0) {
  const std::size_t v = m.weights.size();
  std::vector<double> g(v + 1, 0.0);
  for (std::size_t j : rows) {
    const double r = predict_proba(m, xs[j]) - ys[j];
    for (std::size_t i = 0; i < v; ++i) g[i] += r * xs[j][i];
    g[v] += r;
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& gi : g) gi *= inv;
  for (std::size_t i = 0; i < v; ++i) g[i] += 2.0 * l2 * m.weights[i];
  return g;
}

inline std::vector<double> logistic_gradient(const LogisticModel& m, std::span<const std::vector<double>> xs,
                                             std::span<const int> ys, double l2 = 0.0) {
  std::vector<std::size_t> rows(xs.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return logistic_gradient(m, xs, ys, rows, l2);
}

// Zero-initialized, unconstrained minibatch ADAM on logistic_loss.
inline LogisticModel train_logistic(std::span<const std::string> docs, std::span<const int> labels,
                                    const LogisticConfig& cfg) {
  if (docs.empty()) throw ValidationError("train_logistic: empty corpus");
  if (docs.size() != labels.size()) throw AlignmentError("train_logistic: document and label counts differ");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0.0)) {
    throw DomainError("train_logistic: hyperparameters must be positive");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("train_logistic: labels must be 0 or 1");
  }

  LogisticModel model{build_vocab(docs, cfg.vocab_size), {}, 0.0};
  const std::size_t v = model.vocab.size();
  model.weights.assign(v, 0.0);
  std::vector<std::vector<double>> xs;
  xs.reserve(docs.size());
  for (const auto& d : docs) xs.push_back(encode(d, model.vocab));

  std::vector<double> params(v + 1, 0.0);
  Adam opt(params.size(), AdamConfig{cfg.learning_rate});
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::span<const std::size_t> rows(order.data() + start, std::min(batch, order.size() - start));
      auto g = logistic_gradient(model, xs, labels, rows, cfg.l2);
      opt.step(params, g);
      std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(v), model.weights.begin());
      model.bias = params[v];
    }
  }
  return model;
}

}  // namespace probcomb
