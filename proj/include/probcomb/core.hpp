#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "probcomb/error.hpp"

namespace probcomb {

using SampleId = std::string;

// Sorted, unique sample ids shared by every column aligned to them. Copies
// are cheap; two sets compare equal when they hold the same ids.
class IdSet {
 public:
  IdSet() : ids_(std::make_shared<const std::vector<SampleId>>()) {}

  explicit IdSet(std::vector<SampleId> ids) {
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i].empty()) throw ValidationError("empty sample id");
      if (i > 0 && ids[i] == ids[i - 1]) throw ValidationError("duplicate sample id '" + ids[i] + "'");
    }
    ids_ = std::make_shared<const std::vector<SampleId>>(std::move(ids));
  }

  std::size_t size() const { return ids_->size(); }
  bool empty() const { return ids_->empty(); }
  const SampleId& operator[](std::size_t i) const { return (*ids_)[i]; }
  auto begin() const { return ids_->begin(); }
  auto end() const { return ids_->end(); }
  const std::vector<SampleId>& values() const { return *ids_; }

  std::optional<std::size_t> find(const SampleId& id) const {
    auto it = std::lower_bound(ids_->begin(), ids_->end(), id);
    if (it == ids_->end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids_->begin());
  }

  // Ids at the given positions, as a new set.
  IdSet subset(std::span<const std::size_t> positions) const {
    std::vector<SampleId> out;
    out.reserve(positions.size());
    for (std::size_t p : positions) out.push_back((*ids_)[p]);
    return IdSet(std::move(out));
  }

  friend bool operator==(const IdSet& a, const IdSet& b) {
    return a.ids_ == b.ids_ || *a.ids_ == *b.ids_;
  }

 private:
  std::shared_ptr<const std::vector<SampleId>> ids_;
};

inline void require_aligned(const IdSet& a, const IdSet& b, const char* what) {
  if (a == b) return;
  std::string msg = std::string(what) + ": sample id sets differ";
  for (const auto& id : a) {
    if (!b.find(id)) throw AlignmentError(msg + " (first missing id '" + id + "')");
  }
  for (const auto& id : b) {
    if (!a.find(id)) throw AlignmentError(msg + " (first missing id '" + id + "')");
  }
  throw AlignmentError(msg);
}

// Decision threshold t in the open interval (0, 1).
class Threshold {
 public:
  constexpr Threshold() = default;
  explicit Threshold(double t) : t_(t) {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("threshold must lie in (0, 1), got " + std::to_string(t));
  }
  constexpr double value() const { return t_; }

 private:
  double t_ = 0.5;
};

// Binary ground truth over a sample-id set.
class LabelVector {
 public:
  LabelVector(IdSet ids, std::vector<int> labels) : ids_(std::move(ids)), labels_(std::move(labels)) {
    if (ids_.empty()) throw ValidationError("label vector needs at least one entry");
    if (ids_.size() != labels_.size()) throw ValidationError("label count does not match id count");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] != 0 && labels_[i] != 1) {
        throw ValidationError("label for '" + ids_[i] + "' is not 0 or 1");
      }
    }
  }

  static LabelVector from_map(const std::map<SampleId, int>& entries) {
    std::vector<SampleId> ids;
    std::vector<int> labels;
    for (const auto& [id, label] : entries) {
      ids.push_back(id);
      labels.push_back(label);
    }
    return LabelVector(IdSet(std::move(ids)), std::move(labels));
  }

  const IdSet& ids() const { return ids_; }
  std::size_t size() const { return labels_.size(); }
  std::span<const int> values() const { return labels_; }
  int operator[](std::size_t i) const { return labels_[i]; }

  std::size_t count_positive() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
  }

  LabelVector take_rows(std::span<const std::size_t> rows) const {
    std::vector<std::size_t> sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> out;
    out.reserve(sorted.size());
    for (std::size_t r : sorted) out.push_back(labels_[r]);
    return LabelVector(ids_.subset(sorted), std::move(out));
  }

 private:
  IdSet ids_;
  std::vector<int> labels_;
};

// One real value per sample, aligned to an id set.
struct Series {
  IdSet ids;
  std::vector<double> values;

  Series(IdSet ids_in, std::vector<double> values_in) : ids(std::move(ids_in)), values(std::move(values_in)) {
    if (ids.size() != values.size()) throw ValidationError("series length does not match id count");
  }
};

// K named probability columns aligned to one id set.
class PredictionMatrix {
 public:
  PredictionMatrix(IdSet ids, std::vector<std::string> names, std::vector<std::vector<double>> columns)
      : ids_(std::move(ids)), names_(std::move(names)), columns_(std::move(columns)) {
    if (names_.empty()) throw ValidationError("prediction matrix needs at least one model");
    if (ids_.empty()) throw ValidationError("prediction matrix needs at least one sample");
    if (names_.size() != columns_.size()) throw ValidationError("model name count does not match column count");
    for (std::size_t k = 0; k < names_.size(); ++k) {
      if (names_[k].empty()) throw ValidationError("empty model name");
      for (std::size_t j = 0; j < k; ++j) {
        if (names_[j] == names_[k]) throw ValidationError("duplicate model name '" + names_[k] + "'");
      }
      if (columns_[k].size() != ids_.size()) {
        throw ValidationError("column '" + names_[k] + "' length does not match id count");
      }
      for (std::size_t i = 0; i < columns_[k].size(); ++i) {
        double p = columns_[k][i];
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ValidationError("column '" + names_[k] + "', sample '" + ids_[i] +
                                "': probability out of [0,1]: " + std::to_string(p));
        }
      }
    }
  }

  // Joins per-model id->probability maps; every map must cover the same ids.
  static PredictionMatrix from_columns(const std::vector<std::pair<std::string, std::map<SampleId, double>>>& cols) {
    if (cols.empty()) throw ValidationError("prediction matrix needs at least one model");
    std::vector<SampleId> ids;
    for (const auto& [id, p] : cols.front().second) ids.push_back(id);
    IdSet idset(std::move(ids));
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    for (const auto& [name, col] : cols) {
      std::vector<double> values;
      values.reserve(idset.size());
      for (const auto& id : idset) {
        auto it = col.find(id);
        if (it == col.end()) throw AlignmentError("column '" + name + "' is missing id '" + id + "'");
        values.push_back(it->second);
      }
      if (col.size() != idset.size()) {
        for (const auto& [id, p] : col) {
          if (!idset.find(id)) throw AlignmentError("column '" + name + "' has extra id '" + id + "'");
        }
      }
      names.push_back(name);
      columns.push_back(std::move(values));
    }
    return PredictionMatrix(std::move(idset), std::move(names), std::move(columns));
  }

  const IdSet& ids() const { return ids_; }
  std::size_t rows() const { return ids_.size(); }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t k = 0; k < names_.size(); ++k) {
      if (names_[k] == name) return k;
    }
    return std::nullopt;
  }

  std::vector<std::size_t> indices_of(std::span<const std::string> names) const {
    std::vector<std::size_t> out;
    out.reserve(names.size());
    for (const auto& n : names) {
      auto k = index_of(n);
      if (!k) throw ValidationError("unknown model '" + n + "'");
      out.push_back(*k);
    }
    return out;
  }

  std::span<const double> column(std::size_t k) const { return columns_[k]; }
  std::span<const double> column(const std::string& name) const {
    auto k = index_of(name);
    if (!k) throw ValidationError("unknown model '" + name + "'");
    return columns_[*k];
  }

  Series series(const std::string& name) const {
    auto c = column(name);
    return Series(ids_, std::vector<double>(c.begin(), c.end()));
  }

  // Writes row j restricted to the given column indices into out.
  void row(std::size_t j, std::span<const std::size_t> col_idx, std::span<double> out) const {
    for (std::size_t i = 0; i < col_idx.size(); ++i) out[i] = columns_[col_idx[i]][j];
  }

  PredictionMatrix select(std::span<const std::string> names) const {
    auto idx = indices_of(names);
    std::vector<std::vector<double>> cols;
    for (auto k : idx) cols.push_back(columns_[k]);
    return PredictionMatrix(ids_, std::vector<std::string>(names.begin(), names.end()), std::move(cols));
  }

  PredictionMatrix take_rows(std::span<const std::size_t> rows) const {
    std::vector<std::size_t> sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::vector<double>> cols(columns_.size());
    for (std::size_t k = 0; k < columns_.size(); ++k) {
      cols[k].reserve(sorted.size());
      for (std::size_t r : sorted) cols[k].push_back(columns_[k][r]);
    }
    return PredictionMatrix(ids_.subset(sorted), names_, std::move(cols));
  }

 private:
  IdSet ids_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

inline double sigmoid(double x) {
  if (!std::isfinite(x)) throw DomainError("sigmoid: non-finite input");
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double shifted_sigmoid(double score, double b) {
  if (!std::isfinite(score) || !std::isfinite(b)) throw DomainError("shifted_sigmoid: non-finite input");
  return sigmoid(score - b);
}

// I_t applied to a raw value: 1 iff v >= t. Accepts any finite value.
inline int harden(double v, Threshold t = {}) { return v >= t.value() ? 1 : 0; }

inline int assign_class(double p, Threshold t = {}) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("assign_class: probability out of [0,1]");
  return harden(p, t);
}

inline double binary_norm(const LabelVector& f) { return std::sqrt(static_cast<double>(f.count_positive())); }

inline double thresholded_norm(std::span<const double> y, Threshold t = {}) {
  std::size_t ones = 0;
  for (double v : y) ones += static_cast<std::size_t>(harden(v, t));
  return std::sqrt(static_cast<double>(ones));
}

inline double thresholded_norm(const Series& y, Threshold t = {}) { return thresholded_norm(y.values, t); }

inline double thresholded_distance(std::span<const double> y, std::span<const double> z, Threshold t = {}) {
  if (y.size() != z.size()) throw AlignmentError("thresholded_distance: series lengths differ");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < y.size(); ++i) diff += static_cast<std::size_t>(harden(y[i], t) != harden(z[i], t));
  return std::sqrt(static_cast<double>(diff));
}

inline double thresholded_distance(const Series& y, const Series& z, Threshold t = {}) {
  require_aligned(y.ids, z.ids, "thresholded_distance");
  return thresholded_distance(y.values, z.values, t);
}

inline double accuracy(std::span<const double> pred, std::span<const int> labels, Threshold t = {}) {
  if (pred.size() != labels.size()) throw AlignmentError("accuracy: prediction and label counts differ");
  if (pred.empty()) throw DomainError("accuracy: empty sample set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += static_cast<std::size_t>(assign_class(pred[i], t) == labels[i]);
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

inline double accuracy(const Series& pred, const LabelVector& labels, Threshold t = {}) {
  require_aligned(pred.ids, labels.ids(), "accuracy");
  return accuracy(pred.values, labels.values(), t);
}

// Fraction of hard labels matching the ground truth.
inline double label_accuracy(std::span<const int> pred, std::span<const int> labels) {
  if (pred.size() != labels.size()) throw AlignmentError("accuracy: prediction and label counts differ");
  if (pred.empty()) throw DomainError("accuracy: empty sample set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += static_cast<std::size_t>(pred[i] == labels[i]);
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace probcomb
