#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "probcomb/core.hpp"
#include "probcomb/eval.hpp"
#include "probcomb/nn_combiner.hpp"
#include "probcomb/numfmt.hpp"

namespace probcomb {

namespace fs = std::filesystem;

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
  return ss.str();
}

// Writes to a sibling temp file, then renames over the target, so a failed
// write never leaves a partial file at `path`.
inline void write_text_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed on '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path.string() + "'");
  }
}

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

// Rows of a two-column CSV with the given exact header; blank lines are
// skipped. Each row is (line number, first field, second field).
struct CsvRow {
  std::size_t line;
  std::string first;
  std::string second;
};

inline std::vector<CsvRow> read_two_column_csv(const fs::path& path, std::string_view header) {
  auto lines = split_lines(read_text(path));
  const std::string where = path.string();
  if (lines.empty() || lines.front() != header) {
    throw ValidationError(where + ":1: expected header '" + std::string(header) + "'");
  }
  std::vector<CsvRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ValidationError(where + ":" + std::to_string(i + 1) + ": expected exactly two fields");
    }
    rows.push_back({i + 1, line.substr(0, comma), line.substr(comma + 1)});
  }
  return rows;
}

}  // namespace detail

// Prediction file: header `id,prob`, one row per sample.
inline std::map<SampleId, double> read_prediction_file(const fs::path& path) {
  std::map<SampleId, double> out;
  const std::string where = path.string();
  for (const auto& row : detail::read_two_column_csv(path, "id,prob")) {
    const std::string loc = where + ":" + std::to_string(row.line);
    if (row.first.empty()) throw ValidationError(loc + ": empty id");
    double p = 0.0;
    try {
      p = parse_real(row.second);
    } catch (const ValidationError&) {
      throw ValidationError(loc + ": malformed probability '" + row.second + "'");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(loc + ": probability out of [0,1]: " + row.second);
    if (!out.emplace(row.first, p).second) throw ValidationError(loc + ": duplicate id '" + row.first + "'");
  }
  if (out.empty()) throw ValidationError(where + ": no rows");
  return out;
}

inline LabelVector read_label_file(const fs::path& path) {
  std::map<SampleId, int> out;
  const std::string where = path.string();
  for (const auto& row : detail::read_two_column_csv(path, "id,label")) {
    const std::string loc = where + ":" + std::to_string(row.line);
    if (row.first.empty()) throw ValidationError(loc + ": empty id");
    if (row.second != "0" && row.second != "1") throw ValidationError(loc + ": label must be 0 or 1");
    if (!out.emplace(row.first, row.second == "1" ? 1 : 0).second) {
      throw ValidationError(loc + ": duplicate id '" + row.first + "'");
    }
  }
  if (out.empty()) throw ValidationError(where + ": no rows");
  return LabelVector::from_map(out);
}

// Strict join: every file must hold exactly the same id set.
inline PredictionMatrix load_matrix(const std::vector<fs::path>& paths, const std::vector<std::string>& names) {
  if (paths.empty()) throw ValidationError("load_matrix: no prediction files");
  if (paths.size() != names.size()) throw ValidationError("load_matrix: path count does not match name count");
  std::vector<std::pair<std::string, std::map<SampleId, double>>> cols;
  for (std::size_t i = 0; i < paths.size(); ++i) cols.emplace_back(names[i], read_prediction_file(paths[i]));
  const auto& ref = cols.front().second;
  for (std::size_t i = 1; i < cols.size(); ++i) {
    for (const auto& [id, p] : ref) {
      if (!cols[i].second.count(id)) {
        throw AlignmentError(paths[i].string() + ": missing id '" + id + "' present in " + paths[0].string());
      }
    }
    for (const auto& [id, p] : cols[i].second) {
      if (!ref.count(id)) {
        throw AlignmentError(paths[0].string() + ": missing id '" + id + "' present in " + paths[i].string());
      }
    }
  }
  return PredictionMatrix::from_columns(cols);
}

inline std::string render_prediction_file(const IdSet& ids, std::span<const double> probs) {
  std::string out = "id,prob\n";
  for (std::size_t j = 0; j < ids.size(); ++j) {
    out += ids[j];
    out += ',';
    out += format_real(probs[j]);
    out += '\n';
  }
  return out;
}

inline void write_prediction_file(const fs::path& path, const Series& s) {
  write_text_atomic(path, render_prediction_file(s.ids, s.values));
}

inline void write_label_file(const fs::path& path, const LabelVector& labels) {
  std::string out = "id,label\n";
  for (std::size_t j = 0; j < labels.size(); ++j) {
    out += labels.ids()[j];
    out += labels[j] == 1 ? ",1\n" : ",0\n";
  }
  write_text_atomic(path, out);
}

// Persisted combiner: weights plus the configuration that produced them.
struct WeightsDocument {
  CombinerWeights weights;
  TrainConfig config;
  bool clipped_any = false;
};

inline std::string render_weights(const WeightsDocument& doc) {
  nlohmann::ordered_json j;
  j["model_names"] = doc.weights.model_names;
  j["weights"] = doc.weights.w;
  j["b"] = doc.weights.b;
  j["t"] = doc.weights.t.value();
  j["train_config"] = {
      {"learning_rate", doc.config.learning_rate}, {"epochs", doc.config.epochs},
      {"batch_size", doc.config.batch_size},       {"l2", doc.config.l2},
      {"seed", doc.config.seed},                   {"shuffle_each_epoch", doc.config.shuffle_each_epoch},
  };
  j["clipped_any"] = doc.clipped_any;
  return j.dump(2) + "\n";
}

inline WeightsDocument parse_weights(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("weights: malformed JSON: ") + e.what());
  }
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("weights: missing field '") + key + "'");
    return j.at(key);
  };
  WeightsDocument doc;
  try {
    doc.weights.model_names = need("model_names").get<std::vector<std::string>>();
    doc.weights.w = need("weights").get<std::vector<double>>();
    doc.weights.b = need("b").get<double>();
    doc.weights.t = Threshold(need("t").get<double>());
    const auto& c = need("train_config");
    doc.config.learning_rate = c.at("learning_rate").get<double>();
    doc.config.epochs = c.at("epochs").get<int>();
    doc.config.batch_size = c.at("batch_size").get<int>();
    doc.config.l2 = c.at("l2").get<double>();
    doc.config.seed = c.at("seed").get<std::uint64_t>();
    doc.config.shuffle_each_epoch = c.at("shuffle_each_epoch").get<bool>();
    doc.clipped_any = need("clipped_any").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("weights: schema violation: ") + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(std::string("weights: ") + e.what());
  }
  doc.weights.validate();
  return doc;
}

inline void save_weights(const fs::path& path, const WeightsDocument& doc) {
  doc.weights.validate();
  write_text_atomic(path, render_weights(doc));
}

inline WeightsDocument load_weights(const fs::path& path) { return parse_weights(read_text(path)); }

inline void save_report(const fs::path& path, const EvalReport& report, bool detail) {
  write_text_atomic(path, report_render(report, detail));
}

inline ReportSummary load_report_summary(const fs::path& path) { return parse_report_summary(read_text(path)); }

// One document per line.
inline std::vector<std::string> read_corpus(const fs::path& path) {
  auto lines = detail::split_lines(read_text(path));
  if (lines.empty()) throw ValidationError(path.string() + ": empty corpus");
  return lines;
}

}  // namespace probcomb
