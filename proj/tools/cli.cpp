#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "probcomb/probcomb.hpp"

namespace probcomb::cli {
namespace {

namespace fs = std::filesystem;

// "NAME=PATH" or a bare PATH whose stem names the model.
struct NamedPath {
  std::string name;
  fs::path path;
};

NamedPath parse_named_path(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq != std::string::npos && eq > 0 && arg.substr(0, eq).find('/') == std::string::npos) {
    return {arg.substr(0, eq), arg.substr(eq + 1)};
  }
  fs::path p(arg);
  return {p.stem().string(), p};
}

PredictionMatrix load_named(const std::vector<std::string>& args) {
  std::vector<fs::path> paths;
  std::vector<std::string> names;
  for (const auto& a : args) {
    auto np = parse_named_path(a);
    names.push_back(np.name);
    paths.push_back(np.path);
  }
  return load_matrix(paths, names);
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string item; std::getline(is, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  auto first = spec.find(':');
  auto second = first == std::string::npos ? std::string::npos : spec.find(':', first + 1);
  if (second == std::string::npos) throw ValidationError("grid must be lo:hi:step, got '" + spec + "'");
  return theta_grid(parse_real(spec.substr(0, first)), parse_real(spec.substr(first + 1, second - first - 1)),
                    parse_real(spec.substr(second + 1)));
}

void emit(const std::string& out_path, const std::string& text, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_atomic(out_path, text);
  }
}

struct NnFlags {
  double l2 = kDefaultL2;
  int epochs = 200;
  double lr = 0.001;
  int batch = 32;
  bool no_shuffle = false;

  void add(CLI::App* app) {
    app->add_option("--l2", l2, "L2 penalty on the weights")->capture_default_str();
    app->add_option("--epochs", epochs, "training epochs")->capture_default_str();
    app->add_option("--lr", lr, "ADAM learning rate")->capture_default_str();
    app->add_option("--batch", batch, "minibatch size")->capture_default_str();
    app->add_flag("--no-shuffle", no_shuffle, "keep canonical sample order every epoch");
  }

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.l2 = l2;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.batch_size = batch;
    c.seed = seed;
    c.shuffle_each_epoch = !no_shuffle;
    return c;
  }
};

struct HybridFlags {
  std::string base;
  std::string aux;
  std::string rule = "max";

  void add(CLI::App* app) {
    app->add_option("--hybrid-base", base, "base model name");
    app->add_option("--hybrid-aux", aux, "comma-separated auxiliary model names");
    app->add_option("--rule", rule, "rule over the auxiliary models: sum|avg|max|maj")->capture_default_str();
  }

  // Auxiliaries default to every model other than the base.
  HybridConfig config(const PredictionMatrix& m) const {
    if (base.empty()) throw ValidationError("--hybrid-base is required");
    HybridConfig c;
    c.base = base;
    c.aux = split_csv_list(aux);
    if (c.aux.empty()) {
      for (const auto& n : m.names()) {
        if (n != base) c.aux.push_back(n);
      }
    }
    c.rule = parse_rule(rule);
    return c;
  }
};

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Combine binary-classifier probabilities: trained non-negative combiner, "
               "Bayesian rules, base-plus-threshold hybrid."};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a calibrated synthetic predictor suite");
  std::string synth_acc;
  SyntheticSpec spec;
  std::string synth_out;
  bool synth_no_pad = false;
  synth->add_option("--acc", synth_acc, "comma-separated target accuracies, one per model")->required();
  synth->add_option("--rho", spec.rho, "shared-noise fraction in [0,1)")->capture_default_str();
  synth->add_option("--n", spec.n, "sample count")->capture_default_str();
  synth->add_option("--balance", spec.balance, "positive-class prior")->capture_default_str();
  synth->add_option("--sharpness", spec.sharpness, "sigmoid sharpness")->capture_default_str();
  synth->add_option("--seed", spec.seed, "random seed")->capture_default_str();
  synth->add_option("--id-prefix", spec.id_prefix, "sample id prefix")->capture_default_str();
  synth->add_flag("--no-pad", synth_no_pad, "do not zero-pad sample indices");
  synth->add_option("--out", synth_out, "output directory")->required();

  // train-nn
  auto* train_nn = app.add_subcommand("train-nn", "train the non-negative combiner");
  std::vector<std::string> tn_preds;
  std::string tn_labels, tn_out;
  std::uint64_t tn_seed = 0;
  double tn_t = 0.5;
  NnFlags tn_flags;
  train_nn->add_option("--preds", tn_preds, "prediction files, NAME=PATH or PATH")->required();
  train_nn->add_option("--labels", tn_labels, "label file")->required();
  tn_flags.add(train_nn);
  train_nn->add_option("--seed", tn_seed, "shuffle seed")->capture_default_str();
  train_nn->add_option("--threshold", tn_t, "decision threshold t")->capture_default_str();
  train_nn->add_option("--out", tn_out, "weights JSON output")->required();

  // combine
  auto* combine = app.add_subcommand("combine", "combine prediction files into one");
  std::string cb_method, cb_weights, cb_out, cb_sources, cb_models;
  std::vector<std::string> cb_preds;
  double cb_theta = 0.9;
  HybridFlags cb_hybrid;
  combine->add_option("--method", cb_method, "nn|sum|avg|max|maj|hybrid")->required();
  combine->add_option("--weights", cb_weights, "weights JSON (nn)");
  combine->add_option("--preds", cb_preds, "prediction files, NAME=PATH or PATH")->required();
  combine->add_option("--models", cb_models, "comma-separated model subset for rules (default all)");
  cb_hybrid.add(combine);
  combine->add_option("--theta", cb_theta, "hybrid confidence threshold in (0.5,1)")->capture_default_str();
  combine->add_option("--out", cb_out, "combined prediction file (default stdout)");
  combine->add_option("--sources-out", cb_sources, "hybrid: per-sample base|aux file");

  // eval
  auto* eval = app.add_subcommand("eval", "accuracy of prediction files against labels");
  std::vector<std::string> ev_preds, ev_combined;
  std::string ev_labels, ev_out;
  double ev_t = 0.5;
  eval->add_option("--preds", ev_preds, "prediction files, NAME=PATH or PATH");
  eval->add_option("--combined", ev_combined, "combined prediction files, NAME=PATH or PATH");
  eval->add_option("--labels", ev_labels, "label file")->required();
  eval->add_option("--threshold", ev_t, "decision threshold")->capture_default_str();
  eval->add_option("--out", ev_out, "TSV output (default stdout)");

  // sweep-theta
  auto* sweep = app.add_subcommand("sweep-theta", "hybrid accuracy over a theta grid");
  std::vector<std::string> sw_preds;
  std::string sw_labels, sw_out, sw_grid = "0.51:0.99:0.01";
  HybridFlags sw_hybrid;
  sweep->add_option("--preds", sw_preds, "prediction files, NAME=PATH or PATH")->required();
  sweep->add_option("--labels", sw_labels, "label file")->required();
  sw_hybrid.add(sweep);
  sweep->add_option("--grid", sw_grid, "lo:hi:step")->capture_default_str();
  sweep->add_option("--out", sw_out, "TSV output (default stdout)");

  // check-bound
  auto* check = app.add_subcommand("check-bound", "weight-sum interval of a trained combiner");
  std::string ck_weights, ck_labels, ck_out;
  std::vector<std::string> ck_preds;
  check->add_option("--weights", ck_weights, "weights JSON")->required();
  check->add_option("--preds", ck_preds, "prediction files, NAME=PATH or PATH")->required();
  check->add_option("--labels", ck_labels, "label file")->required();
  check->add_option("--out", ck_out, "TSV output (default stdout)");

  // cv
  auto* cv = app.add_subcommand("cv", "fold-by-repeat evaluation protocol");
  RunPlan plan;
  std::string cv_method, cv_train_labels, cv_test_labels, cv_out, cv_models, cv_grid = "0.51:0.99:0.01";
  std::vector<std::string> cv_train_preds, cv_test_preds;
  unsigned cv_threads = 1;
  bool cv_detail = false;
  NnFlags cv_nn;
  HybridFlags cv_hybrid;
  cv->add_option("--folds", plan.n_folds, "folds of the training pool")->capture_default_str();
  cv->add_option("--repeats", plan.repeats_per_fold, "nn trainings per fold")->capture_default_str();
  cv->add_option("--seed", plan.seed, "plan seed")->capture_default_str();
  cv->add_option("--method", cv_method, "nn|sum|avg|max|maj|hybrid")->required();
  cv->add_option("--train-preds", cv_train_preds, "training-pool prediction files")->required();
  cv->add_option("--train-labels", cv_train_labels, "training-pool labels")->required();
  cv->add_option("--test-preds", cv_test_preds, "test prediction files")->required();
  cv->add_option("--test-labels", cv_test_labels, "test labels")->required();
  cv->add_option("--models", cv_models, "comma-separated model subset for rules (default all)");
  cv_nn.add(cv);
  cv_hybrid.add(cv);
  cv->add_option("--grid", cv_grid, "hybrid theta grid lo:hi:step")->capture_default_str();
  cv->add_option("--threads", cv_threads, "worker threads")->capture_default_str();
  cv->add_flag("--detail", cv_detail, "append per-run rows");
  cv->add_option("--out", cv_out, "TSV report (default stdout)");

  // text-model
  auto* text = app.add_subcommand("text-model", "train the bag-of-words reference predictor");
  std::string tx_corpus, tx_labels, tx_predict, tx_out;
  LogisticConfig tx_cfg;
  text->add_option("--corpus", tx_corpus, "training corpus, one document per line")->required();
  text->add_option("--labels", tx_labels, "label file keyed by 0-based line number")->required();
  text->add_option("--predict-corpus", tx_predict, "corpus to score (default: the training corpus)");
  text->add_option("--vocab", tx_cfg.vocab_size, "vocabulary size")->capture_default_str();
  text->add_option("--epochs", tx_cfg.epochs, "training epochs")->capture_default_str();
  text->add_option("--lr", tx_cfg.learning_rate, "ADAM learning rate")->capture_default_str();
  text->add_option("--batch", tx_cfg.batch_size, "minibatch size")->capture_default_str();
  text->add_option("--seed", tx_cfg.seed, "shuffle seed")->capture_default_str();
  text->add_option("--out", tx_out, "prediction file output")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::validation);
  }

  try {
    if (synth->parsed()) {
      spec.target_acc.clear();
      for (const auto& a : split_csv_list(synth_acc)) spec.target_acc.push_back(parse_real(a));
      spec.pad_ids = !synth_no_pad;
      auto data = generate(spec);
      std::error_code ec;
      fs::create_directories(synth_out, ec);
      if (ec) throw IoError("cannot create directory '" + synth_out + "'");
      write_label_file(fs::path(synth_out) / "labels.csv", data.labels);
      for (const auto& name : data.preds.names()) {
        write_prediction_file(fs::path(synth_out) / (name + ".csv"), data.preds.series(name));
      }
    } else if (train_nn->parsed()) {
      auto m = load_named(tn_preds);
      auto labels = read_label_file(tn_labels);
      auto res = train(m, labels, tn_flags.config(tn_seed));
      res.weights.t = Threshold(tn_t);
      save_weights(tn_out, {res.weights, res.config, res.clipped_any});
      if (res.degenerate_labels) err << "warning: training labels contain a single class\n";
      out << "trained " << res.weights.size() << " weights, W=" << format_real(weight_sum(res.weights))
          << " b=" << format_real(res.weights.b) << " train_accuracy="
          << format_fixed(100.0 * accuracy(predict(res.weights, m), labels, res.weights.t), 2) << "\n";
    } else if (combine->parsed()) {
      auto m = load_named(cb_preds);
      std::string text_out;
      if (cb_method == "nn") {
        if (cb_weights.empty()) throw ValidationError("--weights is required for --method nn");
        auto doc = load_weights(cb_weights);
        auto s = predict(doc.weights, m);
        text_out = render_prediction_file(s.ids, s.values);
      } else if (cb_method == "hybrid") {
        auto cfg = cb_hybrid.config(m);
        cfg.theta = cb_theta;
        auto res = hybrid_predict(cfg, m);
        text_out = render_prediction_file(res.ids, res.scores);
        if (!cb_sources.empty()) {
          std::string src = "id,source\n";
          for (std::size_t j = 0; j < res.ids.size(); ++j) {
            src += res.ids[j] + (res.sources[j] == Source::base ? ",base\n" : ",aux\n");
          }
          write_text_atomic(cb_sources, src);
        }
      } else {
        auto rule = parse_rule(cb_method);
        auto models = split_csv_list(cb_models);
        if (models.empty()) models = m.names();
        auto res = apply_rule(rule, m, models);
        text_out = render_prediction_file(res.ids, res.scores);
      }
      emit(cb_out, text_out, out);
    } else if (eval->parsed()) {
      if (ev_preds.empty() && ev_combined.empty()) throw ValidationError("eval needs --preds or --combined");
      auto labels = read_label_file(ev_labels);
      Threshold t(ev_t);
      std::string tsv = "model\taccuracy\taccuracy_pct\n";
      std::vector<std::string> all(ev_preds);
      all.insert(all.end(), ev_combined.begin(), ev_combined.end());
      for (const auto& a : all) {
        auto np = parse_named_path(a);
        auto m = load_matrix({np.path}, {np.name});
        const double acc = accuracy(m.series(np.name), labels, t);
        tsv += np.name + "\t" + format_real(acc) + "\t" + format_fixed(100.0 * acc, 2) + "\n";
      }
      emit(ev_out, tsv, out);
    } else if (sweep->parsed()) {
      auto m = load_named(sw_preds);
      auto labels = read_label_file(sw_labels);
      auto grid = parse_grid(sw_grid);
      auto res = theta_sweep(sw_hybrid.config(m), m, labels, grid);
      std::string tsv = "theta\taccuracy\tfallback_fraction\n";
      for (const auto& p : res.points) {
        tsv += format_fixed(p.theta, 2) + "\t" + format_real(p.accuracy) + "\t" + format_real(p.fallback_fraction) + "\n";
      }
      emit(sw_out, tsv, out);
      err << "best theta " << format_fixed(res.best_theta, 2) << " accuracy " << format_fixed(100.0 * res.best_accuracy, 2)
          << "\n";
    } else if (check->parsed()) {
      auto doc = load_weights(ck_weights);
      auto m = load_named(ck_preds);
      auto labels = read_label_file(ck_labels);
      auto r = theorem_bounds(doc.weights, m, labels);
      std::string tsv = "W\tlower\tupper\tnorm_u\terr_y\terr_yhat\tcontained\tdegenerate\n";
      tsv += format_real(r.W) + "\t" + format_real(r.lower) + "\t" + format_real(r.upper) + "\t" +
             format_real(r.norm_u) + "\t" + format_real(r.err_y) + "\t" + format_real(r.err_yhat) + "\t" +
             (r.contained ? "1" : "0") + "\t" + (r.degenerate ? "1" : "0") + "\n";
      emit(ck_out, tsv, out);
    } else if (cv->parsed()) {
      auto train_m = load_named(cv_train_preds);
      auto train_l = read_label_file(cv_train_labels);
      auto test_m = load_named(cv_test_preds);
      auto test_l = read_label_file(cv_test_labels);
      Method method;
      if (cv_method == "nn") {
        method = NnMethod{cv_nn.config(0)};
      } else if (cv_method == "hybrid") {
        HybridMethod hm;
        hm.config = cv_hybrid.config(train_m);
        hm.grid = parse_grid(cv_grid);
        method = hm;
      } else {
        RuleMethod rm{parse_rule(cv_method), split_csv_list(cv_models)};
        check_rule_subset(rm.rule, rm.models.empty() ? train_m.cols() : rm.models.size());
        method = rm;
      }
      auto report = cross_validate(plan, train_m, train_l, test_m, test_l, method, cv_threads);
      emit(cv_out, report_render(report, cv_detail), out);
    } else if (text->parsed()) {
      auto docs = read_corpus(tx_corpus);
      auto labels = read_label_file(tx_labels);
      if (labels.size() != docs.size()) throw ValidationError("label file does not cover every corpus line");
      std::vector<int> ys(docs.size());
      for (std::size_t i = 0; i < docs.size(); ++i) {
        auto pos = labels.ids().find(std::to_string(i));
        if (!pos) throw ValidationError("label file has no entry for line " + std::to_string(i));
        ys[i] = labels[*pos];
      }
      auto model = train_logistic(docs, ys, tx_cfg);
      auto targets = tx_predict.empty() ? docs : read_corpus(tx_predict);
      std::vector<SampleId> ids;
      std::vector<double> probs;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        ids.push_back(std::to_string(i));
        probs.push_back(predict_proba(model, targets[i]));
      }
      // Line-number ids sort as text; reorder the values to match.
      IdSet idset(ids);
      std::vector<double> ordered(probs.size());
      for (std::size_t i = 0; i < ids.size(); ++i) ordered[*idset.find(ids[i])] = probs[i];
      write_prediction_file(tx_out, Series(idset, std::move(ordered)));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(exit_code(e));
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::io);
  }
  return 0;
}

}  // namespace probcomb::cli
