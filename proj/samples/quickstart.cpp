// Generate a small synthetic suite, train the combiner, compare with the
// rules and the hybrid, and check the weight-sum interval.

#include <cstdio>

#include "probcomb/probcomb.hpp"

using namespace probcomb;

int main() {
  const std::vector<double> acc{0.88, 0.90, 0.93, 0.88};
  auto train_set = generate({acc, 0.3, 5000, 0.5, 2.0, 1, "a"});
  auto test_set = generate({acc, 0.3, 20000, 0.5, 2.0, 2, "b"});

  for (const auto& name : test_set.preds.names()) {
    std::printf("%-8s %.4f\n", name.c_str(), accuracy(test_set.preds.series(name), test_set.labels));
  }

  auto res = train(train_set.preds, train_set.labels, TrainConfig{});
  std::printf("%-8s %.4f  W=%.4f b=%.4f\n", "nn", accuracy(predict(res.weights, test_set.preds), test_set.labels),
              weight_sum(res.weights), res.weights.b);

  for (auto rule : {RuleKind::sum, RuleKind::max, RuleKind::maj}) {
    if (rule == RuleKind::maj) {
      auto out = apply_rule(rule, test_set.preds, std::vector<std::string>{"M1", "M2", "M3"});
      std::printf("%-8s %.4f  (M1,M2,M3)\n", to_string(rule).data(), label_accuracy(out.labels, test_set.labels.values()));
    } else {
      auto out = apply_rule(rule, test_set.preds, test_set.preds.names());
      std::printf("%-8s %.4f\n", to_string(rule).data(), label_accuracy(out.labels, test_set.labels.values()));
    }
  }

  HybridConfig hc{"M3", {"M1", "M2", "M4"}, RuleKind::max, 0.9};
  auto sweep = theta_sweep(hc, train_set.preds, train_set.labels, default_theta_grid());
  hc.theta = sweep.best_theta;
  auto hy = hybrid_predict(hc, test_set.preds);
  std::printf("%-8s %.4f  theta=%.2f\n", "hybrid", label_accuracy(hy.labels, test_set.labels.values()), hc.theta);

  auto bound = theorem_bounds(res.weights, train_set.preds, train_set.labels);
  std::printf("W in [%g, %g]: %s\n", bound.lower, bound.upper, bound.contained ? "yes" : "no");
}
