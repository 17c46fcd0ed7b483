#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drift/stream.hpp"

namespace drift {

// Bagged CART-style decision trees with majority voting. Splits are binary:
// exhaustive midpoint thresholds on numeric attributes, one-vs-rest level
// tests on categorical attributes, Gini impurity, grown until pure or fewer
// than two samples, no pruning.
class ForestModel {
 public:
  struct Node {
    bool leaf = true;
    int attr = -1;
    // numeric: goes left iff value <= threshold;
    // categorical: goes left iff value == level.
    double threshold = 0.0;
    int level = -1;
    int left = -1;
    int right = -1;
    int label = 0;                  // leaf majority (ties to smaller class)
    std::vector<int> tallies;       // leaf class counts
  };
  struct Tree {
    std::vector<Node> nodes;
    int predict(std::span<const double> x) const;
  };

  static ForestModel train(std::span<const LabeledInstance> instances,
                           int tree_count, std::uint64_t seed,
                           const FeatureSchema& schema);

  std::vector<double> predict_posterior(std::span<const double> x) const;
  // Per-tree vote fraction argmax; ties toward the smaller class id.
  int predict_label(std::span<const double> x) const;
  // Posterior of a single class; returns 0 for classes the model never saw.
  double posterior_of(std::span<const double> x, int label) const;

  int tree_count() const { return static_cast<int>(trees_.size()); }
  int num_classes() const { return num_classes_; }
  const FeatureSchema& schema() const { return schema_; }
  const std::vector<Tree>& trees() const { return trees_; }

  std::string to_json() const;  // debugging dump, not a stable format

 private:
  FeatureSchema schema_;
  std::vector<Tree> trees_;
  int num_classes_ = 0;
  std::uint64_t seed_ = 0;
};

}  // namespace drift
