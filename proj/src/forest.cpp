#include "drift/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "drift/errors.hpp"
#include "drift/rng.hpp"

namespace drift {

namespace {

double gini(std::span<const int> counts, int total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct SplitCandidate {
  double impurity = std::numeric_limits<double>::infinity();
  int attr = -1;
  double threshold = 0.0;
  int level = -1;
  bool valid() const { return attr >= 0; }
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const LabeledInstance> data, const FeatureSchema& schema,
              int num_classes)
      : data_(data), schema_(schema), num_classes_(num_classes) {}

  ForestModel::Tree build(std::vector<int> sample) {
    tree_.nodes.clear();
    build_node(std::move(sample));
    return std::move(tree_);
  }

 private:
  int build_node(std::vector<int> idx) {
    std::vector<int> counts(static_cast<std::size_t>(num_classes_), 0);
    for (int i : idx) ++counts[static_cast<std::size_t>(data_[i].label)];
    const int total = static_cast<int>(idx.size());
    const double node_impurity = gini(counts, total);

    const int node_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    const bool pure = node_impurity <= 0.0;
    SplitCandidate best;
    if (!pure && total >= 2) best = best_split(idx, node_impurity);

    if (pure || total < 2 || !best.valid()) {
      make_leaf(node_id, counts);
      return node_id;
    }

    std::vector<int> left_idx, right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (int i : idx) {
      if (goes_left(data_[i].features[static_cast<std::size_t>(best.attr)], best))
        left_idx.push_back(i);
      else
        right_idx.push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    tree_.nodes[node_id].leaf = false;
    tree_.nodes[node_id].attr = best.attr;
    tree_.nodes[node_id].threshold = best.threshold;
    tree_.nodes[node_id].level = best.level;
    const int left = build_node(std::move(left_idx));
    tree_.nodes[node_id].left = left;
    const int right = build_node(std::move(right_idx));
    tree_.nodes[node_id].right = right;
    return node_id;
  }

  static bool goes_left(double value, const SplitCandidate& s) {
    if (s.level >= 0) return static_cast<int>(value) == s.level;
    return value <= s.threshold;
  }

  void make_leaf(int node_id, const std::vector<int>& counts) {
    ForestModel::Node& node = tree_.nodes[static_cast<std::size_t>(node_id)];
    node.leaf = true;
    node.tallies = counts;
    int best_label = 0;
    for (int c = 1; c < num_classes_; ++c)
      if (counts[static_cast<std::size_t>(c)] >
          counts[static_cast<std::size_t>(best_label)])
        best_label = c;
    node.label = best_label;
  }

  SplitCandidate best_split(const std::vector<int>& idx, double node_impurity) {
    SplitCandidate best;
    best.impurity = node_impurity - 1e-12;  // require a strict improvement
    const int total = static_cast<int>(idx.size());

    for (std::size_t a = 0; a < schema_.attributes.size(); ++a) {
      const Attribute& attr = schema_.attributes[a];
      if (attr.kind == AttrKind::numeric) {
        scan_numeric(idx, static_cast<int>(a), total, best);
      } else {
        scan_categorical(idx, static_cast<int>(a), attr, total, best);
      }
    }
    return best;
  }

  void scan_numeric(const std::vector<int>& idx, int a, int total,
                    SplitCandidate& best) {
    scratch_.assign(idx.begin(), idx.end());
    std::sort(scratch_.begin(), scratch_.end(), [&](int l, int r) {
      return data_[l].features[static_cast<std::size_t>(a)] <
             data_[r].features[static_cast<std::size_t>(a)];
    });
    std::vector<int> left(static_cast<std::size_t>(num_classes_), 0);
    std::vector<int> right(static_cast<std::size_t>(num_classes_), 0);
    for (int i : scratch_) ++right[static_cast<std::size_t>(data_[i].label)];

    for (int pos = 0; pos + 1 < total; ++pos) {
      const int i = scratch_[static_cast<std::size_t>(pos)];
      const int cls = data_[i].label;
      ++left[static_cast<std::size_t>(cls)];
      --right[static_cast<std::size_t>(cls)];
      const double v = data_[i].features[static_cast<std::size_t>(a)];
      const double v_next =
          data_[scratch_[static_cast<std::size_t>(pos + 1)]]
              .features[static_cast<std::size_t>(a)];
      if (v_next <= v) continue;  // only between distinct values
      const int nl = pos + 1;
      const int nr = total - nl;
      const double impurity =
          (nl * gini(left, nl) + nr * gini(right, nr)) / total;
      if (impurity < best.impurity) {
        best.impurity = impurity;
        best.attr = a;
        best.threshold = v + (v_next - v) / 2.0;
        best.level = -1;
      }
    }
  }

  void scan_categorical(const std::vector<int>& idx, int a,
                        const Attribute& attr, int total, SplitCandidate& best) {
    const int n_levels = static_cast<int>(attr.levels.size());
    // per-level class counts
    level_counts_.assign(
        static_cast<std::size_t>(n_levels * num_classes_), 0);
    std::vector<int> node_counts(static_cast<std::size_t>(num_classes_), 0);
    std::vector<int> level_totals(static_cast<std::size_t>(n_levels), 0);
    for (int i : idx) {
      const int lvl =
          static_cast<int>(data_[i].features[static_cast<std::size_t>(a)]);
      const int cls = data_[i].label;
      ++level_counts_[static_cast<std::size_t>(lvl * num_classes_ + cls)];
      ++node_counts[static_cast<std::size_t>(cls)];
      ++level_totals[static_cast<std::size_t>(lvl)];
    }
    std::vector<int> left(static_cast<std::size_t>(num_classes_), 0);
    std::vector<int> right(static_cast<std::size_t>(num_classes_), 0);
    for (int lvl = 0; lvl < n_levels; ++lvl) {
      const int nl = level_totals[static_cast<std::size_t>(lvl)];
      const int nr = total - nl;
      if (nl == 0 || nr == 0) continue;
      for (int c = 0; c < num_classes_; ++c) {
        const int lc =
            level_counts_[static_cast<std::size_t>(lvl * num_classes_ + c)];
        left[static_cast<std::size_t>(c)] = lc;
        right[static_cast<std::size_t>(c)] =
            node_counts[static_cast<std::size_t>(c)] - lc;
      }
      const double impurity =
          (nl * gini(left, nl) + nr * gini(right, nr)) / total;
      if (impurity < best.impurity) {
        best.impurity = impurity;
        best.attr = a;
        best.level = lvl;
        best.threshold = 0.0;
      }
    }
  }

  std::span<const LabeledInstance> data_;
  const FeatureSchema& schema_;
  int num_classes_;
  ForestModel::Tree tree_;
  std::vector<int> scratch_;
  std::vector<int> level_counts_;
};

}  // namespace

int ForestModel::Tree::predict(std::span<const double> x) const {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].leaf) {
    const Node& n = nodes[static_cast<std::size_t>(node)];
    const double v = x[static_cast<std::size_t>(n.attr)];
    const bool left =
        n.level >= 0 ? static_cast<int>(v) == n.level : v <= n.threshold;
    node = left ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].label;
}

ForestModel ForestModel::train(std::span<const LabeledInstance> instances,
                               int tree_count, std::uint64_t seed,
                               const FeatureSchema& schema) {
  if (instances.empty()) throw DataError("empty training set");
  if (tree_count < 1) throw SpecError("tree_count must be >= 1");
  schema.validate();

  ForestModel model;
  model.schema_ = schema;
  model.seed_ = seed;
  int max_label = 0;
  for (const auto& z : instances) {
    if (z.label < 0) throw DataError("negative class label");
    max_label = std::max(max_label, z.label);
    if (z.features.size() != schema.attributes.size())
      throw DataError("instance feature count does not match schema");
  }
  model.num_classes_ = max_label + 1;

  TreeBuilder builder(instances, model.schema_, model.num_classes_);
  const int n = static_cast<int>(instances.size());
  model.trees_.reserve(static_cast<std::size_t>(tree_count));
  for (int t = 0; t < tree_count; ++t) {
    Rng rng = Rng::derive(seed, 0xb00b5 + static_cast<std::uint64_t>(t));
    std::vector<int> sample(static_cast<std::size_t>(n));
    for (int& i : sample)
      i = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(n)));
    model.trees_.push_back(builder.build(std::move(sample)));
  }
  return model;
}

std::vector<double> ForestModel::predict_posterior(
    std::span<const double> x) const {
  if (x.size() != schema_.attributes.size())
    throw DataError("feature count does not match model schema");
  std::vector<double> posterior(static_cast<std::size_t>(num_classes_), 0.0);
  for (const Tree& t : trees_)
    posterior[static_cast<std::size_t>(t.predict(x))] += 1.0;
  const double total = static_cast<double>(trees_.size());
  for (double& p : posterior) p /= total;
  return posterior;
}

int ForestModel::predict_label(std::span<const double> x) const {
  const auto posterior = predict_posterior(x);
  int best = 0;
  for (int c = 1; c < num_classes_; ++c)
    if (posterior[static_cast<std::size_t>(c)] >
        posterior[static_cast<std::size_t>(best)])
      best = c;
  return best;
}

double ForestModel::posterior_of(std::span<const double> x, int label) const {
  const auto posterior = predict_posterior(x);
  if (label < 0) throw DataError("negative class label");
  if (label >= num_classes_) return 0.0;
  return posterior[static_cast<std::size_t>(label)];
}

std::string ForestModel::to_json() const {
  std::ostringstream out;
  out << "{\"tree_count\":" << trees_.size()
      << ",\"num_classes\":" << num_classes_ << ",\"trees\":[";
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    if (t) out << ',';
    out << "[";
    const auto& nodes = trees_[t].nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node& n = nodes[i];
      if (i) out << ',';
      if (n.leaf) {
        out << "{\"label\":" << n.label << "}";
      } else {
        out << "{\"attr\":" << n.attr;
        if (n.level >= 0)
          out << ",\"level\":" << n.level;
        else
          out << ",\"threshold\":" << n.threshold;
        out << ",\"left\":" << n.left << ",\"right\":" << n.right << "}";
      }
    }
    out << "]";
  }
  out << "]}";
  return out.str();
}

}  // namespace drift
