#pragma once

#include <map>
#include <span>

#include "drift/errors.hpp"

namespace drift {

// Nonconformity score: negated posterior of the true label, so always in
// [-1, 0] for vote-fraction posteriors.
inline double nonconformity(std::span<const double> posterior, int label) {
  if (label < 0) throw DataError("unknown label");
  if (label >= static_cast<int>(posterior.size())) return 0.0;
  return -posterior[static_cast<std::size_t>(label)];
}

// Scores accumulated since the owning pipeline's last (re)training.
// Stored as value -> multiplicity; rank counts are exact on float equality,
// which is well defined here because scores are vote fractions.
class ScoreHistory {
 public:
  void add(double alpha) {
    ++counts_[alpha];
    ++total_;
  }

  void clear() {
    counts_.clear();
    total_ = 0;
  }

  int size() const { return total_; }
  bool empty() const { return total_ == 0; }

  // Randomized p-value of the most recently added score alpha (the history
  // must already contain it): (#greater + u * #equal) / total. The equal
  // count includes alpha itself, so the result is always > 0 for u > 0.
  double pvalue(double alpha, double u) const {
    if (total_ == 0) throw DataError("p-value of an empty score history");
    int greater = 0;
    for (auto it = counts_.upper_bound(alpha); it != counts_.end(); ++it)
      greater += it->second;
    const auto eq = counts_.find(alpha);
    const int equal = eq == counts_.end() ? 0 : eq->second;
    return (static_cast<double>(greater) + u * static_cast<double>(equal)) /
           static_cast<double>(total_);
  }

 private:
  std::map<double, int> counts_;
  int total_ = 0;
};

}  // namespace drift
