#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "drift/density.hpp"

namespace drift {

struct EstimatorSpec {
  enum class Kind { interp_hist, plain_hist, knn };
  Kind kind = Kind::interp_hist;
  int param = 15;  // bin count or neighbor count
};

struct CautiousConfig {
  double epsilon = 100.0;  // gain-ratio threshold for placing a bet
  int window = 5000;       // history depth of the shadow minimum
  // Number of most recent p-values the estimators are fitted on
  // (Alg. 2's L); 0 means unlimited, i.e. everything since the last reset.
  int sample_window = 0;
  std::vector<EstimatorSpec> estimators;

  void validate() const;
  // Named setups:
  //   IH    = interpolated histogram, 15 bins
  //   MIH   = interpolated histograms, 5/10/15 bins
  //   MIHNN = interpolated histograms 5/10/15 + kNN 5/10/15
  //   CAU   = plain 15-bin histogram
  static CautiousConfig named(std::string_view name);
};

struct BetDecision {
  double value = 1.0;   // betting-function output, > 0
  bool active = false;  // false means the fallback h = 1
  int chosen = -1;      // estimator index when active
};

// Per-pipeline betting state used by the martingale update.
class BettingPolicy {
 public:
  virtual ~BettingPolicy() = default;
  virtual BetDecision bet(double p) = 0;
  // Consume p into the estimator sample and shadow products. Called after
  // bet() for the same p; the shadow players always play.
  virtual void observe(double p) = 0;
  virtual void reset() = 0;
};

// Bets only when some estimator's always-playing shadow product has gained a
// factor epsilon over its minimum within the last `window` steps; the bet then
// uses the density of the most successful estimator. Otherwise returns 1.
class CautiousBetting : public BettingPolicy {
 public:
  explicit CautiousBetting(CautiousConfig config);

  BetDecision bet(double p) override;
  void observe(double p) override;
  void reset() override;

  // Density of estimator j at x, fitted on the sample observed so far
  // (uniform, i.e. 1, while the sample is empty). Floored at 1e-12.
  double density(int j, double x) const;
  // Gain ratio of estimator j's shadow over its window minimum.
  double shadow_ratio(int j) const;
  double shadow_log(int j) const { return shadows_[static_cast<std::size_t>(j)].log_s; }
  int estimator_count() const { return static_cast<int>(config_.estimators.size()); }
  std::int64_t observed() const { return observed_; }
  const CautiousConfig& config() const { return config_; }

 private:
  struct Shadow {
    double log_s = 0.0;
    // Monotone min-queue of (update index, log S1) over the last `window`
    // recorded values.
    std::deque<std::pair<std::int64_t, double>> min_queue;
  };

  void refresh_histograms() const;

  CautiousConfig config_;
  std::vector<double> sample_;        // sorted p-values in the fitting window
  std::deque<double> arrival_order_;  // same values, oldest first (windowing)
  std::vector<Shadow> shadows_;
  std::int64_t observed_ = 0;
  // Lazily refitted histogram per histogram-backed estimator, and lazily
  // recomputed normalizer (integral of the raw kNN estimate) per kNN
  // estimator so every player bets a probability density.
  mutable std::vector<InterpolatedHistogram> hists_;
  mutable std::vector<double> knn_norms_;
  mutable bool hists_dirty_ = true;
};

std::unique_ptr<BettingPolicy> make_cautious(const CautiousConfig& config);

}  // namespace drift
