#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "drift/betting.hpp"

namespace drift {

struct MartingaleConfig {
  double delta = 0.01;  // significance level; alarm when S > 1/delta
  double r = 10.0;      // retrain-anchor threshold, > 1
  // Soft bound on the stored trajectory; older entries before the last
  // crossing below r are pruned once exceeded.
  std::size_t trajectory_cap = 50000;
  // When positive, S is clamped from below at this value after every update,
  // so stretches of losing bets cannot push the detector into a deep deficit
  // it must climb out of before it can alarm. 0 disables (pure product).
  double floor = 0.0;

  void validate() const;
};

struct AlarmEvent {
  std::int64_t at = 0;       // timestamp whose p-value pushed S over 1/delta
  double log_s = 0.0;        // log S at alarm
  std::int64_t anchor = 0;   // retrain anchor d
};

// Single-pipeline exchangeability martingale, tracked in log scale.
class Martingale {
 public:
  explicit Martingale(MartingaleConfig config = {});

  // Multiply S by the bet value; records (timestamp, log S).
  void update(double bet_value, std::int64_t timestamp);

  // Alarm iff S > 1/delta (strict).
  bool alarming() const;
  std::optional<AlarmEvent> check_alarm() const;

  // Backward anchor: (largest recorded timestamp with S < r) + 1, or the
  // trajectory start when no entry is below r. Requires a non-empty trajectory.
  std::int64_t retrain_anchor() const;

  void reset();

  double log_s() const { return log_s_; }
  double value() const;
  const MartingaleConfig& config() const { return config_; }
  const std::vector<std::pair<std::int64_t, double>>& trajectory() const {
    return trajectory_;
  }

  // CSV lines "timestamp,log_s" for plotting.
  void export_trajectory(std::ostream& out) const;

 private:
  MartingaleConfig config_;
  double log_s_ = 0.0;
  std::vector<std::pair<std::int64_t, double>> trajectory_;
};

}  // namespace drift
