#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "drift/betting.hpp"
#include "drift/conformal.hpp"
#include "drift/forest.hpp"
#include "drift/martingale.hpp"
#include "drift/stream.hpp"

namespace drift {

struct EnsembleConfig {
  std::vector<int> thetas = {100, 200, 300, 400, 500,
                             600, 700, 800, 900, 1000};
  std::string betting = "MIHNN";  // IH | MIH | MIHNN | CAU
  double r = 10.0;
  double delta = 0.01;
  double epsilon = 100.0;
  int window = 5000;
  // Number of recent p-values the betting estimators are fitted on
  // (Alg. 2's L); 0 = everything since the pipeline's last retraining.
  int estimator_window = 250;
  // Clamp each pipeline's martingale from below, so stretches of losing bets
  // cannot delay the next detection. The ensemble absorbs the extra false
  // alarms this allows: an alarmed pipeline merely retrains on recent data
  // while the others keep voting. 0 disables the clamp.
  double martingale_floor = 0.1;
  int tree_count = 40;
  std::uint64_t seed = 1;
  // Instances kept reachable behind the newest timestamp for retraining.
  std::int64_t buffer_cap = 50000;

  void validate() const;
};

enum class PipelineStatus { awaiting_training, active };

struct AlarmRecord {
  std::int64_t at = 0;
  int pipeline = 0;
  double log_s = 0.0;
  std::int64_t anchor = 0;
};

struct RetrainRecord {
  std::int64_t at = 0;      // step at which the model was rebuilt
  int pipeline = 0;
  std::int64_t train_from = 0;  // training window [train_from, train_from+theta)
};

struct Vote {
  int pipeline = 0;
  int label = 0;
  double confidence = 0.0;  // posterior of the voted label
};

struct VoteResult {
  std::optional<int> prediction;  // nullopt = unavailable
  std::vector<Vote> voters;
  std::vector<AlarmRecord> alarms;
  std::vector<int> retrained;
};

// Per-instance, per-pipeline outcome of a whole run.
struct RunRecord {
  std::vector<std::int64_t> timestamps;
  std::vector<int> true_labels;
  std::vector<int> ensemble_pred;              // -1 = unavailable
  std::vector<std::vector<int>> pipeline_pred; // [pipeline][t], -1 = unavailable
  std::vector<std::vector<float>> pipeline_conf;  // posterior of predicted label
  std::vector<AlarmRecord> alarms;
  std::vector<RetrainRecord> retrains;
  std::vector<int> thetas;
  std::string betting;
  std::uint64_t seed = 0;

  std::size_t size() const { return true_labels.size(); }
  int pipeline_count() const { return static_cast<int>(pipeline_pred.size()); }
};

// Modal class over the votes; ties broken toward the class with the larger
// mean confidence among its voters, then toward the smaller class id.
// Empty input yields no prediction.
std::optional<int> majority_vote(std::span<const Vote> votes);

class Ensemble {
 public:
  using BettingFactory = std::function<std::unique_ptr<BettingPolicy>(int pipeline)>;

  Ensemble(EnsembleConfig config, FeatureSchema schema,
           BettingFactory betting_factory = nullptr);

  // Process one instance: active pipelines predict before the label is used,
  // then score, p-value, bet and martingale update; alarms anchor a backward
  // retraining window; awaiting pipelines retrain once the window is covered.
  VoteResult step(const LabeledInstance& z);

  struct PipelineView {
    int index;
    int theta;
    PipelineStatus status;
    std::int64_t pending_anchor;  // d
    int score_history_size;
    double martingale_log_s;
    int retrain_count;
  };
  PipelineView pipeline(int index) const;
  int pipeline_count() const { return static_cast<int>(pipelines_.size()); }
  const EnsembleConfig& config() const { return config_; }

 private:
  struct Pipeline {
    int index = 0;
    int theta = 0;
    PipelineStatus status = PipelineStatus::awaiting_training;
    std::int64_t anchor = 1;  // pending training-start timestamp d
    std::optional<ForestModel> model;
    ScoreHistory scores;
    std::unique_ptr<BettingPolicy> betting;
    Martingale martingale;
    Rng tiebreak;
    int retrain_count = 0;

    Pipeline(int idx, int theta_, MartingaleConfig mc,
             std::unique_ptr<BettingPolicy> bp, Rng tb)
        : index(idx),
          theta(theta_),
          betting(std::move(bp)),
          martingale(mc),
          tiebreak(tb) {}
  };

  const LabeledInstance& buffered(std::int64_t timestamp) const;
  void retrain(Pipeline& p, std::int64_t now, std::vector<int>& retrained,
               std::vector<RetrainRecord>* retrain_log);

  EnsembleConfig config_;
  FeatureSchema schema_;
  std::vector<Pipeline> pipelines_;
  std::deque<LabeledInstance> buffer_;
  std::int64_t buffer_base_ = 1;  // timestamp of buffer_.front()
  std::int64_t last_timestamp_ = 0;

 public:
  // Optional sink for retrain events during step(); used by run().
  std::vector<RetrainRecord>* retrain_log = nullptr;
};

// Whole-stream driver. Deterministic given config.seed.
RunRecord run(StreamSource& stream, const EnsembleConfig& config,
              const FeatureSchema& schema,
              Ensemble::BettingFactory betting_factory = nullptr);

}  // namespace drift
