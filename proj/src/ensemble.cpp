#include "drift/ensemble.hpp"

#include <algorithm>
#include <map>

#include "drift/errors.hpp"

namespace drift {

void EnsembleConfig::validate() const {
  if (thetas.empty()) throw SpecError("at least one pipeline required");
  for (int t : thetas)
    if (t < 1) throw SpecError("training size theta must be >= 1");
  if (r <= 1.0) throw SpecError("anchor threshold r must be > 1");
  if (delta <= 0.0 || delta >= 1.0) throw SpecError("delta must be in (0,1)");
  if (tree_count < 1) throw SpecError("tree_count must be >= 1");
  if (buffer_cap < 1) throw SpecError("buffer_cap must be >= 1");
  if (estimator_window < 0) throw SpecError("estimator_window must be >= 0");
  if (martingale_floor < 0.0 || martingale_floor > 1.0)
    throw SpecError("martingale_floor must be in [0,1]");
  CautiousConfig::named(betting);  // throws on unknown name
}

std::optional<int> majority_vote(std::span<const Vote> votes) {
  if (votes.empty()) return std::nullopt;
  std::map<int, std::pair<int, double>> tally;  // label -> (count, conf sum)
  for (const Vote& v : votes) {
    auto& [count, conf] = tally[v.label];
    ++count;
    conf += v.confidence;
  }
  int best_label = -1;
  int best_count = 0;
  double best_mean_conf = -1.0;
  for (const auto& [label, entry] : tally) {
    const auto& [count, conf_sum] = entry;
    const double mean_conf = conf_sum / count;
    // map iteration is ordered, so on full ties the smaller label wins
    if (count > best_count ||
        (count == best_count && mean_conf > best_mean_conf)) {
      best_label = label;
      best_count = count;
      best_mean_conf = mean_conf;
    }
  }
  return best_label;
}

Ensemble::Ensemble(EnsembleConfig config, FeatureSchema schema,
                   BettingFactory betting_factory)
    : config_(std::move(config)), schema_(std::move(schema)) {
  config_.validate();
  schema_.validate();
  MartingaleConfig mc;
  mc.delta = config_.delta;
  mc.r = config_.r;
  mc.floor = config_.martingale_floor;
  CautiousConfig bc = CautiousConfig::named(config_.betting);
  bc.epsilon = config_.epsilon;
  bc.window = config_.window;
  bc.sample_window = config_.estimator_window;
  pipelines_.reserve(config_.thetas.size());
  for (std::size_t i = 0; i < config_.thetas.size(); ++i) {
    auto policy = betting_factory ? betting_factory(static_cast<int>(i))
                                  : make_cautious(bc);
    pipelines_.emplace_back(
        static_cast<int>(i), config_.thetas[i], mc, std::move(policy),
        Rng::derive(config_.seed, 0x7e1 + i));
  }
}

const LabeledInstance& Ensemble::buffered(std::int64_t timestamp) const {
  const auto off = timestamp - buffer_base_;
  if (off < 0 || off >= static_cast<std::int64_t>(buffer_.size()))
    throw DataError("timestamp " + std::to_string(timestamp) +
                    " not covered by the instance buffer");
  return buffer_[static_cast<std::size_t>(off)];
}

void Ensemble::retrain(Pipeline& p, std::int64_t now,
                       std::vector<int>& retrained,
                       std::vector<RetrainRecord>* retrain_sink) {
  std::vector<LabeledInstance> window;
  window.reserve(static_cast<std::size_t>(p.theta));
  for (std::int64_t t = p.anchor; t < p.anchor + p.theta; ++t)
    window.push_back(buffered(t));
  const std::uint64_t model_seed =
      derive_seed(config_.seed, 0xf0e0'0000ULL +
                                    static_cast<std::uint64_t>(p.index) * 65536 +
                                    static_cast<std::uint64_t>(p.retrain_count));
  p.model = ForestModel::train(window, config_.tree_count, model_seed, schema_);
  p.status = PipelineStatus::active;
  ++p.retrain_count;
  retrained.push_back(p.index);
  if (retrain_sink)
    retrain_sink->push_back({now, p.index, p.anchor});
}

VoteResult Ensemble::step(const LabeledInstance& z) {
  if (z.timestamp <= last_timestamp_)
    throw DataError("out-of-order timestamp " + std::to_string(z.timestamp));
  if (last_timestamp_ != 0 && z.timestamp != last_timestamp_ + 1)
    throw DataError("timestamp gap before " + std::to_string(z.timestamp));
  if (last_timestamp_ == 0) {
    buffer_base_ = z.timestamp;
    for (Pipeline& p : pipelines_) p.anchor = z.timestamp;  // cold-start d
  }
  last_timestamp_ = z.timestamp;

  buffer_.push_back(z);
  const std::int64_t max_theta =
      *std::max_element(config_.thetas.begin(), config_.thetas.end());
  while (static_cast<std::int64_t>(buffer_.size()) >
         config_.buffer_cap + max_theta) {
    buffer_.pop_front();
    ++buffer_base_;
  }

  VoteResult result;
  std::vector<Vote> votes;
  votes.reserve(pipelines_.size());

  for (Pipeline& p : pipelines_) {
    if (p.status != PipelineStatus::active) continue;
    // Predict before consuming the true label.
    const auto posterior = p.model->predict_posterior(z.features);
    int predicted = 0;
    for (int c = 1; c < p.model->num_classes(); ++c)
      if (posterior[static_cast<std::size_t>(c)] >
          posterior[static_cast<std::size_t>(predicted)])
        predicted = c;
    votes.push_back(
        {p.index, predicted, posterior[static_cast<std::size_t>(predicted)]});

    // Conformal update from the revealed label.
    const double alpha = nonconformity(posterior, z.label);
    p.scores.add(alpha);
    const double pv = p.scores.pvalue(alpha, p.tiebreak.uniform01());
    const BetDecision bet = p.betting->bet(pv);
    p.martingale.update(bet.value, z.timestamp);
    p.betting->observe(pv);

    if (p.martingale.alarming()) {
      AlarmRecord alarm;
      alarm.at = z.timestamp;
      alarm.pipeline = p.index;
      alarm.log_s = p.martingale.log_s();
      alarm.anchor = std::max(p.martingale.retrain_anchor(), buffer_base_);
      result.alarms.push_back(alarm);
      p.status = PipelineStatus::awaiting_training;
      p.anchor = alarm.anchor;
      p.scores.clear();
      p.martingale.reset();
      p.betting->reset();
    }
  }

  // Retraining pass; covers pipelines that alarmed this very step.
  for (Pipeline& p : pipelines_) {
    if (p.status != PipelineStatus::awaiting_training) continue;
    if (p.anchor < buffer_base_) p.anchor = buffer_base_;  // buffer underrun
    if (z.timestamp >= p.anchor + p.theta - 1)
      retrain(p, z.timestamp, result.retrained, retrain_log);
  }

  result.voters = votes;
  result.prediction = majority_vote(votes);
  return result;
}

Ensemble::PipelineView Ensemble::pipeline(int index) const {
  const Pipeline& p = pipelines_.at(static_cast<std::size_t>(index));
  return {p.index,          p.theta,
          p.status,         p.anchor,
          p.scores.size(),  p.martingale.log_s(),
          p.retrain_count};
}

RunRecord run(StreamSource& stream, const EnsembleConfig& config,
              const FeatureSchema& schema,
              Ensemble::BettingFactory betting_factory) {
  Ensemble ensemble(config, schema, std::move(betting_factory));
  RunRecord record;
  record.thetas = config.thetas;
  record.betting = config.betting;
  record.seed = config.seed;
  record.pipeline_pred.resize(config.thetas.size());
  record.pipeline_conf.resize(config.thetas.size());
  ensemble.retrain_log = &record.retrains;

  std::vector<int> step_pred(config.thetas.size());
  std::vector<float> step_conf(config.thetas.size());
  while (auto z = stream.next()) {
    const VoteResult vote = ensemble.step(*z);
    record.timestamps.push_back(z->timestamp);
    record.true_labels.push_back(z->label);
    record.ensemble_pred.push_back(vote.prediction.value_or(-1));
    std::fill(step_pred.begin(), step_pred.end(), -1);
    std::fill(step_conf.begin(), step_conf.end(), 0.0f);
    for (const Vote& v : vote.voters) {
      step_pred[static_cast<std::size_t>(v.pipeline)] = v.label;
      step_conf[static_cast<std::size_t>(v.pipeline)] =
          static_cast<float>(v.confidence);
    }
    for (std::size_t i = 0; i < step_pred.size(); ++i) {
      record.pipeline_pred[i].push_back(step_pred[i]);
      record.pipeline_conf[i].push_back(step_conf[i]);
    }
    for (const AlarmRecord& a : vote.alarms) record.alarms.push_back(a);
  }
  ensemble.retrain_log = nullptr;
  return record;
}

}  // namespace drift
