#include "drift/betting.hpp"

#include <algorithm>
#include <cmath>

#include "drift/errors.hpp"

namespace drift {

namespace {
constexpr double kDensityFloor = 1e-12;
}

void CautiousConfig::validate() const {
  if (epsilon <= 0.0) throw SpecError("epsilon must be positive");
  if (window < 1) throw SpecError("window must be >= 1");
  if (sample_window < 0) throw SpecError("sample window must be >= 0");
  if (estimators.empty()) throw SpecError("at least one estimator required");
  for (const auto& e : estimators)
    if (e.param < 1) throw SpecError("estimator parameter must be >= 1");
}

CautiousConfig CautiousConfig::named(std::string_view name) {
  using Kind = EstimatorSpec::Kind;
  CautiousConfig c;
  if (name == "IH") {
    c.estimators = {{Kind::interp_hist, 15}};
  } else if (name == "MIH") {
    c.estimators = {{Kind::interp_hist, 5},
                    {Kind::interp_hist, 10},
                    {Kind::interp_hist, 15}};
  } else if (name == "MIHNN") {
    c.estimators = {{Kind::interp_hist, 5}, {Kind::interp_hist, 10},
                    {Kind::interp_hist, 15}, {Kind::knn, 5},
                    {Kind::knn, 10},         {Kind::knn, 15}};
  } else if (name == "CAU") {
    c.estimators = {{Kind::plain_hist, 15}};
  } else {
    throw SpecError("unknown betting config: " + std::string(name));
  }
  return c;
}

CautiousBetting::CautiousBetting(CautiousConfig config)
    : config_(std::move(config)) {
  config_.validate();
  shadows_.resize(config_.estimators.size());
  hists_.resize(config_.estimators.size());
  knn_norms_.assign(config_.estimators.size(), 1.0);
}

void CautiousBetting::refresh_histograms() const {
  if (!hists_dirty_) return;
  for (std::size_t j = 0; j < config_.estimators.size(); ++j) {
    const EstimatorSpec& spec = config_.estimators[j];
    if (spec.kind == EstimatorSpec::Kind::knn) {
      // Rescale the raw kNN estimate into a probability density; a zero or
      // degenerate integral (tiny samples) leaves the raw value untouched.
      const double z =
          sample_.empty() ? 0.0 : knn_density_integral(sample_, spec.param);
      knn_norms_[j] = z > 0.0 ? z : 1.0;
      continue;
    }
    if (sample_.empty()) {
      hists_[j] = InterpolatedHistogram{};
    } else {
      hists_[j] = fit_interpolated_histogram(
          sample_, spec.param, spec.kind == EstimatorSpec::Kind::interp_hist);
    }
  }
  hists_dirty_ = false;
}

double CautiousBetting::density(int j, double x) const {
  if (sample_.empty()) return 1.0;
  const EstimatorSpec& spec = config_.estimators[static_cast<std::size_t>(j)];
  double f;
  if (spec.kind == EstimatorSpec::Kind::knn) {
    refresh_histograms();
    f = knn_density_sorted(sample_, spec.param, x) /
        knn_norms_[static_cast<std::size_t>(j)];
  } else {
    refresh_histograms();
    f = hists_[static_cast<std::size_t>(j)].eval(x);
  }
  return std::max(f, kDensityFloor);
}

double CautiousBetting::shadow_ratio(int j) const {
  const Shadow& s = shadows_[static_cast<std::size_t>(j)];
  if (s.min_queue.empty()) return 1.0;  // no evidence yet
  return std::exp(s.log_s - s.min_queue.front().second);
}

BetDecision CautiousBetting::bet(double p) {
  BetDecision decision;
  double best_ratio = 0.0;
  int best = -1;
  for (int j = 0; j < estimator_count(); ++j) {
    const double ratio = shadow_ratio(j);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = j;
    }
  }
  if (best < 0 || best_ratio <= config_.epsilon) return decision;  // h = 1
  decision.active = true;
  decision.chosen = best;
  decision.value = density(best, p);
  return decision;
}

void CautiousBetting::observe(double p) {
  if (p < 0.0 || p > 1.0) throw DataError("p-value outside [0,1]");
  ++observed_;
  for (std::size_t j = 0; j < shadows_.size(); ++j) {
    Shadow& s = shadows_[j];
    s.log_s += std::log(density(static_cast<int>(j), p));
    while (!s.min_queue.empty() && s.min_queue.back().second >= s.log_s)
      s.min_queue.pop_back();
    s.min_queue.emplace_back(observed_, s.log_s);
    while (s.min_queue.front().first <= observed_ - config_.window)
      s.min_queue.pop_front();
  }
  sample_.insert(std::upper_bound(sample_.begin(), sample_.end(), p), p);
  arrival_order_.push_back(p);
  if (config_.sample_window > 0 &&
      arrival_order_.size() > static_cast<std::size_t>(config_.sample_window)) {
    const double oldest = arrival_order_.front();
    arrival_order_.pop_front();
    sample_.erase(std::lower_bound(sample_.begin(), sample_.end(), oldest));
  }
  hists_dirty_ = true;
}

void CautiousBetting::reset() {
  sample_.clear();
  arrival_order_.clear();
  observed_ = 0;
  for (auto& s : shadows_) {
    s.log_s = 0.0;
    s.min_queue.clear();
  }
  hists_dirty_ = true;
}

std::unique_ptr<BettingPolicy> make_cautious(const CautiousConfig& config) {
  return std::make_unique<CautiousBetting>(config);
}

}  // namespace drift
