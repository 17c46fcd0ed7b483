#include "drift/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "drift/errors.hpp"

namespace drift {

void MartingaleConfig::validate() const {
  if (delta <= 0.0 || delta >= 1.0) throw SpecError("delta must be in (0,1)");
  if (r <= 1.0) throw SpecError("anchor threshold r must be > 1");
  if (trajectory_cap < 2) throw SpecError("trajectory cap too small");
  if (floor < 0.0 || floor > 1.0)
    throw SpecError("martingale floor must be in [0,1]");
}

Martingale::Martingale(MartingaleConfig config) : config_(config) {
  config_.validate();
}

void Martingale::update(double bet_value, std::int64_t timestamp) {
  if (!(bet_value > 0.0)) throw DataError("bet value must be positive");
  log_s_ += std::log(bet_value);
  if (config_.floor > 0.0)
    log_s_ = std::max(log_s_, std::log(config_.floor));
  trajectory_.emplace_back(timestamp, log_s_);
  if (trajectory_.size() > config_.trajectory_cap) {
    // The anchor search only needs the suffix since the last time S was
    // below r; drop everything before that point.
    const double log_r = std::log(config_.r);
    auto it = std::find_if(trajectory_.rbegin(), trajectory_.rend(),
                           [&](const auto& e) { return e.second < log_r; });
    const std::size_t keep_from =
        it == trajectory_.rend()
            ? trajectory_.size() / 2
            : trajectory_.size() - 1 -
                  static_cast<std::size_t>(it - trajectory_.rbegin());
    if (keep_from > 0)
      trajectory_.erase(trajectory_.begin(),
                        trajectory_.begin() + static_cast<std::ptrdiff_t>(keep_from));
  }
}

bool Martingale::alarming() const { return log_s_ > -std::log(config_.delta); }

std::optional<AlarmEvent> Martingale::check_alarm() const {
  if (!alarming()) return std::nullopt;
  AlarmEvent e;
  e.at = trajectory_.empty() ? 0 : trajectory_.back().first;
  e.log_s = log_s_;
  e.anchor = retrain_anchor();
  return e;
}

std::int64_t Martingale::retrain_anchor() const {
  if (trajectory_.empty()) throw DataError("anchor of an empty trajectory");
  const double log_r = std::log(config_.r);
  for (auto it = trajectory_.rbegin(); it != trajectory_.rend(); ++it)
    if (it->second < log_r) return it->first + 1;
  return trajectory_.front().first;
}

void Martingale::reset() {
  log_s_ = 0.0;
  trajectory_.clear();
}

double Martingale::value() const { return std::exp(log_s_); }

void Martingale::export_trajectory(std::ostream& out) const {
  out << "timestamp,log_s\n";
  for (const auto& [t, s] : trajectory_) out << t << ',' << s << '\n';
}

}  // namespace drift
