#include "drift/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "drift/errors.hpp"

namespace drift {

AccuracyEstimate accuracy(const RunRecord& record) {
  if (record.size() == 0) throw DataError("empty run record");
  std::int64_t correct = 0;
  std::int64_t available = 0;
  for (std::size_t t = 0; t < record.size(); ++t) {
    if (record.ensemble_pred[t] < 0) continue;
    ++available;
    if (record.ensemble_pred[t] == record.true_labels[t]) ++correct;
  }
  if (available == 0) throw DataError("no available predictions");
  AccuracyEstimate est;
  est.p_hat = static_cast<double>(correct) / static_cast<double>(available);
  est.n = static_cast<double>(available);
  est.k = 1;
  est.unavailable = static_cast<std::int64_t>(record.size()) - available;
  return est;
}

AccuracyEstimate pool_accuracy(std::span<const AccuracyEstimate> per_run) {
  if (per_run.empty()) throw DataError("no estimates to pool");
  double correct = 0.0;
  double n_total = 0.0;
  std::int64_t unavailable = 0;
  for (const auto& e : per_run) {
    correct += e.p_hat * e.n * e.k;
    n_total += e.n * e.k;
    unavailable += e.unavailable;
  }
  AccuracyEstimate pooled;
  pooled.k = 0;
  for (const auto& e : per_run) pooled.k += e.k;
  pooled.p_hat = correct / n_total;
  pooled.n = n_total / pooled.k;  // average availability per simulation
  pooled.unavailable = unavailable;
  return pooled;
}

std::vector<SubsetResult> subset_analysis(const RunRecord& record) {
  const int pipelines = record.pipeline_count();
  if (pipelines < 1 || pipelines > 20)
    throw SpecError("subset analysis supports 1..20 pipelines");
  const std::uint32_t full = (1u << pipelines) - 1u;
  std::vector<SubsetResult> results;
  results.reserve(full);

  std::vector<Vote> votes;
  votes.reserve(static_cast<std::size_t>(pipelines));
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    SubsetResult r;
    r.mask = mask;
    r.size = std::popcount(mask);
    std::int64_t correct = 0;
    for (std::size_t t = 0; t < record.size(); ++t) {
      votes.clear();
      for (int i = 0; i < pipelines; ++i) {
        if (!(mask & (1u << i))) continue;
        const int pred = record.pipeline_pred[static_cast<std::size_t>(i)][t];
        if (pred < 0) continue;
        votes.push_back(
            {i, pred,
             static_cast<double>(
                 record.pipeline_conf[static_cast<std::size_t>(i)][t])});
      }
      const auto prediction = majority_vote(votes);
      if (!prediction) {
        ++r.unavailable;
        continue;
      }
      ++r.available;
      if (*prediction == record.true_labels[t]) ++correct;
    }
    r.accuracy = r.available > 0
                     ? static_cast<double>(correct) / static_cast<double>(r.available)
                     : 0.0;
    results.push_back(r);
  }
  return results;
}

double variance_of_mean(double p_hat, int k, double n) {
  if (p_hat < 0.0 || p_hat > 1.0) throw SpecError("p_hat must be in [0,1]");
  if (k < 1 || !(n >= 1.0)) throw SpecError("k*n must be >= 1");
  return p_hat * (1.0 - p_hat) / (k * n);
}

HypothesisTestResult z_test(const AccuracyEstimate& a,
                            const AccuracyEstimate& b, double rho) {
  if (rho < -1.0 || rho > 1.0) throw SpecError("rho must be in [-1,1]");
  const double var_a = variance_of_mean(a.p_hat, a.k, a.n);
  const double var_b = variance_of_mean(b.p_hat, b.k, b.n);
  HypothesisTestResult result;
  result.rho = rho;
  result.d = a.p_hat - b.p_hat;
  const double se_sq = var_a + var_b - 2.0 * rho * std::sqrt(var_a * var_b);
  result.se = std::sqrt(std::max(se_sq, 0.0));
  if (result.se == 0.0) throw DataError("undefined test: zero standard error");
  result.z = result.d / result.se;
  result.rejected = result.z >= 1.645;
  return result;
}

double ks_statistic_uniform(std::span<const double> sample) {
  if (sample.empty()) throw DataError("KS statistic of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = sorted[i];  // Uniform(0,1)
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  double k_alpha;
  if (alpha == 0.01)
    k_alpha = 1.62762;
  else if (alpha == 0.05)
    k_alpha = 1.35810;
  else
    throw SpecError("unsupported KS significance level");
  return k_alpha / std::sqrt(static_cast<double>(n));
}

}  // namespace drift
