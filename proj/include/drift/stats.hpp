#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drift/ensemble.hpp"

namespace drift {

struct AccuracyEstimate {
  double p_hat = 0.0;   // proportion correct over available predictions
  double n = 0.0;       // available predictions per simulation (averaged)
  int k = 1;            // simulation count
  std::int64_t unavailable = 0;
};

// Accuracy of the recorded ensemble predictions. Unavailable instances are
// excluded from both numerator and denominator and reported separately.
// Throws DataError when no prediction was available.
AccuracyEstimate accuracy(const RunRecord& record);

// Pooled estimate across simulations: total correct over total available,
// with n the average per-simulation availability.
AccuracyEstimate pool_accuracy(std::span<const AccuracyEstimate> per_run);

struct SubsetResult {
  std::uint32_t mask = 0;  // bit i set = pipeline i included
  int size = 0;
  double accuracy = 0.0;
  std::int64_t available = 0;
  std::int64_t unavailable = 0;
};

// Majority vote replayed from cached per-pipeline predictions for every
// non-empty pipeline subset (2^P - 1 of them). No re-simulation; valid
// because pipelines are mutually independent.
std::vector<SubsetResult> subset_analysis(const RunRecord& record);

// Variance of the aggregate Bernoulli mean: p(1-p)/(k*n).
double variance_of_mean(double p_hat, int k, double n);

struct HypothesisTestResult {
  double d = 0.0;      // observed accuracy difference
  double se = 0.0;     // standard error of the difference
  double z = 0.0;      // test statistic
  double rho = 0.0;    // assumed correlation between the estimates
  bool rejected = false;  // one-tailed at 95%: z >= 1.645
};

// One-tailed Z-test of H0: a <= b against H1: a > b.
HypothesisTestResult z_test(const AccuracyEstimate& a,
                            const AccuracyEstimate& b, double rho);

// Kolmogorov-Smirnov statistic of a sample against Uniform(0,1).
double ks_statistic_uniform(std::span<const double> sample);
// Asymptotic critical value at significance alpha (supported: 0.01, 0.05).
double ks_critical_value(std::size_t n, double alpha);

}  // namespace drift
