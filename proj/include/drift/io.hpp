#pragma once

#include <iosfwd>
#include <string>

#include "drift/ensemble.hpp"
#include "drift/stats.hpp"

namespace drift {

// Run record CSV: timestamp, true label, ensemble prediction (NA when
// unavailable), per-pipeline prediction and confidence, alarm flag.
void write_run_record_csv(std::ostream& out, const RunRecord& record);
void write_run_record_csv(const std::string& path, const RunRecord& record);
RunRecord load_run_record_csv(const std::string& path);

// JSON run summary: config echo, accuracy, availability, alarms per pipeline.
std::string run_summary_json(const RunRecord& record,
                             const EnsembleConfig& config);
// Aggregate summary across seeds of the same spec.
std::string aggregate_summary_json(std::span<const RunRecord> records,
                                   std::span<const AccuracyEstimate> estimates,
                                   const EnsembleConfig& config);

// Per-subset table: size, subset bitmask, accuracy, unavailable count.
void write_subset_csv(std::ostream& out, std::span<const SubsetResult> results);
void write_subset_csv(const std::string& path,
                      std::span<const SubsetResult> results);

std::string hypothesis_test_json(const HypothesisTestResult& result,
                                 const AccuracyEstimate& a,
                                 const AccuracyEstimate& b);

// Reads (p_hat, k, n) from a summary JSON produced by aggregate_summary_json.
AccuracyEstimate load_accuracy_from_summary(const std::string& path);

}  // namespace drift
