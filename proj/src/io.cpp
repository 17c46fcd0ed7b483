#include "drift/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "drift/errors.hpp"

namespace drift {

using nlohmann::json;

void write_run_record_csv(std::ostream& out, const RunRecord& record) {
  const int pipelines = record.pipeline_count();
  out << "timestamp,true_label,ensemble_pred";
  for (int i = 0; i < pipelines; ++i)
    out << ",p" << i << "_pred,p" << i << "_conf";
  out << ",alarms\n";

  std::map<std::int64_t, std::vector<int>> alarms_at;
  for (const AlarmRecord& a : record.alarms)
    alarms_at[a.at].push_back(a.pipeline);

  for (std::size_t t = 0; t < record.size(); ++t) {
    out << record.timestamps[t] << ',' << record.true_labels[t] << ',';
    if (record.ensemble_pred[t] < 0)
      out << "NA";
    else
      out << record.ensemble_pred[t];
    for (int i = 0; i < pipelines; ++i) {
      const int pred = record.pipeline_pred[static_cast<std::size_t>(i)][t];
      if (pred < 0)
        out << ",NA,NA";
      else
        out << ',' << pred << ','
            << record.pipeline_conf[static_cast<std::size_t>(i)][t];
    }
    out << ',';
    if (const auto it = alarms_at.find(record.timestamps[t]);
        it != alarms_at.end()) {
      for (std::size_t j = 0; j < it->second.size(); ++j) {
        if (j) out << ';';
        out << it->second[j];
      }
    }
    out << '\n';
  }
}

void write_run_record_csv(const std::string& path, const RunRecord& record) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  write_run_record_csv(out, record);
}

RunRecord load_run_record_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);

  // header: timestamp,true_label,ensemble_pred,p0_pred,p0_conf,...,alarms
  int pipelines = 0;
  {
    std::stringstream hs(line);
    std::string cell;
    int cells = 0;
    while (std::getline(hs, cell, ',')) ++cells;
    pipelines = (cells - 4) / 2;
    if (cells != 4 + 2 * pipelines)
      throw DataError("malformed run record header in " + path);
  }

  RunRecord record;
  record.pipeline_pred.resize(static_cast<std::size_t>(pipelines));
  record.pipeline_conf.resize(static_cast<std::size_t>(pipelines));
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (static_cast<int>(cells.size()) != 4 + 2 * pipelines)
      throw DataError("row " + std::to_string(row) + ": malformed run record");
    record.timestamps.push_back(std::stoll(cells[0]));
    record.true_labels.push_back(std::stoi(cells[1]));
    record.ensemble_pred.push_back(cells[2] == "NA" ? -1 : std::stoi(cells[2]));
    for (int i = 0; i < pipelines; ++i) {
      const std::string& pred = cells[static_cast<std::size_t>(3 + 2 * i)];
      const std::string& conf = cells[static_cast<std::size_t>(4 + 2 * i)];
      record.pipeline_pred[static_cast<std::size_t>(i)].push_back(
          pred == "NA" ? -1 : std::stoi(pred));
      record.pipeline_conf[static_cast<std::size_t>(i)].push_back(
          conf == "NA" ? 0.0f : std::stof(conf));
    }
    const std::string& alarm_cell = cells.back();
    if (!alarm_cell.empty()) {
      std::stringstream as(alarm_cell);
      std::string p;
      while (std::getline(as, p, ';'))
        record.alarms.push_back({record.timestamps.back(), std::stoi(p), 0.0, 0});
    }
  }
  return record;
}

namespace {

json config_json(const EnsembleConfig& config) {
  return json{{"thetas", config.thetas},
              {"betting", config.betting},
              {"r", config.r},
              {"delta", config.delta},
              {"epsilon", config.epsilon},
              {"window", config.window},
              {"estimator_window", config.estimator_window},
              {"martingale_floor", config.martingale_floor},
              {"tree_count", config.tree_count},
              {"seed", config.seed},
              {"buffer_cap", config.buffer_cap}};
}

json alarms_per_pipeline(const RunRecord& record) {
  std::vector<int> counts(static_cast<std::size_t>(record.pipeline_count()), 0);
  for (const AlarmRecord& a : record.alarms)
    ++counts[static_cast<std::size_t>(a.pipeline)];
  return json(counts);
}

}  // namespace

std::string run_summary_json(const RunRecord& record,
                             const EnsembleConfig& config) {
  const AccuracyEstimate est = accuracy(record);
  json j{{"config", config_json(config)},
         {"seed", record.seed},
         {"instances", record.size()},
         {"accuracy", est.p_hat},
         {"available", est.n},
         {"unavailable", est.unavailable},
         {"alarms", record.alarms.size()},
         {"alarms_per_pipeline", alarms_per_pipeline(record)}};
  return j.dump(2);
}

std::string aggregate_summary_json(std::span<const RunRecord> records,
                                   std::span<const AccuracyEstimate> estimates,
                                   const EnsembleConfig& config) {
  const AccuracyEstimate pooled = pool_accuracy(estimates);
  json runs = json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    runs.push_back(json{{"seed", records[i].seed},
                        {"accuracy", estimates[i].p_hat},
                        {"available", estimates[i].n},
                        {"unavailable", estimates[i].unavailable},
                        {"alarms", records[i].alarms.size()}});
  }
  json j{{"config", config_json(config)},
         {"k", pooled.k},
         {"n", pooled.n},
         {"accuracy", pooled.p_hat},
         {"unavailable_total", pooled.unavailable},
         {"runs", runs}};
  return j.dump(2);
}

void write_subset_csv(std::ostream& out, std::span<const SubsetResult> results) {
  out << "size,mask,accuracy,available,unavailable\n";
  for (const SubsetResult& r : results)
    out << r.size << ',' << r.mask << ',' << r.accuracy << ',' << r.available
        << ',' << r.unavailable << '\n';
}

void write_subset_csv(const std::string& path,
                      std::span<const SubsetResult> results) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  write_subset_csv(out, results);
}

std::string hypothesis_test_json(const HypothesisTestResult& result,
                                 const AccuracyEstimate& a,
                                 const AccuracyEstimate& b) {
  json j{{"a", {{"p_hat", a.p_hat}, {"k", a.k}, {"n", a.n}}},
         {"b", {{"p_hat", b.p_hat}, {"k", b.k}, {"n", b.n}}},
         {"rho", result.rho},
         {"d", result.d},
         {"var_a", variance_of_mean(a.p_hat, a.k, a.n)},
         {"var_b", variance_of_mean(b.p_hat, b.k, b.n)},
         {"se", result.se},
         {"z", result.z},
         {"critical_value", 1.645},
         {"rejected", result.rejected}};
  return j.dump(2);
}

AccuracyEstimate load_accuracy_from_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed summary JSON in " + path + ": " + e.what());
  }
  AccuracyEstimate est;
  try {
    est.p_hat = j.at("accuracy").get<double>();
    est.k = j.at("k").get<int>();
    est.n = j.at("n").get<double>();
  } catch (const json::exception& e) {
    throw DataError("summary " + path + " lacks accuracy/k/n: " + e.what());
  }
  return est;
}

}  // namespace drift
