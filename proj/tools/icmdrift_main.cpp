#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "drift/ensemble.hpp"
#include "drift/errors.hpp"
#include "drift/io.hpp"
#include "drift/stats.hpp"
#include "drift/stream.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ExperimentSpec {
  std::string dataset = "stagger";  // stagger | sea | path to a CSV file
  std::int64_t n = 100000;
  std::int64_t chunk_size = 10000;
  double noise = 0.0;
  std::string betting = "MIHNN";
  std::string mode = "ensemble";  // single | ensemble
  double r = 10.0;
  double delta = 0.01;
  std::vector<int> thetas = {100, 200, 300, 400, 500,
                             600, 700, 800, 900, 1000};
  std::vector<std::uint64_t> seeds = {1};
  int estimator_window = 250;    // recent p-values the estimators fit on; 0 = all
  double martingale_floor = 0.1; // lower clamp on each pipeline martingale; 0 = off
  std::string label_column;  // CSV datasets; empty = last column
  std::string out = ".";
};

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw drift::SpecError("empty list: " + text);
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (int v : parse_int_list(text)) {
    if (v < 0) throw drift::SpecError("seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

// Values present in the config file win over command-line flags.
void apply_config_file(ExperimentSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw drift::DataError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw drift::DataError("malformed config JSON in " + path + ": " + e.what());
  }
  if (j.contains("dataset")) spec.dataset = j["dataset"].get<std::string>();
  if (j.contains("n")) spec.n = j["n"].get<std::int64_t>();
  if (j.contains("chunk_size")) spec.chunk_size = j["chunk_size"].get<std::int64_t>();
  if (j.contains("noise")) spec.noise = j["noise"].get<double>();
  if (j.contains("betting")) spec.betting = j["betting"].get<std::string>();
  if (j.contains("mode")) spec.mode = j["mode"].get<std::string>();
  if (j.contains("r")) spec.r = j["r"].get<double>();
  if (j.contains("delta")) spec.delta = j["delta"].get<double>();
  if (j.contains("theta")) spec.thetas = j["theta"].get<std::vector<int>>();
  if (j.contains("seeds"))
    spec.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("estimator_window"))
    spec.estimator_window = j["estimator_window"].get<int>();
  if (j.contains("martingale_floor"))
    spec.martingale_floor = j["martingale_floor"].get<double>();
  if (j.contains("label_column"))
    spec.label_column = j["label_column"].get<std::string>();
  if (j.contains("out")) spec.out = j["out"].get<std::string>();
}

bool is_generator(const std::string& dataset) {
  return dataset == "stagger" || dataset == "sea";
}

drift::ConceptSchedule schedule_for(const ExperimentSpec& spec) {
  return drift::ConceptSchedule{{0, 1, 2, 3}, spec.chunk_size, true};
}

// For CSV datasets the schema is derived from the file: a column whose cells
// all parse as numbers is numeric, any other column is categorical with its
// levels in first-seen order.
drift::FeatureSchema csv_schema(const std::string& path,
                                std::string& label_column,
                                std::vector<std::string>& feature_columns) {
  std::ifstream in(path);
  if (!in) throw drift::DataError("cannot open dataset: " + path);
  std::string header;
  if (!std::getline(in, header)) throw drift::DataError("empty dataset: " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::vector<std::string> columns;
  std::stringstream hs(header);
  std::string cell;
  while (std::getline(hs, cell, ',')) columns.push_back(cell);
  if (columns.size() < 2)
    throw drift::DataError("dataset needs at least one feature and a label");
  if (label_column.empty()) label_column = columns.back();

  const auto is_number = [](const std::string& s) {
    if (s.empty()) return false;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size();
  };
  // First pass: which columns are numeric throughout.
  std::vector<bool> numeric(columns.size(), true);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    std::stringstream ls(line);
    for (std::size_t c = 0; std::getline(ls, cell, ',') && c < columns.size();
         ++c)
      if (numeric[c] && !is_number(cell)) numeric[c] = false;
  }
  // Second pass: level sets of the categorical columns, first-seen order.
  std::vector<std::vector<std::string>> levels(columns.size());
  in.clear();
  in.seekg(0);
  std::getline(in, line);  // skip the header again
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    std::stringstream ls(line);
    for (std::size_t c = 0; std::getline(ls, cell, ',') && c < columns.size();
         ++c)
      if (!numeric[c] &&
          std::find(levels[c].begin(), levels[c].end(), cell) ==
              levels[c].end())
        levels[c].push_back(cell);
  }

  drift::FeatureSchema schema;
  feature_columns.clear();
  bool saw_label = false;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == label_column) {
      saw_label = true;
      continue;
    }
    feature_columns.push_back(columns[c]);
    if (numeric[c]) {
      schema.attributes.push_back(
          {columns[c], drift::AttrKind::numeric, {}, -1e18, 1e18});
    } else {
      schema.attributes.push_back({columns[c], drift::AttrKind::categorical,
                                   levels[c], 0.0, 1.0});
    }
  }
  if (!saw_label)
    throw drift::DataError("label column '" + label_column + "' not in " + path);
  return schema;
}

drift::Stream materialize(const ExperimentSpec& spec, std::uint64_t seed,
                          drift::FeatureSchema& schema) {
  drift::Stream s;
  if (spec.dataset == "stagger") {
    schema = drift::stagger_schema();
    s = drift::generate_stagger(spec.n, schedule_for(spec), seed);
  } else if (spec.dataset == "sea") {
    schema = drift::sea_schema();
    s = drift::generate_sea(spec.n, schedule_for(spec), seed);
  } else {
    std::string label = spec.label_column;
    std::vector<std::string> features;
    schema = csv_schema(spec.dataset, label, features);
    s = drift::load_csv(spec.dataset, schema, label, features);
    if (spec.n > 0 && static_cast<std::int64_t>(s.size()) > spec.n)
      s.resize(static_cast<std::size_t>(spec.n));
  }
  if (spec.noise > 0.0)
    s = drift::inject_label_noise(
        s, {spec.noise, drift::derive_seed(seed, 0x4015e)});
  return s;
}

drift::EnsembleConfig ensemble_config(const ExperimentSpec& spec,
                                      std::uint64_t seed) {
  drift::EnsembleConfig cfg;
  if (spec.mode == "single")
    cfg.thetas = {spec.thetas.front()};
  else if (spec.mode == "ensemble")
    cfg.thetas = spec.thetas;
  else
    throw drift::SpecError("mode must be 'single' or 'ensemble'");
  cfg.betting = spec.betting;
  cfg.r = spec.r;
  cfg.delta = spec.delta;
  cfg.estimator_window = spec.estimator_window;
  cfg.martingale_floor = spec.martingale_floor;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

int cmd_generate(const ExperimentSpec& spec) {
  if (!is_generator(spec.dataset))
    throw drift::SpecError("generate supports datasets 'stagger' and 'sea'");
  drift::FeatureSchema schema;
  const auto stream = materialize(spec, spec.seeds.front(), schema);
  drift::write_csv(spec.out, stream, schema);
  std::cerr << "wrote " << stream.size() << " instances to " << spec.out
            << "\n";
  return 0;
}

int cmd_run(const ExperimentSpec& spec) {
  fs::create_directories(spec.out);
  std::vector<drift::RunRecord> records;
  std::vector<drift::AccuracyEstimate> estimates;
  drift::EnsembleConfig last_cfg;
  for (const std::uint64_t seed : spec.seeds) {
    drift::FeatureSchema schema;
    const auto stream = materialize(spec, seed, schema);
    const auto cfg = ensemble_config(spec, seed);
    drift::VectorSource source(stream);
    auto record = drift::run(source, cfg, schema);
    const auto est = drift::accuracy(record);

    const fs::path base = fs::path(spec.out) / ("run_" + std::to_string(seed));
    drift::write_run_record_csv(base.string() + ".csv", record);
    std::ofstream summary(base.string() + ".json");
    summary << drift::run_summary_json(record, cfg) << "\n";
    std::cerr << "seed " << seed << ": accuracy " << est.p_hat << " over "
              << est.n << " available (" << est.unavailable << " unavailable, "
              << record.alarms.size() << " alarms)\n";

    records.push_back(std::move(record));
    estimates.push_back(est);
    last_cfg = cfg;
  }
  const fs::path summary_path = fs::path(spec.out) / "summary.json";
  std::ofstream out(summary_path);
  out << drift::aggregate_summary_json(records, estimates, last_cfg) << "\n";
  std::cerr << "wrote " << summary_path.string() << "\n";
  return 0;
}

int cmd_subsets(const std::string& record_path, const std::string& out_path) {
  const auto record = drift::load_run_record_csv(record_path);
  const auto results = drift::subset_analysis(record);
  if (out_path.empty() || out_path == "-")
    drift::write_subset_csv(std::cout, results);
  else
    drift::write_subset_csv(out_path, results);
  return 0;
}

int cmd_ttest(const std::string& a_path, const std::string& b_path, double rho,
              const std::string& out_path) {
  const auto a = drift::load_accuracy_from_summary(a_path);
  const auto b = drift::load_accuracy_from_summary(b_path);
  const auto result = drift::z_test(a, b, rho);
  const std::string text = drift::hypothesis_test_json(result, a, b);
  if (out_path.empty() || out_path == "-") {
    std::cout << text << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw drift::DataError("cannot write file: " + out_path);
    out << text << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming concept-drift detection with conformal martingales"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string config_path;
  std::string record_path, summary_a, summary_b, out_path;
  double rho = -1.0;

  auto add_spec_flags = [&](CLI::App* cmd, bool full) {
    cmd->add_option("--dataset", spec.dataset,
                    "stagger | sea | path to a CSV file");
    cmd->add_option("--n", spec.n, "instances to generate or keep");
    cmd->add_option("--chunk-size", spec.chunk_size,
                    "instances per concept before drift");
    cmd->add_option("--noise", spec.noise, "label flip probability");
    cmd->add_option("--seeds", [&](const std::vector<std::string>& v) {
      spec.seeds = parse_seed_list(v.front());
      return true;
    }, "comma-separated seed list");
    cmd->add_option("--out", spec.out, "output file or directory");
    cmd->add_option("--config", config_path, "JSON config; overrides flags");
    if (!full) return;
    cmd->add_option("--betting", spec.betting, "IH | MIH | MIHNN | CAU");
    cmd->add_option("--mode", spec.mode, "single | ensemble");
    cmd->add_option("--r", spec.r, "retrain anchor threshold");
    cmd->add_option("--delta", spec.delta, "alarm significance level");
    cmd->add_option("--theta", [&](const std::vector<std::string>& v) {
      spec.thetas = parse_int_list(v.front());
      return true;
    }, "comma-separated training sizes");
    cmd->add_option("--estimator-window", spec.estimator_window,
                    "recent p-values the density estimators fit on (0 = all)");
    cmd->add_option("--martingale-floor", spec.martingale_floor,
                    "lower clamp on each pipeline's martingale (0 = off)");
    cmd->add_option("--label-column", spec.label_column,
                    "label column for CSV datasets (default: last)");
  };

  CLI::App* generate = app.add_subcommand(
      "generate", "Write a synthetic benchmark stream to CSV");
  add_spec_flags(generate, false);

  CLI::App* run = app.add_subcommand(
      "run", "Run drift-detecting classification over a stream");
  add_spec_flags(run, true);

  CLI::App* subsets = app.add_subcommand(
      "subsets", "Accuracy of every pipeline subset of a recorded run");
  subsets->add_option("--record", record_path, "run record CSV")->required();
  subsets->add_option("--out", out_path, "output CSV ('-' = stdout)");

  CLI::App* ttest = app.add_subcommand(
      "ttest", "One-tailed Z-test between two aggregate summaries");
  ttest->add_option("--a", summary_a, "summary JSON of the left side")
      ->required();
  ttest->add_option("--b", summary_b, "summary JSON of the right side")
      ->required();
  ttest->add_option("--rho", rho, "assumed correlation (default -1)");
  ttest->add_option("--out", out_path, "output JSON ('-' = stdout)");

  try {
    app.parse(argc, argv);
    if (!config_path.empty()) apply_config_file(spec, config_path);
    if (generate->parsed()) return cmd_generate(spec);
    if (run->parsed()) return cmd_run(spec);
    if (subsets->parsed()) return cmd_subsets(record_path, out_path);
    if (ttest->parsed()) return cmd_ttest(summary_a, summary_b, rho, out_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const drift::SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return 2;
  } catch (const drift::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
