#include "drift/stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace drift {

void FeatureSchema::validate() const {
  if (attributes.empty()) throw SpecError("schema has no attributes");
  for (const auto& a : attributes) {
    if (a.kind == AttrKind::categorical) {
      if (a.levels.empty())
        throw SpecError("categorical attribute '" + a.name + "' has no levels");
    } else if (!(a.min < a.max)) {
      throw SpecError("numeric attribute '" + a.name + "' needs min < max");
    }
  }
}

void FeatureSchema::check_value(std::size_t attr_index, double value) const {
  const Attribute& a = attributes.at(attr_index);
  if (a.kind == AttrKind::categorical) {
    const auto idx = static_cast<std::int64_t>(value);
    if (idx < 0 || idx >= static_cast<std::int64_t>(a.levels.size()) ||
        static_cast<double>(idx) != value)
      throw DataError("value " + std::to_string(value) +
                      " is not a level index of '" + a.name + "'");
  } else if (value < a.min || value > a.max || !std::isfinite(value)) {
    throw DataError("value " + std::to_string(value) + " outside range of '" +
                    a.name + "'");
  }
}

void ConceptSchedule::validate() const {
  if (concepts.empty()) throw SpecError("schedule has no concepts");
  if (chunk_size < 1) throw SpecError("chunk_size must be >= 1");
}

int ConceptSchedule::concept_at(std::int64_t timestamp) const {
  const auto segment = (timestamp - 1) / chunk_size;
  const auto count = static_cast<std::int64_t>(concepts.size());
  const auto idx = cycle ? segment % count : std::min(segment, count - 1);
  return concepts[static_cast<std::size_t>(idx)];
}

// ------------------------------- STAGGER -----------------------------------

FeatureSchema stagger_schema() {
  FeatureSchema s;
  s.attributes = {
      {"size", AttrKind::categorical, {"small", "medium", "large"}, 0, 1},
      {"color", AttrKind::categorical, {"red", "green", "blue"}, 0, 1},
      {"shape", AttrKind::categorical, {"circle", "square", "triangle"}, 0, 1},
  };
  return s;
}

const StaggerRules& default_stagger_rules() {
  static const StaggerRules rules = {
      [](int size, int color, int) { return size == 0 && color == 0 ? 1 : 0; },
      [](int, int color, int shape) { return color == 1 || shape == 0 ? 1 : 0; },
      [](int size, int, int) { return size == 1 || size == 2 ? 1 : 0; },
      [](int, int color, int shape) { return color == 2 && shape == 1 ? 1 : 0; },
  };
  return rules;
}

StaggerGenerator::StaggerGenerator(std::int64_t n, ConceptSchedule schedule,
                                   std::uint64_t seed, StaggerRules rules)
    : n_(n),
      schedule_(std::move(schedule)),
      rules_(std::move(rules)),
      rng_(Rng::derive(seed, 0x5747)) {
  schedule_.validate();
  for (int c : schedule_.concepts)
    if (c < 0 || c >= static_cast<int>(rules_.size()))
      throw SpecError("schedule concept index out of range");
}

std::optional<LabeledInstance> StaggerGenerator::next() {
  if (t_ >= n_) return std::nullopt;
  ++t_;
  const int size = static_cast<int>(rng_.uniform_int(3));
  const int color = static_cast<int>(rng_.uniform_int(3));
  const int shape = static_cast<int>(rng_.uniform_int(3));
  const int active = schedule_.concept_at(t_);
  LabeledInstance z;
  z.timestamp = t_;
  z.features = {static_cast<double>(size), static_cast<double>(color),
                static_cast<double>(shape)};
  z.label = rules_[static_cast<std::size_t>(active)](size, color, shape);
  return z;
}

Stream generate_stagger(std::int64_t n, const ConceptSchedule& schedule,
                        std::uint64_t seed, const StaggerRules& rules) {
  StaggerGenerator gen(n, schedule, seed, rules);
  Stream out;
  out.reserve(static_cast<std::size_t>(n));
  while (auto z = gen.next()) out.push_back(std::move(*z));
  return out;
}

// --------------------------------- SEA -------------------------------------

FeatureSchema sea_schema() {
  FeatureSchema s;
  s.attributes = {
      {"f1", AttrKind::numeric, {}, 0.0, 10.0},
      {"f2", AttrKind::numeric, {}, 0.0, 10.0},
      {"f3", AttrKind::numeric, {}, 0.0, 10.0},
  };
  return s;
}

const std::vector<double>& default_sea_thresholds() {
  static const std::vector<double> t = {8.0, 9.0, 7.0, 9.5};
  return t;
}

SeaGenerator::SeaGenerator(std::int64_t n, ConceptSchedule schedule,
                           std::uint64_t seed, std::vector<double> thresholds)
    : n_(n),
      schedule_(std::move(schedule)),
      thresholds_(std::move(thresholds)),
      rng_(Rng::derive(seed, 0x5ea)) {
  schedule_.validate();
  for (int c : schedule_.concepts)
    if (c < 0 || c >= static_cast<int>(thresholds_.size()))
      throw SpecError("schedule concept index out of range");
}

std::optional<LabeledInstance> SeaGenerator::next() {
  if (t_ >= n_) return std::nullopt;
  ++t_;
  const double f1 = rng_.uniform(0.0, 10.0);
  const double f2 = rng_.uniform(0.0, 10.0);
  const double f3 = rng_.uniform(0.0, 10.0);
  const int active = schedule_.concept_at(t_);
  LabeledInstance z;
  z.timestamp = t_;
  z.features = {f1, f2, f3};
  z.label = (f1 + f2 <= thresholds_[static_cast<std::size_t>(active)]) ? 1 : 0;
  return z;
}

Stream generate_sea(std::int64_t n, const ConceptSchedule& schedule,
                    std::uint64_t seed, const std::vector<double>& thresholds) {
  SeaGenerator gen(n, schedule, seed, thresholds);
  Stream out;
  out.reserve(static_cast<std::size_t>(n));
  while (auto z = gen.next()) out.push_back(std::move(*z));
  return out;
}

// ------------------------------ label noise --------------------------------

namespace {
void flip_binary_label(LabeledInstance& z, double rate, Rng& rng) {
  if (z.label != 0 && z.label != 1)
    throw DataError("label noise supports binary labels only, got " +
                    std::to_string(z.label));
  const double u = rng.uniform01();  // drawn for every instance, keeps alignment
  if (u < rate) z.label = 1 - z.label;
}
}  // namespace

NoiseInjector::NoiseInjector(std::unique_ptr<StreamSource> inner, NoiseSpec spec)
    : inner_(std::move(inner)),
      spec_(spec),
      rng_(Rng::derive(spec.seed, 0x4015)) {
  if (spec_.rate < 0.0 || spec_.rate > 1.0)
    throw SpecError("noise rate must be in [0,1]");
}

std::optional<LabeledInstance> NoiseInjector::next() {
  auto z = inner_->next();
  if (z) flip_binary_label(*z, spec_.rate, rng_);
  return z;
}

Stream inject_label_noise(const Stream& in, const NoiseSpec& spec) {
  if (spec.rate < 0.0 || spec.rate > 1.0)
    throw SpecError("noise rate must be in [0,1]");
  Rng rng = Rng::derive(spec.seed, 0x4015);
  Stream out = in;
  for (auto& z : out) flip_binary_label(z, spec.rate, rng);
  return out;
}

// --------------------------------- CSV -------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_numeric(const std::string& cell, std::int64_t row,
                     const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw DataError("row " + std::to_string(row) + ": cell '" + cell +
                    "' in column '" + column + "' is not numeric");
  return v;
}

}  // namespace

Stream load_csv(const std::string& path, const FeatureSchema& schema,
                const std::string& label_column,
                const std::vector<std::string>& keep_columns,
                const std::vector<std::string>& label_levels) {
  schema.validate();
  if (keep_columns.size() != schema.attributes.size())
    throw SpecError("keep_columns must match the schema attribute count");

  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  const auto header = split_csv_line(line);

  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError("missing column '" + name + "' in " + path);
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> feature_cols;
  feature_cols.reserve(keep_columns.size());
  for (const auto& name : keep_columns) feature_cols.push_back(column_index(name));
  const std::size_t label_col = column_index(label_column);

  std::vector<std::string> labels = label_levels;
  auto label_index = [&](const std::string& value, std::int64_t row) -> int {
    const auto it = std::find(labels.begin(), labels.end(), value);
    if (it != labels.end()) return static_cast<int>(it - labels.begin());
    if (!label_levels.empty())
      throw DataError("row " + std::to_string(row) + ": unknown label '" +
                      value + "'");
    labels.push_back(value);
    return static_cast<int>(labels.size()) - 1;
  };

  Stream out;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() < header.size())
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    LabeledInstance z;
    z.timestamp = row;
    z.features.reserve(feature_cols.size());
    for (std::size_t a = 0; a < feature_cols.size(); ++a) {
      const Attribute& attr = schema.attributes[a];
      const std::string& cell = cells[feature_cols[a]];
      if (attr.kind == AttrKind::numeric) {
        z.features.push_back(parse_numeric(cell, row, keep_columns[a]));
      } else {
        const auto it = std::find(attr.levels.begin(), attr.levels.end(), cell);
        if (it == attr.levels.end())
          throw DataError("row " + std::to_string(row) + ": value '" + cell +
                          "' is not a level of '" + attr.name + "'");
        z.features.push_back(static_cast<double>(it - attr.levels.begin()));
      }
    }
    z.label = label_index(cells[label_col], row);
    out.push_back(std::move(z));
  }
  return out;
}

void write_csv(std::ostream& out, const Stream& stream,
               const FeatureSchema& schema) {
  for (std::size_t a = 0; a < schema.attributes.size(); ++a)
    out << schema.attributes[a].name << ',';
  out << "label\n";
  std::ostringstream fmt;
  fmt.precision(17);
  for (const auto& z : stream) {
    fmt.str({});
    for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
      const Attribute& attr = schema.attributes[a];
      if (attr.kind == AttrKind::categorical)
        fmt << attr.levels[static_cast<std::size_t>(z.features[a])];
      else
        fmt << z.features[a];
      fmt << ',';
    }
    fmt << z.label << '\n';
    out << fmt.str();
  }
}

void write_csv(const std::string& path, const Stream& stream,
               const FeatureSchema& schema) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  write_csv(out, stream, schema);
}

}  // namespace drift
