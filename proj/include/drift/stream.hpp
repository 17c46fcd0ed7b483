#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "drift/errors.hpp"
#include "drift/rng.hpp"

namespace drift {

enum class AttrKind { categorical, numeric };

struct Attribute {
  std::string name;
  AttrKind kind = AttrKind::numeric;
  std::vector<std::string> levels;  // categorical only
  double min = 0.0;                 // numeric only
  double max = 1.0;
};

struct FeatureSchema {
  std::vector<Attribute> attributes;

  void validate() const;
  // Throws DataError if a value does not conform to the attribute.
  void check_value(std::size_t attr_index, double value) const;
};

struct LabeledInstance {
  std::int64_t timestamp = 0;  // ordinal, >= 1, strictly increasing
  std::vector<double> features;  // categorical values stored as level indices
  int label = 0;
};

struct ConceptSchedule {
  std::vector<int> concepts;  // indices into the generator's rule table
  std::int64_t chunk_size = 1;
  bool cycle = false;

  void validate() const;
  int concept_at(std::int64_t timestamp) const;  // timestamp >= 1
};

struct NoiseSpec {
  double rate = 0.0;  // per-instance flip probability
  std::uint64_t seed = 0;
};

// Pull-based, single-consumer instance source.
class StreamSource {
 public:
  virtual ~StreamSource() = default;
  virtual std::optional<LabeledInstance> next() = 0;
};

using Stream = std::vector<LabeledInstance>;

class VectorSource : public StreamSource {
 public:
  explicit VectorSource(Stream s) : data_(std::move(s)) {}
  std::optional<LabeledInstance> next() override {
    if (pos_ >= data_.size()) return std::nullopt;
    return data_[pos_++];
  }

 private:
  Stream data_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// STAGGER: three categorical attributes (size, color, shape), binary label.
// Rule indices 0..3. The classic benchmark defines three rules; the fourth is
// a documented extension (color=blue and shape=square) so four-concept
// schedules are expressible. Rules are replaceable via StaggerRules.
// ---------------------------------------------------------------------------

// size: 0=small 1=medium 2=large; color: 0=red 1=green 2=blue;
// shape: 0=circle 1=square 2=triangle.
using StaggerRule = std::function<int(int size, int color, int shape)>;
using StaggerRules = std::vector<StaggerRule>;

FeatureSchema stagger_schema();
const StaggerRules& default_stagger_rules();

class StaggerGenerator : public StreamSource {
 public:
  StaggerGenerator(std::int64_t n, ConceptSchedule schedule, std::uint64_t seed,
                   StaggerRules rules = default_stagger_rules());
  std::optional<LabeledInstance> next() override;

 private:
  std::int64_t n_;
  std::int64_t t_ = 0;
  ConceptSchedule schedule_;
  StaggerRules rules_;
  Rng rng_;
};

Stream generate_stagger(std::int64_t n, const ConceptSchedule& schedule,
                        std::uint64_t seed,
                        const StaggerRules& rules = default_stagger_rules());

// ---------------------------------------------------------------------------
// SEA: three numeric attributes uniform on [0,10]; label 1 iff f1+f2 <= the
// active concept's threshold. Default thresholds follow the canonical
// generator: 8, 9, 7, 9.5 for concepts a..d.
// ---------------------------------------------------------------------------

FeatureSchema sea_schema();
const std::vector<double>& default_sea_thresholds();

class SeaGenerator : public StreamSource {
 public:
  SeaGenerator(std::int64_t n, ConceptSchedule schedule, std::uint64_t seed,
               std::vector<double> thresholds = default_sea_thresholds());
  std::optional<LabeledInstance> next() override;

 private:
  std::int64_t n_;
  std::int64_t t_ = 0;
  ConceptSchedule schedule_;
  std::vector<double> thresholds_;
  Rng rng_;
};

Stream generate_sea(std::int64_t n, const ConceptSchedule& schedule,
                    std::uint64_t seed,
                    const std::vector<double>& thresholds = default_sea_thresholds());

// ---------------------------------------------------------------------------
// Label noise: each binary label flipped independently with probability rate.
// ---------------------------------------------------------------------------

class NoiseInjector : public StreamSource {
 public:
  NoiseInjector(std::unique_ptr<StreamSource> inner, NoiseSpec spec);
  std::optional<LabeledInstance> next() override;

 private:
  std::unique_ptr<StreamSource> inner_;
  NoiseSpec spec_;
  Rng rng_;
};

Stream inject_label_noise(const Stream& in, const NoiseSpec& spec);

// ---------------------------------------------------------------------------
// CSV ingestion / export. Comma-separated, header row required, UTF-8,
// '.' decimal separator. Rows are kept in file order.
// ---------------------------------------------------------------------------

// keep_columns name the feature columns, in schema order. Label values are
// resolved against label_levels when given, otherwise indexed in first-seen
// order. Parse failures report the 1-based data row number.
Stream load_csv(const std::string& path, const FeatureSchema& schema,
                const std::string& label_column,
                const std::vector<std::string>& keep_columns,
                const std::vector<std::string>& label_levels = {});

void write_csv(std::ostream& out, const Stream& stream,
               const FeatureSchema& schema);
void write_csv(const std::string& path, const Stream& stream,
               const FeatureSchema& schema);

}  // namespace drift
