#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "drift/stream.hpp"

using namespace drift;

namespace {

ConceptSchedule schedule4(std::int64_t chunk, bool cycle) {
  return ConceptSchedule{{0, 1, 2, 3}, chunk, cycle};
}

std::vector<std::int64_t> drift_points(const Stream& s,
                                       const ConceptSchedule& sched) {
  std::vector<std::int64_t> points;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (sched.concept_at(s[i].timestamp) != sched.concept_at(s[i - 1].timestamp))
      points.push_back(s[i].timestamp);
  return points;
}

}  // namespace

TEST_CASE("stagger drift points follow the chunk schedule") {
  const auto sched = schedule4(100, true);
  const auto s = generate_stagger(1000, sched, 7);
  const auto points = drift_points(s, sched);
  REQUIRE(points.size() == 9);
  for (std::size_t i = 0; i < points.size(); ++i)
    CHECK(points[i] == static_cast<std::int64_t>(100 * (i + 1) + 1));
}

TEST_CASE("single chunk has zero drift points") {
  const auto sched = schedule4(10000, true);
  const auto s = generate_stagger(10000, sched, 7);
  CHECK(drift_points(s, sched).empty());
}

TEST_CASE("stagger streams are deterministic under a fixed seed") {
  const auto sched = schedule4(50, true);
  const auto a = generate_stagger(500, sched, 42);
  const auto b = generate_stagger(500, sched, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].features == b[i].features);
    CHECK(a[i].label == b[i].label);
  }
  const auto c = generate_stagger(500, sched, 43);
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].features != c[i].features) same = false;
  CHECK_FALSE(same);
}

TEST_CASE("stagger concept purity: labels reproduce the active rule") {
  const auto sched = schedule4(250, true);
  const auto s = generate_stagger(2000, sched, 11);
  const auto& rules = default_stagger_rules();
  for (const auto& z : s) {
    const int c = sched.concept_at(z.timestamp);
    const int expected =
        rules[static_cast<std::size_t>(c)](static_cast<int>(z.features[0]),
                                           static_cast<int>(z.features[1]),
                                           static_cast<int>(z.features[2]));
    REQUIRE(z.label == expected);
  }
}

TEST_CASE("sea labels follow the threshold rule") {
  // direct rule checks
  CHECK((2.0 + 3.0 <= 8.0));
  const auto sched = ConceptSchedule{{0, 1, 2, 3}, 250, false};
  const auto s = generate_sea(1000, sched, 3);
  for (const auto& z : s) {
    const double threshold =
        default_sea_thresholds()[static_cast<std::size_t>(
            sched.concept_at(z.timestamp))];
    CHECK(z.label == ((z.features[0] + z.features[1] <= threshold) ? 1 : 0));
  }
  const auto points = drift_points(s, sched);
  REQUIRE(points.size() == 3);
  CHECK(points[0] == 251);
  CHECK(points[1] == 501);
  CHECK(points[2] == 751);
}

TEST_CASE("sea schedule clamps at the last concept without cycling") {
  const auto sched = ConceptSchedule{{0, 1, 2, 3}, 10, false};
  CHECK(sched.concept_at(1) == 0);
  CHECK(sched.concept_at(41) == 3);
  CHECK(sched.concept_at(1000) == 3);
}

TEST_CASE("noise rate 0 and 1 are exact") {
  const auto s = generate_stagger(200, schedule4(50, true), 5);
  const auto same = inject_label_noise(s, {0.0, 9});
  const auto flipped = inject_label_noise(s, {1.0, 9});
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(same[i].label == s[i].label);
    CHECK(flipped[i].label == 1 - s[i].label);
    CHECK(flipped[i].features == s[i].features);
  }
}

TEST_CASE("noise marginal stays within the 6-sigma binomial band") {
  const auto s = generate_stagger(100000, schedule4(10000, true), 5);
  const auto noisy = inject_label_noise(s, {0.1, 77});
  int flips = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (noisy[i].label != s[i].label) ++flips;
  // mean 10000, sigma = sqrt(100000*0.1*0.9) ~ 94.9, 6 sigma ~ 569
  CHECK(flips >= 9400);
  CHECK(flips <= 10600);
}

TEST_CASE("noise rejects non-binary labels") {
  Stream s = generate_stagger(5, schedule4(50, true), 5);
  s[2].label = 7;
  CHECK_THROWS_AS(inject_label_noise(s, {0.5, 1}), DataError);
}

TEST_CASE("csv round trip preserves a generated stream") {
  const auto schema = sea_schema();
  const auto s = generate_sea(50, ConceptSchedule{{0}, 100, false}, 21);
  std::ostringstream out;
  write_csv(out, s, schema);

  const std::string path = "test_stream_roundtrip.csv";
  write_csv(path, s, schema);
  const auto loaded = load_csv(path, schema, "label", {"f1", "f2", "f3"},
                               {"0", "1"});
  std::remove(path.c_str());
  REQUIRE(loaded.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(loaded[i].label == s[i].label);
    for (int a = 0; a < 3; ++a)
      CHECK(loaded[i].features[a] == doctest::Approx(s[i].features[a]).epsilon(1e-15));
  }
}

TEST_CASE("csv header-only file yields an empty stream") {
  const std::string path = "test_stream_header_only.csv";
  {
    std::ofstream f(path);
    f << "a,b,label\n";
  }
  FeatureSchema schema;
  schema.attributes = {{"a", AttrKind::numeric, {}, -1e9, 1e9},
                       {"b", AttrKind::numeric, {}, -1e9, 1e9}};
  const auto s = load_csv(path, schema, "label", {"a", "b"});
  std::remove(path.c_str());
  CHECK(s.empty());
}

TEST_CASE("csv parse errors name the offending row") {
  const std::string path = "test_stream_bad_cell.csv";
  {
    std::ofstream f(path);
    f << "price,label\n1.5,UP\nnot_a_number,DOWN\n";
  }
  FeatureSchema schema;
  schema.attributes = {{"price", AttrKind::numeric, {}, -1e9, 1e9}};
  try {
    load_csv(path, schema, "label", {"price"});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("csv missing column is reported") {
  const std::string path = "test_stream_missing_col.csv";
  {
    std::ofstream f(path);
    f << "a,label\n1,0\n";
  }
  FeatureSchema schema;
  schema.attributes = {{"b", AttrKind::numeric, {}, -1e9, 1e9}};
  CHECK_THROWS_AS(load_csv(path, schema, "label", {"b"}), DataError);
  std::remove(path.c_str());
}

TEST_CASE("elec-shaped csv loads with five predictors in file order") {
  const std::string path = "test_stream_elec.csv";
  {
    std::ofstream f(path);
    f << "date,day,period,nswprice,nswdemand,vicprice,vicdemand,transfer,class\n";
    for (int i = 0; i < 20; ++i)
      f << "x,1,0.5,0." << i << ",0.2,0.3,0.4,0.5,"
        << (i % 2 ? "UP" : "DOWN") << "\n";
  }
  FeatureSchema schema;
  for (const char* name :
       {"nswprice", "nswdemand", "transfer", "vicprice", "vicdemand"})
    schema.attributes.push_back({name, AttrKind::numeric, {}, -1e9, 1e9});
  const auto s = load_csv(path, schema, "class",
                          {"nswprice", "nswdemand", "transfer", "vicprice",
                           "vicdemand"},
                          {"DOWN", "UP"});
  std::remove(path.c_str());
  REQUIRE(s.size() == 20);
  CHECK(s[0].features.size() == 5);
  CHECK(s[0].label == 0);
  CHECK(s[1].label == 1);
  CHECK(s[3].timestamp == 4);
}

TEST_CASE("schema validation rejects degenerate attributes") {
  FeatureSchema empty;
  CHECK_THROWS_AS(empty.validate(), SpecError);
  FeatureSchema bad_range;
  bad_range.attributes = {{"x", AttrKind::numeric, {}, 2.0, 1.0}};
  CHECK_THROWS_AS(bad_range.validate(), SpecError);
  FeatureSchema no_levels;
  no_levels.attributes = {{"c", AttrKind::categorical, {}, 0, 1}};
  CHECK_THROWS_AS(no_levels.validate(), SpecError);
}
