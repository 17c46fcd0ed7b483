#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "drift/betting.hpp"
#include "drift/errors.hpp"
#include "drift/rng.hpp"

using namespace drift;

namespace {

// Reference single-estimator implementation: explicit product of densities,
// explicit minimum over the trailing window, refit from scratch every step.
struct NaiveSingleCautious {
  double epsilon;
  int window;
  int bins;
  std::vector<double> pvals;
  double log_s1 = 0.0;
  std::vector<double> logs;  // recorded log S1 values

  double density(double x) const {
    if (pvals.empty()) return 1.0;
    return std::max(fit_interpolated_histogram(pvals, bins).eval(x), 1e-12);
  }

  BetDecision bet(double p) const {
    BetDecision d;
    if (logs.empty()) return d;
    const std::size_t take =
        std::min<std::size_t>(logs.size(), static_cast<std::size_t>(window));
    const double min_log =
        *std::min_element(logs.end() - static_cast<std::ptrdiff_t>(take),
                          logs.end());
    if (std::exp(log_s1 - min_log) <= epsilon) return d;
    d.active = true;
    d.chosen = 0;
    d.value = density(p);
    return d;
  }

  void observe(double p) {
    log_s1 += std::log(density(p));
    logs.push_back(log_s1);
    pvals.push_back(p);
  }
};

std::vector<double> drifting_pvalues(int n_uniform, int n_drift,
                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> ps;
  for (int i = 0; i < n_uniform; ++i) ps.push_back(rng.uniform01());
  for (int i = 0; i < n_drift; ++i) ps.push_back(rng.uniform(0.0, 0.04));
  return ps;
}

CautiousConfig single_ih(double epsilon, int window, int bins) {
  CautiousConfig c;
  c.epsilon = epsilon;
  c.window = window;
  c.estimators = {{EstimatorSpec::Kind::interp_hist, bins}};
  return c;
}

}  // namespace

TEST_CASE("fresh state never bets: ratio one is below the threshold") {
  CautiousBetting cb(CautiousConfig::named("MIHNN"));
  const BetDecision d = cb.bet(0.5);
  CHECK_FALSE(d.active);
  CHECK(d.value == 1.0);
  CHECK(d.chosen == -1);
}

TEST_CASE("uniform history keeps the bet inactive at the default threshold") {
  CautiousBetting cb(CautiousConfig::named("MIH"));
  Rng rng(17);
  for (int i = 0; i < 500; ++i) cb.observe(rng.uniform01());
  const BetDecision d = cb.bet(0.5);
  CHECK_FALSE(d.active);
  CHECK(d.value == 1.0);
}

TEST_CASE("drifted history activates the bet and returns the argmax density") {
  CautiousConfig cfg = CautiousConfig::named("MIH");
  cfg.epsilon = 1.5;  // low threshold so the activation is easy to reach
  CautiousBetting cb(cfg);
  for (double p : drifting_pvalues(200, 120, 23)) cb.observe(p);

  double best_ratio = 0.0;
  int best = -1;
  for (int j = 0; j < cb.estimator_count(); ++j)
    if (cb.shadow_ratio(j) > best_ratio) {
      best_ratio = cb.shadow_ratio(j);
      best = j;
    }
  REQUIRE(best_ratio > cfg.epsilon);

  const BetDecision d = cb.bet(0.02);
  CHECK(d.active);
  CHECK(d.chosen == best);
  CHECK(d.value == doctest::Approx(cb.density(best, 0.02)));
  CHECK(d.value > 1.0);  // dense region of the drifted sample
}

TEST_CASE("single-estimator state agrees with the naive reference") {
  CautiousBetting cb(single_ih(3.0, 50, 15));
  NaiveSingleCautious naive{3.0, 50, 15, {}, 0.0, {}};
  for (double p : drifting_pvalues(300, 80, 31)) {
    const BetDecision a = cb.bet(p);
    const BetDecision b = naive.bet(p);
    REQUIRE(a.active == b.active);
    REQUIRE(a.value == doctest::Approx(b.value).epsilon(1e-12));
    cb.observe(p);
    naive.observe(p);
    REQUIRE(cb.shadow_log(0) == doctest::Approx(naive.log_s1).epsilon(1e-9));
  }
}

TEST_CASE("shadow log-product telescopes over the observed densities") {
  CautiousBetting cb(CautiousConfig::named("MIHNN"));
  std::vector<double> expected(static_cast<std::size_t>(cb.estimator_count()), 0.0);
  Rng rng(47);
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform01();
    for (int j = 0; j < cb.estimator_count(); ++j)
      expected[static_cast<std::size_t>(j)] += std::log(cb.density(j, p));
    cb.observe(p);
    for (int j = 0; j < cb.estimator_count(); ++j)
      CHECK(cb.shadow_log(j) ==
            doctest::Approx(expected[static_cast<std::size_t>(j)]).epsilon(1e-9));
  }
}

TEST_CASE("window minimum covers exactly the last W shadow values") {
  const int window = 10;
  CautiousBetting cb(single_ih(100.0, window, 5));
  NaiveSingleCautious naive{100.0, window, 5, {}, 0.0, {}};
  Rng rng(59);
  for (int i = 0; i < window + 25; ++i) {
    const double p = rng.uniform01();
    cb.observe(p);
    naive.observe(p);
    const std::size_t take =
        std::min<std::size_t>(naive.logs.size(), static_cast<std::size_t>(window));
    const double min_log =
        *std::min_element(naive.logs.end() - static_cast<std::ptrdiff_t>(take),
                          naive.logs.end());
    CHECK(cb.shadow_ratio(0) ==
          doctest::Approx(std::exp(naive.log_s1 - min_log)).epsilon(1e-9));
  }
}

TEST_CASE("reset restores a freshly constructed state") {
  CautiousConfig cfg = CautiousConfig::named("MIHNN");
  CautiousBetting cb(cfg);
  for (double p : drifting_pvalues(100, 50, 73)) cb.observe(p);
  cb.reset();
  CHECK(cb.observed() == 0);
  for (int j = 0; j < cb.estimator_count(); ++j) {
    CHECK(cb.shadow_log(j) == 0.0);
    CHECK(cb.shadow_ratio(j) == 1.0);
  }
  CHECK_FALSE(cb.bet(0.5).active);
  cb.reset();  // idempotent
  CHECK(cb.observed() == 0);

  // post-reset trajectories match a fresh object exactly
  CautiousBetting fresh(cfg);
  Rng rng(74);
  for (int i = 0; i < 50; ++i) {
    const double p = rng.uniform01();
    cb.observe(p);
    fresh.observe(p);
    for (int j = 0; j < cb.estimator_count(); ++j)
      CHECK(cb.shadow_log(j) == doctest::Approx(fresh.shadow_log(j)));
  }
}

TEST_CASE("densities are floored so shadows never reach -infinity") {
  CautiousConfig cfg;
  cfg.estimators = {{EstimatorSpec::Kind::knn, 5}};
  CautiousBetting cb(cfg);
  cb.observe(0.5);  // single point: knn numerator is 0, density floors at 1e-12
  CHECK(std::isfinite(cb.shadow_log(0)));
  CHECK(cb.density(0, 0.5) >= 1e-12);
}

TEST_CASE("active bet integrates to one for histogram-backed estimators") {
  for (const char* name : {"IH", "MIH", "CAU"}) {
    CautiousConfig cfg = CautiousConfig::named(name);
    cfg.epsilon = 1.2;
    CautiousBetting cb(cfg);
    for (double p : drifting_pvalues(150, 100, 83)) cb.observe(p);
    REQUIRE(cb.bet(0.02).active);
    // Midpoint rule with every bin edge and knot on the grid (720720 is a
    // multiple of 2*kappa for all kappa <= 15), so it is exact for both the
    // step and the piecewise-linear densities up to rounding.
    const int intervals = 720720;
    double sum = 0.0;
    for (int i = 0; i < intervals; ++i)
      sum += cb.bet((i + 0.5) / intervals).value / intervals;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("inactive bet value is exactly one") {
  CautiousBetting cb(CautiousConfig::named("IH"));
  Rng rng(91);
  for (int i = 0; i < 300; ++i) cb.observe(rng.uniform01());
  for (double x : {0.0, 0.25, 0.5, 0.999}) {
    const BetDecision d = cb.bet(x);
    CHECK_FALSE(d.active);
    CHECK(d.value == 1.0);
  }
}

TEST_CASE("named configs carry the documented estimator sets") {
  CHECK(CautiousConfig::named("IH").estimators.size() == 1);
  CHECK(CautiousConfig::named("MIH").estimators.size() == 3);
  CHECK(CautiousConfig::named("MIHNN").estimators.size() == 6);
  CHECK(CautiousConfig::named("CAU").estimators.size() == 1);
  CHECK(CautiousConfig::named("CAU").estimators[0].kind ==
        EstimatorSpec::Kind::plain_hist);
  CHECK_THROWS_AS(CautiousConfig::named("bogus"), SpecError);
}

TEST_CASE("config validation rejects bad parameters") {
  CautiousConfig bad = CautiousConfig::named("IH");
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = CautiousConfig::named("IH");
  bad.window = 0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = CautiousConfig::named("IH");
  bad.estimators.clear();
  CHECK_THROWS_AS(bad.validate(), SpecError);
}

TEST_CASE("active bet integrates to one for knn-backed estimators") {
  CautiousConfig cfg;
  cfg.epsilon = 1.2;
  cfg.estimators = {{EstimatorSpec::Kind::knn, 5},
                    {EstimatorSpec::Kind::knn, 10}};
  CautiousBetting cb(cfg);
  for (double p : drifting_pvalues(150, 100, 83)) cb.observe(p);
  for (int j = 0; j < cb.estimator_count(); ++j) {
    const int intervals = 400000;
    double sum = 0.0;
    for (int i = 0; i < intervals; ++i)
      sum += cb.density(j, (i + 0.5) / intervals) / intervals;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));
  }
  REQUIRE(cb.bet(0.02).active);
}

TEST_CASE("sample window limits the fit to the most recent p-values") {
  CautiousConfig cfg = single_ih(100.0, 5000, 15);
  cfg.sample_window = 50;
  CautiousBetting cb(cfg);
  const auto ps = drifting_pvalues(120, 80, 97);
  for (double p : ps) cb.observe(p);
  std::vector<double> tail(ps.end() - 50, ps.end());
  const auto oracle = fit_interpolated_histogram(tail, 15);
  for (double x : {0.0, 0.02, 0.3, 0.77, 1.0})
    CHECK(cb.density(0, x) ==
          doctest::Approx(std::max(oracle.eval(x), 1e-12)).epsilon(1e-12));
}

TEST_CASE("unlimited sample window keeps everything since reset") {
  CautiousConfig cfg = single_ih(100.0, 5000, 15);
  REQUIRE(cfg.sample_window == 0);
  CautiousBetting cb(cfg);
  const auto ps = drifting_pvalues(120, 80, 101);
  for (double p : ps) cb.observe(p);
  const auto oracle = fit_interpolated_histogram(ps, 15);
  for (double x : {0.0, 0.02, 0.3, 0.77, 1.0})
    CHECK(cb.density(0, x) ==
          doctest::Approx(std::max(oracle.eval(x), 1e-12)).epsilon(1e-12));
}

TEST_CASE("negative sample window is rejected") {
  CautiousConfig bad = CautiousConfig::named("IH");
  bad.sample_window = -1;
  CHECK_THROWS_AS(bad.validate(), SpecError);
}
