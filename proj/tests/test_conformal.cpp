#include <doctest.h>

#include <algorithm>
#include <vector>

#include "drift/conformal.hpp"
#include "drift/rng.hpp"

using namespace drift;

TEST_CASE("nonconformity negates the true-label posterior") {
  const std::vector<double> p100{0.0, 1.0};
  CHECK(nonconformity(p100, 1) == doctest::Approx(-1.0));
  const std::vector<double> p0{1.0, 0.0};
  CHECK(nonconformity(p0, 1) == doctest::Approx(0.0));
  const std::vector<double> p75{0.25, 0.75};
  CHECK(nonconformity(p75, 1) == doctest::Approx(-0.75));
  CHECK_THROWS_AS(nonconformity(p75, -1), DataError);
  // labels the model never saw have posterior 0
  CHECK(nonconformity(p75, 5) == doctest::Approx(0.0));
}

TEST_CASE("first p-value equals the tie-break draw") {
  ScoreHistory h;
  h.add(-0.5);
  CHECK(h.pvalue(-0.5, 0.3) == doctest::Approx(0.3));
}

TEST_CASE("p-value hand count with one greater and one equal score") {
  ScoreHistory h;
  h.add(-0.9);
  h.add(-0.1);
  h.add(-0.5);
  // one score (-0.1) greater than -0.5, one equal (itself)
  CHECK(h.pvalue(-0.5, 0.5) == doctest::Approx((1 + 0.5 * 1) / 3.0));
}

TEST_CASE("all-equal history reduces to the tie-break draw") {
  ScoreHistory h;
  for (int i = 0; i < 10; ++i) h.add(-0.25);
  CHECK(h.pvalue(-0.25, 0.2) == doctest::Approx(0.2));
}

TEST_CASE("empty history is an error") {
  ScoreHistory h;
  CHECK_THROWS_AS(h.pvalue(0.0, 0.5), DataError);
}

TEST_CASE("p-values stay within (0,1]") {
  Rng rng(123);
  ScoreHistory h;
  for (int i = 0; i < 2000; ++i) {
    const double alpha = -static_cast<double>(rng.uniform_int(41)) / 40.0;
    h.add(alpha);
    const double p = h.pvalue(alpha, rng.uniform01());
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("p-value depends only on rank counts, not insertion order") {
  std::vector<double> scores{-0.9, -0.1, -0.5, -0.5, -0.3, -0.7, -0.1};
  const double final_score = -0.5;
  std::vector<double> expected_orderings;
  std::sort(scores.begin(), scores.end());
  do {
    ScoreHistory h;
    for (double s : scores) h.add(s);
    h.add(final_score);
    expected_orderings.push_back(h.pvalue(final_score, 0.37));
  } while (std::next_permutation(scores.begin(), scores.end()));
  for (double p : expected_orderings)
    CHECK(p == doctest::Approx(expected_orderings.front()).epsilon(1e-15));
}

TEST_CASE("clear resets the history to empty") {
  ScoreHistory h;
  h.add(-0.5);
  h.add(-0.25);
  CHECK(h.size() == 2);
  h.clear();
  CHECK(h.empty());
  CHECK_THROWS_AS(h.pvalue(-0.5, 0.5), DataError);
}
