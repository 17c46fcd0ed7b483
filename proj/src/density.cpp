#include "drift/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drift/errors.hpp"

namespace drift {

namespace {
constexpr double kMinRadius = 1e-9;

inline int bin_of(double p, int kappa) {
  // last bin is closed: p == 1 falls into bin kappa-1
  const int b = static_cast<int>(p * kappa);
  return std::min(b, kappa - 1);
}
}  // namespace

double InterpolatedHistogram::center(int j) const {
  return (2.0 * j + 1.0) / (2.0 * kappa);
}

double InterpolatedHistogram::density_at_center(int j) const {
  return static_cast<double>(counts[static_cast<std::size_t>(j)]) * kappa /
         sample_size;
}

double InterpolatedHistogram::eval(double x) const {
  if (x < 0.0 || x > 1.0) throw DataError("density evaluated outside [0,1]");
  if (sample_size == 0) return 1.0;
  if (!interpolated) return density_at_center(bin_of(x, kappa));
  // Centers are uniformly spaced: x*kappa + 0.5 lands at j+1 on center c_j,
  // so the bracketing knots are recovered without a search.
  const double t = x * kappa + 0.5;
  if (t <= 1.0) return density_at_center(0);
  if (t >= static_cast<double>(kappa)) return density_at_center(kappa - 1);
  const int j0 = static_cast<int>(t) - 1;  // left knot index
  const double frac = t - (j0 + 1);
  const double f0 = density_at_center(j0);
  const double f1 = density_at_center(j0 + 1);
  return f0 + frac * (f1 - f0);
}

double InterpolatedHistogram::integral() const {
  if (sample_size == 0) return 1.0;
  if (!interpolated) {
    double area = 0.0;
    for (int j = 0; j < kappa; ++j) area += density_at_center(j) / kappa;
    return area;
  }
  // Two boundary rectangles of width 1/(2*kappa) plus trapezoids of height
  // 1/kappa between consecutive centers.
  double area = (density_at_center(0) + density_at_center(kappa - 1)) /
                (2.0 * kappa);
  for (int j = 1; j < kappa; ++j)
    area += (density_at_center(j - 1) + density_at_center(j)) / (2.0 * kappa);
  return area;
}

InterpolatedHistogram fit_interpolated_histogram(std::span<const double> pvalues,
                                                 int kappa_initial,
                                                 bool interpolate) {
  if (pvalues.empty()) throw DataError("cannot fit a histogram to no p-values");
  if (kappa_initial < 1) throw SpecError("initial bin count must be >= 1");

  InterpolatedHistogram hist;
  hist.sample_size = static_cast<int>(pvalues.size());
  hist.interpolated = interpolate;
  for (int kappa = kappa_initial; kappa >= 1; --kappa) {
    hist.kappa = kappa;
    hist.counts.assign(static_cast<std::size_t>(kappa), 0);
    for (double p : pvalues) {
      if (p < 0.0 || p > 1.0) throw DataError("p-value outside [0,1]");
      ++hist.counts[static_cast<std::size_t>(bin_of(p, kappa))];
    }
    if (std::find(hist.counts.begin(), hist.counts.end(), 0) ==
        hist.counts.end())
      break;  // no empty bin
  }
  return hist;
}

double knn_density_sorted(std::span<const double> sorted_pvalues, int k,
                          double x) {
  if (sorted_pvalues.empty()) throw DataError("kNN density of an empty sample");
  if (k < 1) throw SpecError("neighbor count must be >= 1");
  if (x < 0.0 || x > 1.0) throw DataError("density evaluated outside [0,1]");

  const int n = static_cast<int>(sorted_pvalues.size());
  const int neighbors = std::min(k, n);

  // k-th smallest |x - p_i| via a two-pointer walk outward from x.
  auto right = std::lower_bound(sorted_pvalues.begin(), sorted_pvalues.end(), x);
  auto left = right;
  double radius = 0.0;
  for (int taken = 0; taken < neighbors; ++taken) {
    const double dl = left == sorted_pvalues.begin()
                          ? std::numeric_limits<double>::infinity()
                          : x - *(left - 1);
    const double dr = right == sorted_pvalues.end()
                          ? std::numeric_limits<double>::infinity()
                          : *right - x;
    if (dl <= dr) {
      radius = dl;
      --left;
    } else {
      radius = dr;
      ++right;
    }
  }
  radius = std::max(radius, kMinRadius);
  const double length = std::min(1.0 - x, radius) + std::min(x, radius);
  const double numerator = static_cast<double>(std::min(n - 1, k - 1));
  return numerator / (n * length);
}

double knn_density_integral(std::span<const double> sorted_pvalues, int k) {
  if (sorted_pvalues.empty()) throw DataError("kNN density of an empty sample");
  if (k < 1) throw SpecError("neighbor count must be >= 1");

  const int n = static_cast<int>(sorted_pvalues.size());
  if (std::min(n - 1, k - 1) == 0) return 0.0;  // density identically zero
  const int nb = std::min(k, n);
  const double c = static_cast<double>(std::min(n - 1, k - 1));

  // The k nearest neighbors of x are a contiguous run p_j..p_{j+nb-1}; the
  // run in effect switches at the midpoint of p_j and p_{j+nb}. Within one
  // run the radius is R(x) = max(hi - x, x - lo) (floored like the
  // evaluator), so L(x) = min(x, R) + min(1-x, R) is piecewise linear with
  // branch switches at hi/2, the kink (lo+hi)/2, (1+lo)/2, and where the
  // radius floor engages. Per linear piece, f = c/(nL) integrates to
  // c*(v-u)/(n*(Lv-Lu)) * ln(Lv/Lu).
  double total = 0.0;
  double fast_product = 1.0;  // accumulated ratios awaiting one shared log
  const auto flush = [&] {
    if (fast_product != 1.0) {
      total += c / (2.0 * n) * std::log(fast_product);
      fast_product = 1.0;
    }
  };
  double piece_start = 0.0;
  for (int j = 0; j + nb <= n; ++j) {
    const double lo = sorted_pvalues[static_cast<std::size_t>(j)];
    const double hi = sorted_pvalues[static_cast<std::size_t>(j + nb - 1)];
    const double window_end =
        j + nb < n
            ? (lo + sorted_pvalues[static_cast<std::size_t>(j + nb)]) / 2.0
            : 1.0;
    const double u0 = piece_start;
    const double v0 = window_end;
    piece_start = window_end;
    if (v0 - u0 <= 0.0) continue;
    // Fast path: away from the domain edges both boundary terms equal R
    // (u >= hi/2 makes x >= R on the falling branch; v <= (1+lo)/2 makes
    // 1-x >= R on the rising one) and R = max(hi-x, x-lo) >= (hi-lo)/2
    // stays above the floor, so L = 2R and the piece integrates to
    // c/(2n) * ln of a ratio. The ratios multiply across windows and a
    // single log is taken when the product threatens overflow.
    if (hi - lo > 2.0 * kMinRadius && u0 >= hi / 2.0 &&
        v0 <= (1.0 + lo) / 2.0) {
      const double m = (lo + hi) / 2.0;
      if (v0 <= m) {
        fast_product *= (hi - u0) / (hi - v0);
      } else if (u0 >= m) {
        fast_product *= (v0 - lo) / (u0 - lo);
      } else {
        fast_product *= (hi - u0) * (v0 - lo) / ((hi - m) * (m - lo));
      }
      if (fast_product > 1e100) flush();
      continue;
    }
    flush();
    const auto length_at = [&](double x) {
      const double radius = std::max(std::max(hi - x, x - lo), kMinRadius);
      return std::min(x, radius) + std::min(1.0 - x, radius);
    };
    double cuts[7] = {hi / 2.0,           (lo + hi) / 2.0, (1.0 + lo) / 2.0,
                      hi - kMinRadius,    lo + kMinRadius, kMinRadius,
                      1.0 - kMinRadius};
    std::sort(std::begin(cuts), std::end(cuts));
    double u = u0;
    double lu = length_at(u);
    for (int i = 0; i <= 7; ++i) {
      const double v = i < 7 ? std::min(cuts[i], window_end) : window_end;
      if (v - u <= 0.0) continue;
      const double lv = length_at(v);
      if (std::abs(lv - lu) < 1e-14 * std::max(lu, lv)) {
        total += c * (v - u) / (n * lu);
      } else {
        total += c * (v - u) / (n * (lv - lu)) * std::log(lv / lu);
      }
      u = v;
      lu = lv;
    }
  }
  flush();
  return total;
}

double knn_density(std::span<const double> pvalues, int k, double x) {
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  return knn_density_sorted(sorted, k, x);
}

}  // namespace drift
