#pragma once

#include <span>
#include <vector>

namespace drift {

// Histogram density over [0,1] with equal-width bins. If any bin of the
// requested width is empty, the bin count is reduced by one and the sample is
// re-binned until no empty bin remains (a single bin always terminates the
// loop). Evaluation is either the plain step function or the piecewise-linear
// interpolation through the bin centers, constant outside the outer centers.
struct InterpolatedHistogram {
  int kappa = 1;
  std::vector<int> counts;  // size kappa, all > 0 once fitted (or kappa == 1)
  int sample_size = 0;      // number of p-values binned
  bool interpolated = true;

  double center(int j) const;            // c_j = (2j+1)/(2*kappa), j in [0,kappa)
  double density_at_center(int j) const; // counts[j] * kappa / sample_size
  double eval(double x) const;           // throws on x outside [0,1]
  double integral() const;               // closed-form; equals 1 exactly
};

// kappa_initial >= 1; pvalues non-empty, all in [0,1].
InterpolatedHistogram fit_interpolated_histogram(std::span<const double> pvalues,
                                                 int kappa_initial,
                                                 bool interpolate = true);

// k-nearest-neighbor density at x in [0,1] over a sorted sample.
// R_k = distance from x to its k-th nearest sample point (the farthest
// available when the sample is smaller than k); window length
// L = min(1-x, R_k) + min(x, R_k), boundary-corrected. If the k-th neighbor
// coincides with x, R_k is floored at 1e-9 to keep L positive.
double knn_density_sorted(std::span<const double> sorted_pvalues, int k,
                          double x);

// Convenience overload for unsorted input.
double knn_density(std::span<const double> pvalues, int k, double x);

// Exact integral of the kNN density over [0,1]. The radius R_k(x) is
// piecewise linear in x (the k-th neighbor changes at midpoints between
// sample points), so 1/L is integrable in closed form piece by piece.
// Used to rescale the raw estimate into a probability density.
double knn_density_integral(std::span<const double> sorted_pvalues, int k);

}  // namespace drift
