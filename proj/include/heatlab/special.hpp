#pragma once

namespace heatlab {

// Rational-approximation error functions (Cody's CALERF scheme). These are
// implemented in-tree so results are bit-stable across platforms and libm
// versions; the acceptance reports are compared byte-for-byte.
double erf_cody(double x);
double erfc_cody(double x);

// Standard normal CDF, absolute error below 1e-14.
double normal_cdf(double z);

// Standard normal density.
double normal_pdf(double z);

// Density of sigma*W_theta evaluated at y (theta > 0, sigma > 0).
double gaussian_density(double y, double theta, double sigma);

// Inverse normal CDF. The fast variant (Acklam's rational approximation,
// ~1.2e-9 relative) feeds the Monte Carlo samplers; the refined variant adds
// one Halley step for near-machine accuracy.
double normal_quantile_fast(double p);
double normal_quantile(double p);

}  // namespace heatlab
