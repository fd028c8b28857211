#pragma once

#include <cstdint>
#include <vector>

#include "heatlab/projections.hpp"
#include "heatlab/quadrature.hpp"
#include "heatlab/rng.hpp"

namespace heatlab {

struct SeriesSpec {
    double abs_tol = 1e-12;
    int max_terms = 64;
};

// F(x) = sum_m (-1)^m e^{-2 m^2 x^2}. The alternating series is used when it
// converges within max_terms; for small x the dual exponential series (Jacobi
// theta transformation) takes over automatically.
double f_series(double x, const SeriesSpec& spec = {});

// F(1/sqrt(u)) / sqrt(2 pi u), a probability density on (0, inf).
double exit_time_pdf(double u, const SeriesSpec& spec = {});

// int_0^inf exit_time_pdf(u) du, via the u = s^2 substitution that removes
// the endpoint singularity.
QuadResult exit_time_pdf_normalization(const QuadratureSpec& quad = {});

// E_{0,theta,y}[H_{(-h,h)}] = h int_0^theta (gamma_{theta-t}(0,y)/gamma_theta(0,y))
//                             F(h/sqrt(t))/sqrt(2 pi t) dt, |y| >= h.
QuadResult expected_exit_time_sym(double theta, double h, double y,
                                  const QuadratureSpec& quad = {});

struct BridgeSpec {
    double theta = 1.0;
    double start = 0.0;
    double end = 0.0;
    std::int64_t steps = 64;     // >= 64
    std::int64_t paths = 1000;   // >= 1000
    std::uint64_t seed = 0;
};

struct BridgeHit {
    bool hit = false;
    bool lower_first = false;
    double time = 0.0;  // capped at theta
};

// Conditioned Gaussian stepping with per-step boundary-crossing corrections.
// One path per stream id (= path index under spec.seed).
std::vector<BridgeHit> bridge_sample(const BridgeSpec& spec, double lo, double hi);

// Full grid trajectories (steps+1 values, no early stop, no corrections);
// feeds law checks that act on whole paths, e.g. under time reversal.
std::vector<std::vector<double>> bridge_sample_grid(const BridgeSpec& spec);

struct QEstimate {
    double q_hat = 0.0;
    double ci = 0.0;  // 3 standard errors
    std::int64_t paths = 0;
};

// P(bridge from y/sigma to 0 of length theta hits the even neighbor level
// before the odd neighbor), estimated by simulation on the two nearest levels.
QEstimate q_estimate(double y, double h, double theta, double sigma, const BridgeSpec& spec);

// Tabulates q on a uniform grid of the given pitch over [0, ymax]; lattice
// points carry the measure-zero convention q(even)=1, q(odd)=0 with zero
// confidence radius. steps_override = 0 picks 64*theta/(h/sigma)^2.
QTable build_qtable(double h, double theta, double sigma, double ymax, double pitch,
                    std::int64_t paths_per_point, std::uint64_t seed, int workers = 0,
                    std::int64_t steps_override = 0);

// Coefficient of the weighted rho window bound:
// e^{beta h}(102/10 + 4 h/(sigma sqrt(theta)))  v
// e^{beta^2 sigma^2 theta}[14/10 + (36/10 + 16/10 beta sigma sqrt(theta)) h/(sigma sqrt(theta))
//                          + 7/10 h^2/(sigma^2 theta)].
double super_coef(double beta, double h, double theta, double sigma);

struct RhoBoundCheck {
    double value = 0.0;
    double uncertainty = 0.0;  // MC radii + quadrature + tail allowance
    double bound = 0.0;
    bool pass = false;
};

struct RhoCheckReport {
    RhoBoundCheck inner;     // int_0^h |rho| p
    RhoBoundCheck outer;     // int_h^inf |rho| p
    RhoBoundCheck weighted;  // sup_m int_{(2m-1)h}^{(2m+1)h} e^{beta|y|} |rho| p
    int sup_window_m = 0;
    double beta = 0.0;
};

RhoCheckReport rho_integral_checks(double h, double theta, double sigma, double beta,
                                   const QTable& qt);

}  // namespace heatlab
