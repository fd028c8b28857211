#pragma once

#include <cstdint>
#include <vector>

#include "heatlab/lattice.hpp"
#include "heatlab/rng.hpp"
#include "heatlab/terminal.hpp"

namespace heatlab {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t paths = 0;
};

// CDF / pdf of tau_{(-1,1)} = inf{t : |W_t| = 1} (unit half-width, sigma = 1).
// Two complementary series: reflection images for small t, the eigenfunction
// expansion for large t.
double tau_unit_cdf(double t);
double tau_unit_pdf(double t);

// One draw of tau_{(-1,1)} by inverse transform on a precomputed 1e5-knot
// monotone-cubic table (absolute error <= 1e-9); the far tails invert the
// asymptotic branches directly.
double sample_tau_unit(RngStream& rng);

// Table-free inversion (Newton on the series CDF); the accuracy oracle for
// the table and the tail branches.
double tau_unit_quantile(double u);

// One coupled trajectory of the exit-time embedding at step h = sigma sqrt(T/n):
// increments (dtau_k, dx_k) until both index n_theta and index J are resolved.
struct ExitWalkPath {
    std::vector<double> dtau;  // physical time increments (only when store_increments)
    std::vector<double> dx;    // +-h steps
    std::int64_t J = 0;        // first even index with tau_J > theta_n
    std::int64_t L = 0;        // largest m with tau_m < theta_n
    double X_at_ntheta = 0.0;
    double X_at_J = 0.0;
    double tau_at_J = 0.0;
};

void simulate_walk(double t, const LatticeParams& lp, RngStream& rng, ExitWalkPath& out,
                   bool store_increments = false);

// E[g(x0 + X_{tau_{n_theta}}) - g(x0 + X_{tau_J})] with antithetic sign
// flipping (tau draws shared, signs mirrored).
McEstimate global_error_mc(const TerminalCondition& g, double x0, double t,
                           const LatticeParams& lp, std::int64_t paths, std::uint64_t seed,
                           int workers = 0);

// E[g(x0 + X_{tau_J})] - u(t^n_k, x0); only the first term is sampled.
McEstimate local_error_mc(const TerminalCondition& g, double x0, double t,
                          const LatticeParams& lp, std::int64_t paths, std::uint64_t seed,
                          int workers = 0);

struct JnMomentReport {
    std::int64_t n_theta = 0;
    double theta_n = 0.0;
    std::int64_t paths = 0;
    double mean_j_gap = 0.0;           // E[J_n] - n_theta
    double mean_j_gap_se = 0.0;
    double second_moment_scaled = 0.0;  // E[((J_n - n_theta)/sqrt(n_theta))^2]
    double second_moment_se = 0.0;
    double mean_tau_gap = 0.0;          // E[tau_{J_n}] - theta_n
    double mean_tau_gap_se = 0.0;
    double abs_moment_scaled[3] = {0, 0, 0};  // E|J-n|^K / n^{K/2}, K = 1,2,4
    double factorization_gap = 0.0;     // E[J tau_J] - E[J] E[tau_J]
    double factorization_gap_se = 0.0;
    double tail35_frequency = 0.0;      // P(|J_n - n_theta| > n_theta^{3/5})
    double tail35_scaled = 0.0;         // n_theta^2 * that frequency
};

JnMomentReport jn_moment_report(double t, const LatticeParams& lp, std::int64_t paths,
                                std::uint64_t seed, int workers = 0);

// Empirical frequency of {J_n > n_theta (1 + delta)}.
McEstimate tail_frequency(double t, const LatticeParams& lp, double delta, std::int64_t paths,
                          std::uint64_t seed, int workers = 0);

// H(x) = 1 + 6/x^4 (x^2/2 + log cos x) on (0, pi/2); series branch for small x.
double h_function(double x);

struct TailBound {
    double upper = 0.0;  // bound for P(J > n_theta (1+delta))
    double lower = 0.0;  // bound for P(J < n_theta (1-delta))
};

// exp(-(3/2) n_theta delta^2/(1 +- delta) H(sqrt(3 delta/(1 +- delta)))),
// valid for delta in (0, pi^2/(12+pi^2)) with n_theta (1 +- delta) integral.
TailBound tail_bound_rhs(double delta, std::int64_t n_theta);

}  // namespace heatlab
