#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "heatlab/exact_heat.hpp"
#include "heatlab/terminal.hpp"

namespace heatlab {

// Time grid t^n_k = 2kT/n, spatial grid z0 + 2mh with h = sigma sqrt(T/n).
struct LatticeParams {
    std::int64_t n = 2;
    double T = 1.0;
    double sigma = 1.0;
    double z0 = 0.0;

    LatticeParams() = default;
    LatticeParams(std::int64_t n_, double T_, double sigma_, double z0_ = 0.0);

    double h() const;
    double delta() const { return T / static_cast<double>(n); }
    double t_k(std::int64_t k) const { return 2.0 * static_cast<double>(k) * T / static_cast<double>(n); }
};

// theta_n is the smallest multiple of 2T/n at or above T - t; n_theta its step
// count; k the time-lattice index with t in [t^n_k, t^n_{k+1}).
struct ThetaIndex {
    std::int64_t n_theta = 2;
    double theta_n = 0.0;
    std::int64_t k = 0;
};

ThetaIndex theta_of(double t, const LatticeParams& lp);

// Law of the walk position after N fair +-1 steps: w[j] = P(S_N = 2j - N).
struct BinomialRow {
    std::int64_t N = 0;
    std::vector<double> w;
};

// Cached per N (readers concurrent, one writer per entry). Rows are built by
// multiplicative recursion outward from the central term and renormalized.
std::shared_ptr<const BinomialRow> binom_row(std::int64_t N);

// Walk expectation route: sum_j P(S_N = 2j-N) g(x + (2j-N) h) with
// N = n_theta(t); piecewise constant in t on [t^n_k, t^n_{k+1}); g(x) at t = T.
double un_binomial(const TerminalCondition& g, double t, double x, const LatticeParams& lp);

// Backward finite-difference route over the dependency cone:
// u(t_{k-1}, x) = (u(t_k, x+2h) + 2 u(t_k, x) + u(t_k, x-2h)) / 4.
double un_recursion(const TerminalCondition& g, double t, double x, const LatticeParams& lp);

// epsilon_n(t,x) = un_binomial - u_exact, quadrature flags propagated.
EvalResult total_error(const TerminalCondition& g, double t, double x, const LatticeParams& lp,
                       const QuadratureSpec& quad = {});

}  // namespace heatlab
