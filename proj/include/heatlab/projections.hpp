#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "heatlab/quadrature.hpp"
#include "heatlab/terminal.hpp"

namespace heatlab {

// Distances to the odd lattice {(2k+1)h} and the even lattice {2kh};
// d_e(x) + d_o(x) = h.
double dist_odd(double x, double h);
double dist_even(double x, double h);

// Piecewise-linear function with nodes on the even lattice (2kh) or the odd
// lattice ((2k+1)h), k in [k_lo, k_lo + values.size()). Between nodes the
// evaluation is exact linear interpolation; outside the window it clamps to
// the boundary node value.
struct LatticeLinear {
    double h = 1.0;
    bool odd = false;
    std::int64_t k_lo = 0;
    std::vector<double> values;

    double node_pos(std::int64_t k) const {
        return odd ? (2.0 * static_cast<double>(k) + 1.0) * h : 2.0 * static_cast<double>(k) * h;
    }
    std::int64_t k_hi() const { return k_lo + static_cast<std::int64_t>(values.size()) - 1; }
    double operator()(double x) const;
};

// Even projection of an arbitrary function: node values f(2kh).
template <class F>
LatticeLinear sample_even(F&& f, double h, std::int64_t k_lo, std::int64_t k_hi) {
    LatticeLinear out;
    out.h = h;
    out.odd = false;
    out.k_lo = k_lo;
    out.values.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (std::int64_t k = k_lo; k <= k_hi; ++k) out.values.push_back(f(2.0 * static_cast<double>(k) * h));
    return out;
}

// Odd projection of an arbitrary function: node values f((2k+1)h).
template <class F>
LatticeLinear sample_odd(F&& f, double h, std::int64_t k_lo, std::int64_t k_hi) {
    LatticeLinear out;
    out.h = h;
    out.odd = true;
    out.k_lo = k_lo;
    out.values.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (std::int64_t k = k_lo; k <= k_hi; ++k)
        out.values.push_back(f((2.0 * static_cast<double>(k) + 1.0) * h));
    return out;
}

// Pi_e g, sampling the terminal condition at even nodes.
LatticeLinear pi_e(const TerminalCondition& g, double h, std::int64_t k_lo, std::int64_t k_hi);

// Pi_o applied to an even-lattice piecewise-linear function; the input must
// extend one cell beyond the output window on each side.
LatticeLinear pi_o(const LatticeLinear& even_fn);

// Tabulated estimates of q(y) = P(bridge hits the even lattice first | X_theta = y)
// on a uniform grid over [0, ymax], extended by symmetry. Outside the table the
// small-h limit d_o(y)/h is used.
struct QTable {
    double h = 1.0;
    double theta = 1.0;
    double sigma = 1.0;
    double pitch = 0.125;
    std::int64_t paths = 0;
    std::int64_t steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> y;
    std::vector<double> q_hat;
    std::vector<double> ci;

    double q(double yy) const;
    double ci_at(double yy) const;
    double ymax() const { return y.empty() ? 0.0 : y.back(); }

    void save(const std::string& path) const;
    static QTable load(const std::string& path);
};

struct LocalErrorDet {
    double value = 0.0;        // E[Pi_e g^{x0}(X) - g^{x0}(X)] + E[(Pi_o Pi_e - Pi_e) g^{x0}(X) q(X)]
    double uncertainty = 0.0;  // table confidence radii pushed through the second integral
    double quad_error = 0.0;
    bool converged = true;
};

LocalErrorDet local_error_deterministic(const TerminalCondition& g, double x0, double h,
                                        double theta, const QTable& qt,
                                        const QuadratureSpec& quad = {});

// Bound of the weighted-variation local error estimate, used by the bound
// checks: (h / (sigma sqrt(theta))) e^{3 beta h + beta |x0|} [7/sqrt(2 pi)
// e^{beta^2 sigma^2 T / 2} + 1.5 C] (measure part + even-lattice atom part).
double gbv_local_error_bound(const GbvFunction& g, double x0, double h, double theta,
                             double sigma, double T);

}  // namespace heatlab
