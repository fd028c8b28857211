#include "heatlab/exact_heat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace heatlab {

namespace {

// Integration window so that the Gaussian tail beats A e^{b|y|} by a wide
// margin: |y| >= s * max(10, b*s + 10) with s = sigma sqrt(theta).
double tail_window(double s, double b) { return s * std::max(10.0, b * s + 10.0); }

EvalResult integrate_kernel_against(const TerminalCondition& g, double x, double s,
                                    const QuadratureSpec& quad, bool dudt_kernel,
                                    double theta) {
    const GrowthEnvelope env = growth_envelope(g);
    const double w = dudt_kernel ? s * std::max(12.0, env.b * s + 12.0) : tail_window(s, env.b);
    auto integrand = [&](double y) -> double {
        const double p = normal_pdf(y / s) / s;
        double val = evaluate(g, x + y) * p;
        if (dudt_kernel) val *= (1.0 - (y * y) / (s * s)) / (2.0 * theta);
        return val;
    };
    // Jumps and kinks of y -> g(x+y) become segment boundaries; an adaptive
    // error estimate across an interior jump is not trustworthy.
    std::vector<double> cuts{-w, 0.0, w};
    for (const double f : feature_points(g)) {
        const double y = f - x;
        if (y > -w && y < w) cuts.push_back(y);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    EvalResult out;
    const QuadratureSpec seg{quad.abs_tol / static_cast<double>(cuts.size() - 1),
                             quad.max_subdivisions};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const QuadResult r = adaptive_gk15(integrand, cuts[i], cuts[i + 1], seg);
        out.value += r.value;
        out.abs_error += r.error;
        out.converged = out.converged && r.converged;
    }
    return out;
}

// Truncation radius for int f(y) Phi(...) d y with polynomial f: grow until
// the Gaussian factor kills the polynomial bound.
double piece_radius(const DensityPiece& dp, double x, double s, double tol) {
    double r = std::fabs(x) + 10.0 * s + 1.0;
    int guard = 0;
    while (guard++ < 200) {
        double cmax = 0.0;
        for (double cc : dp.coeffs) cmax += std::fabs(cc);
        const double far = (r - std::fabs(x)) / s;
        const double d = dp.coeffs.empty() ? 0.0 : static_cast<double>(dp.coeffs.size() - 1);
        const double bound = cmax * std::pow(r, d) * r * normal_cdf(-far);
        if (bound < 0.05 * tol) break;
        r *= 1.4142135623730951;
    }
    return r;
}

EvalResult u_exact_gbv(const GbvFunction& g, double x, double s, const QuadratureSpec& quad) {
    EvalResult out;
    double val = g.c;

    std::size_t n_pieces = 0;
    for (const auto& comp : g.mu)
        if (std::holds_alternative<DensityPiece>(comp)) ++n_pieces;
    const double piece_tol = n_pieces == 0 ? quad.abs_tol : quad.abs_tol / static_cast<double>(n_pieces);

    for (const auto& comp : g.mu) {
        if (const auto* pm = std::get_if<PointMass>(&comp)) {
            // u picks up P(x + X > p) for p >= 0 and -P(x + X <= p) for p < 0
            if (pm->at >= 0.0) val += pm->mass * normal_cdf((x - pm->at) / s);
            else val -= pm->mass * normal_cdf((pm->at - x) / s);
            continue;
        }
        const auto& dp = std::get<DensityPiece>(comp);
        const QuadratureSpec spec{piece_tol, quad.max_subdivisions};
        const double r = piece_radius(dp, x, s, piece_tol);
        const double lo_pos = std::max(dp.lo, 0.0);
        const double hi_pos = std::min(dp.hi, r);
        if (hi_pos > lo_pos) {
            auto f = [&](double y) { return dp.eval(y) * normal_cdf((x - y) / s); };
            const QuadResult q = adaptive_gk15(f, lo_pos, hi_pos, spec);
            val += q.value;
            out.abs_error += q.error;
            out.converged = out.converged && q.converged;
        }
        const double lo_neg = std::max(dp.lo, -r);
        const double hi_neg = std::min(dp.hi, 0.0);
        if (hi_neg > lo_neg) {
            auto f = [&](double y) { return dp.eval(y) * normal_cdf((y - x) / s); };
            const QuadResult q = adaptive_gk15(f, lo_neg, hi_neg, spec);
            val -= q.value;
            out.abs_error += q.error;
            out.converged = out.converged && q.converged;
        }
    }
    out.value = val;
    return out;
}

}  // namespace

EvalResult u_exact(const TerminalCondition& g, double t, double x, const HeatParams& hp,
                   const QuadratureSpec& quad) {
    if (!(t >= 0.0) || t > hp.T) throw std::invalid_argument("u_exact: t must lie in [0, T]");
    if (t == hp.T) return {evaluate(g, x), 0.0, true};
    const double theta = hp.T - t;
    const double s = hp.sigma * std::sqrt(theta);
    if (const auto* gbv = std::get_if<GbvFunction>(&g)) return u_exact_gbv(*gbv, x, s, quad);
    return integrate_kernel_against(g, x, s, quad, false, theta);
}

EvalResult u_exact_quadrature(const TerminalCondition& g, double t, double x,
                              const HeatParams& hp, const QuadratureSpec& quad) {
    if (!(t >= 0.0) || t > hp.T) throw std::invalid_argument("u_exact: t must lie in [0, T]");
    if (t == hp.T) return {evaluate(g, x), 0.0, true};
    const double theta = hp.T - t;
    const double s = hp.sigma * std::sqrt(theta);
    return integrate_kernel_against(g, x, s, quad, false, theta);
}

EvalResult dudt(const TerminalCondition& g, double t, double x, const HeatParams& hp,
                const QuadratureSpec& quad) {
    if (!(t >= 0.0) || !(t < hp.T)) throw std::invalid_argument("dudt: t must lie in [0, T)");
    const double theta = hp.T - t;
    const double s = hp.sigma * std::sqrt(theta);
    return integrate_kernel_against(g, x, s, quad, true, theta);
}

}  // namespace heatlab
