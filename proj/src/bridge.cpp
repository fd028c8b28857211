#include "heatlab/bridge.hpp"

#include <algorithm>

#include <cmath>
#include <stdexcept>

#include "heatlab/parallel.hpp"
#include "heatlab/special.hpp"

namespace heatlab {

namespace {

constexpr double kPi = 3.141592653589793238;
constexpr double kSqrt2Pi = 2.506628274631000502;

double f_series_primary(double x, double tol, int max_terms) {
    double sum = 1.0;
    double sign = -1.0;
    for (int m = 1; m <= max_terms; ++m) {
        const double term = 2.0 * std::exp(-2.0 * static_cast<double>(m) * static_cast<double>(m) * x * x);
        if (term < tol) break;
        sum += sign * term;
        sign = -sign;
    }
    return sum;
}

double f_series_dual(double x, double tol, int max_terms) {
    // theta transformation: F(x) = sqrt(pi/(2x^2)) * 2 * sum_{m>=0} e^{-pi^2 (2m+1)^2 / (8x^2)}
    const double pref = std::sqrt(kPi / 2.0) / x;
    double sum = 0.0;
    for (int m = 0; m <= max_terms; ++m) {
        const double a = 2.0 * static_cast<double>(m) + 1.0;
        const double ex = kPi * kPi * a * a / (8.0 * x * x);
        if (ex > 745.0) break;
        const double term = 2.0 * pref * std::exp(-ex);
        sum += term;
        if (term < tol) break;
    }
    return sum;
}

}  // namespace

double f_series(double x, const SeriesSpec& spec) {
    if (!(x > 0.0)) throw std::invalid_argument("f_series: x must be positive");
    const double tol = std::clamp(spec.abs_tol, 1e-300, 0.5);
    // primary series needs about sqrt(ln(2/tol)/2)/x terms
    const double needed = std::sqrt(0.5 * std::log(2.0 / tol)) / x;
    if (needed <= static_cast<double>(spec.max_terms)) return f_series_primary(x, tol, spec.max_terms);
    return f_series_dual(x, tol, spec.max_terms);
}

double exit_time_pdf(double u, const SeriesSpec& spec) {
    if (!(u > 0.0)) throw std::invalid_argument("exit_time_pdf: u must be positive");
    return f_series(1.0 / std::sqrt(u), spec) / std::sqrt(2.0 * kPi * u);
}

QuadResult exit_time_pdf_normalization(const QuadratureSpec& quad) {
    // u = s^2 turns the u^{-1/2} endpoint into a smooth integrand.
    auto f = [](double s) { return s > 0.0 ? 2.0 / kSqrt2Pi * f_series(1.0 / s) : 2.0 / kSqrt2Pi; };
    return adaptive_gk15(f, 0.0, 8.0, quad);
}

QuadResult expected_exit_time_sym(double theta, double h, double y, const QuadratureSpec& quad) {
    if (!(theta > 0.0) || !(h > 0.0))
        throw std::invalid_argument("expected_exit_time_sym: theta and h must be positive");
    if (std::fabs(y) < h)
        throw std::invalid_argument("expected_exit_time_sym: |y| must be >= h");
    const double root = std::sqrt(theta);
    auto integrand = [&](double s) -> double {
        const double rem = theta - s * s;  // time argument of the density ratio
        if (!(rem > 0.0)) return 0.0;
        const double ex = -0.5 * y * y * (s * s) / (rem * theta);
        if (ex < -700.0) return 0.0;
        const double ratio = std::sqrt(theta / rem) * std::exp(ex);
        const double fs = s > 0.0 ? f_series(h / s) : 1.0;
        return 2.0 * h / kSqrt2Pi * ratio * fs;
    };
    return adaptive_gk15(integrand, 0.0, root, quad);
}

namespace {

struct TwoBarrier {
    int side = 0;  // -1 lower, +1 upper, 0 none
    double time = 0.0;
};

class BridgeStepper {
public:
    BridgeStepper(double theta, std::int64_t steps) : theta_(theta), steps_(steps) {
        dt_ = theta / static_cast<double>(steps);
        sd_.resize(static_cast<std::size_t>(steps));
        for (std::int64_t i = 0; i < steps; ++i) {
            const double rem = theta - static_cast<double>(i) * dt_;
            const double var = dt_ * (rem - dt_) / rem;
            sd_[static_cast<std::size_t>(i)] = var > 0.0 ? std::sqrt(var) : 0.0;
        }
    }

    TwoBarrier run(double start, double end, double lo, double hi, RngStream& rng) const {
        double z = start;
        for (std::int64_t i = 0; i < steps_; ++i) {
            const double rem = theta_ - static_cast<double>(i) * dt_;
            const double mean = z + dt_ * (end - z) / rem;
            const double z2 = mean + sd_[static_cast<std::size_t>(i)] * rng.next_normal();
            if (z2 >= hi) return {+1, static_cast<double>(i + 1) * dt_};
            if (z2 <= lo) return {-1, static_cast<double>(i + 1) * dt_};
            // Intra-step crossing corrections; the step conditional on its
            // endpoints is a Brownian bridge of length dt, so a one-sided
            // crossing has probability exp(-2 d1 d2 / dt).
            const double eh = 2.0 * (hi - z) * (hi - z2) / dt_;
            const double el = 2.0 * (z - lo) * (z2 - lo) / dt_;
            const double ph = eh < 40.0 ? std::exp(-eh) : 0.0;
            const double pl = el < 40.0 ? std::exp(-el) : 0.0;
            if (ph > 0.0 || pl > 0.0) {
                const bool ch = ph > 0.0 && rng.next_double() < ph;
                const bool cl = pl > 0.0 && rng.next_double() < pl;
                const double tm = (static_cast<double>(i) + 0.5) * dt_;
                if (ch && cl) return {ph >= pl ? +1 : -1, tm};
                if (ch) return {+1, tm};
                if (cl) return {-1, tm};
            }
            z = z2;
        }
        return {0, theta_};
    }

private:
    double theta_;
    std::int64_t steps_;
    double dt_;
    std::vector<double> sd_;
};

void validate_bridge_spec(const BridgeSpec& spec) {
    if (spec.steps < 64) throw std::invalid_argument("BridgeSpec: steps must be >= 64");
    if (spec.paths < 1000) throw std::invalid_argument("BridgeSpec: paths must be >= 1000");
    if (!(spec.theta > 0.0)) throw std::invalid_argument("BridgeSpec: theta must be positive");
}

bool near_lattice(double y, double h) {
    const double r = y / h;
    return std::fabs(r - std::round(r)) <= 1e-12 * std::max(1.0, std::fabs(r));
}

}  // namespace

std::vector<BridgeHit> bridge_sample(const BridgeSpec& spec, double lo, double hi) {
    validate_bridge_spec(spec);
    if (!(lo < hi)) throw std::invalid_argument("bridge_sample: need lo < hi");
    if (!(spec.start > lo) || !(spec.start < hi))
        throw std::invalid_argument("bridge_sample: start must lie strictly inside (lo, hi)");
    const BridgeStepper stepper(spec.theta, spec.steps);
    std::vector<BridgeHit> hits(static_cast<std::size_t>(spec.paths));
    for (std::int64_t p = 0; p < spec.paths; ++p) {
        RngStream rng(spec.seed, static_cast<std::uint64_t>(p));
        const TwoBarrier r = stepper.run(spec.start, spec.end, lo, hi, rng);
        hits[static_cast<std::size_t>(p)] = {r.side != 0, r.side < 0, r.time};
    }
    return hits;
}

std::vector<std::vector<double>> bridge_sample_grid(const BridgeSpec& spec) {
    validate_bridge_spec(spec);
    const double dt = spec.theta / static_cast<double>(spec.steps);
    std::vector<std::vector<double>> paths(static_cast<std::size_t>(spec.paths));
    for (std::int64_t p = 0; p < spec.paths; ++p) {
        RngStream rng(spec.seed, static_cast<std::uint64_t>(p));
        auto& path = paths[static_cast<std::size_t>(p)];
        path.resize(static_cast<std::size_t>(spec.steps) + 1);
        path[0] = spec.start;
        double z = spec.start;
        for (std::int64_t i = 0; i < spec.steps; ++i) {
            const double rem = spec.theta - static_cast<double>(i) * dt;
            const double mean = z + dt * (spec.end - z) / rem;
            const double var = dt * (rem - dt) / rem;
            z = mean + (var > 0.0 ? std::sqrt(var) : 0.0) * rng.next_normal();
            path[static_cast<std::size_t>(i) + 1] = z;
        }
        path.back() = spec.end;
    }
    return paths;
}

QEstimate q_estimate(double y, double h, double theta, double sigma, const BridgeSpec& spec) {
    validate_bridge_spec(spec);
    if (!(h > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("q_estimate: h and sigma must be positive");
    const double a = std::fabs(y);  // q is symmetric
    QEstimate out;
    out.paths = spec.paths;
    if (near_lattice(a, h)) {
        const double r = std::round(a / h);
        const bool even = std::fabs(std::remainder(r, 2.0)) < 0.5;
        out.q_hat = even ? 1.0 : 0.0;
        out.ci = 0.0;
        return out;
    }
    const auto m = static_cast<std::int64_t>(std::floor(a / h));
    const double lo = static_cast<double>(m) * h / sigma;
    const double hi = static_cast<double>(m + 1) * h / sigma;
    const bool even_is_lower = (m % 2 == 0);
    const BridgeStepper stepper(theta, spec.steps);
    std::int64_t even_first = 0;
    for (std::int64_t p = 0; p < spec.paths; ++p) {
        RngStream rng(spec.seed, static_cast<std::uint64_t>(p));
        const TwoBarrier r = stepper.run(a / sigma, 0.0, lo, hi, rng);
        const bool lower = r.side <= 0;  // unexited paths terminate at 0 <= lo
        if (lower == even_is_lower) ++even_first;
    }
    out.q_hat = static_cast<double>(even_first) / static_cast<double>(spec.paths);
    out.ci = 3.0 * std::sqrt(out.q_hat * (1.0 - out.q_hat) / static_cast<double>(spec.paths));
    return out;
}

QTable build_qtable(double h, double theta, double sigma, double ymax, double pitch,
                    std::int64_t paths_per_point, std::uint64_t seed, int workers,
                    std::int64_t steps_override) {
    if (!(h > 0.0) || !(theta > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("build_qtable: h, theta, sigma must be positive");
    if (!(pitch > 0.0) || pitch > h / 8.0 * (1.0 + 1e-12))
        throw std::invalid_argument("build_qtable: pitch must be positive and <= h/8");
    std::int64_t steps = steps_override;
    if (steps <= 0) {
        const double gap = h / sigma;
        steps = static_cast<std::int64_t>(std::ceil(64.0 * theta / (gap * gap)));
    }
    steps = std::max<std::int64_t>(steps, 64);
    steps = std::min<std::int64_t>(steps, std::int64_t{1} << 21);

    QTable qt;
    qt.h = h;
    qt.theta = theta;
    qt.sigma = sigma;
    qt.pitch = pitch;
    qt.paths = paths_per_point;
    qt.steps = steps;
    qt.seed = seed;
    const auto count = static_cast<std::int64_t>(std::ceil(ymax / pitch)) + 1;
    qt.y.resize(static_cast<std::size_t>(count));
    qt.q_hat.resize(static_cast<std::size_t>(count));
    qt.ci.resize(static_cast<std::size_t>(count));

    BridgeSpec spec;
    spec.theta = theta;
    spec.steps = steps;
    spec.paths = paths_per_point;

    parallel_chunks(count, 16, workers, [&](std::int64_t, std::int64_t lo_i, std::int64_t hi_i) {
        for (std::int64_t j = lo_i; j < hi_i; ++j) {
            const double yy = static_cast<double>(j) * pitch;
            BridgeSpec local = spec;
            // one base stream block per grid point keeps points independent
            local.seed = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(j + 1);
            const QEstimate est = q_estimate(yy, h, theta, sigma, local);
            qt.y[static_cast<std::size_t>(j)] = yy;
            qt.q_hat[static_cast<std::size_t>(j)] = est.q_hat;
            qt.ci[static_cast<std::size_t>(j)] = est.ci;
        }
    });
    return qt;
}

double super_coef(double beta, double h, double theta, double sigma) {
    const double ratio = h / (sigma * std::sqrt(theta));
    const double first = std::exp(beta * h) * (10.2 + 4.0 * ratio);
    const double bst = beta * sigma * std::sqrt(theta);
    const double second = std::exp(bst * bst) * (1.4 + (3.6 + 1.6 * bst) * ratio + 0.7 * ratio * ratio);
    return std::max(first, second);
}

RhoCheckReport rho_integral_checks(double h, double theta, double sigma, double beta,
                                   const QTable& qt) {
    const double s = sigma * std::sqrt(theta);
    const double need = std::max(h, 8.0 * s);
    if (qt.ymax() < need * (1.0 - 1e-9))
        throw std::invalid_argument("rho_integral_checks: table must cover [0, max(h, 8 sigma sqrt(theta))]");
    if (std::fabs(qt.h - h) > 1e-9 * h || std::fabs(qt.theta - theta) > 1e-9 * theta ||
        std::fabs(qt.sigma - sigma) > 1e-9 * sigma)
        throw std::invalid_argument("rho_integral_checks: table parameters do not match");

    auto rho_abs = [&](double y) { return std::fabs(qt.q(y) - dist_odd(y, h) / h); };
    auto dens = [&](double y) { return gaussian_density(y, theta, sigma); };

    // integrate f over [a,b] along q-grid cells (q and d_o both linear there)
    auto integrate_cells = [&](double a, double b, auto&& f) -> std::pair<double, double> {
        const QuadratureSpec cell_spec{1e-13, 8};
        double val = 0.0, err = 0.0;
        const double pitch = qt.pitch;
        auto j0 = static_cast<std::int64_t>(std::floor(a / pitch + 1e-12));
        auto j1 = static_cast<std::int64_t>(std::ceil(b / pitch - 1e-12));
        for (std::int64_t j = j0; j < j1; ++j) {
            const double ca = std::max(a, static_cast<double>(j) * pitch);
            const double cb = std::min(b, static_cast<double>(j + 1) * pitch);
            if (!(cb > ca)) continue;
            const QuadResult r = adaptive_gk15(f, ca, cb, cell_spec);
            val += r.value;
            err += r.error;
        }
        return {val, err};
    };

    RhoCheckReport rep;
    rep.beta = beta;

    {
        auto f = [&](double y) { return rho_abs(y) * dens(y); };
        auto fu = [&](double y) { return qt.ci_at(y) * dens(y); };
        const auto [v, e] = integrate_cells(0.0, h, f);
        const auto [u, eu] = integrate_cells(0.0, h, fu);
        rep.inner.value = v;
        rep.inner.uncertainty = u + e + eu;
        rep.inner.bound = 5.1 * h / s + 2.0 * h * h / (s * s);
        rep.inner.pass = rep.inner.value <= rep.inner.bound;
    }
    {
        auto f = [&](double y) { return rho_abs(y) * dens(y); };
        auto fu = [&](double y) { return qt.ci_at(y) * dens(y); };
        const auto [v, e] = integrate_cells(h, qt.ymax(), f);
        const auto [u, eu] = integrate_cells(h, qt.ymax(), fu);
        const double tail = normal_cdf(-qt.ymax() / s);  // |rho| <= 1 allowance past the table
        rep.outer.value = v;
        rep.outer.uncertainty = u + e + eu + tail;
        rep.outer.bound = 2.9 * h / s + h * h / (s * s);
        rep.outer.pass = rep.outer.value <= rep.outer.bound;
    }
    {
        const auto m_max = static_cast<std::int64_t>(std::floor(qt.ymax() / (2.0 * h))) - 1;
        double sup = 0.0, sup_unc = 0.0;
        int sup_m = 0;
        for (std::int64_t m = 0; m <= std::max<std::int64_t>(m_max, 0); ++m) {
            auto f = [&](double y) { return std::exp(beta * std::fabs(y)) * rho_abs(y) * dens(y); };
            auto fu = [&](double y) { return std::exp(beta * std::fabs(y)) * qt.ci_at(y) * dens(y); };
            double v, e, u, eu;
            if (m == 0) {
                auto [v0, e0] = integrate_cells(0.0, h, f);
                auto [u0, eu0] = integrate_cells(0.0, h, fu);
                v = 2.0 * v0;
                e = 2.0 * e0;
                u = 2.0 * u0;
                eu = 2.0 * eu0;
            } else {
                const double a = (2.0 * static_cast<double>(m) - 1.0) * h;
                const double b = (2.0 * static_cast<double>(m) + 1.0) * h;
                auto [v0, e0] = integrate_cells(a, b, f);
                auto [u0, eu0] = integrate_cells(a, b, fu);
                v = v0; e = e0; u = u0; eu = eu0;
            }
            if (v > sup) {
                sup = v;
                sup_unc = u + e + eu;
                sup_m = static_cast<int>(m);
            }
        }
        rep.weighted.value = sup;
        rep.weighted.uncertainty = sup_unc;
        rep.weighted.bound = super_coef(beta, h, theta, sigma) * h / s;
        rep.weighted.pass = rep.weighted.value <= rep.weighted.bound;
        rep.sup_window_m = sup_m;
    }
    return rep;
}

}  // namespace heatlab
