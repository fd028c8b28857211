#include "heatlab/exit_mc.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "heatlab/parallel.hpp"
#include "heatlab/special.hpp"

namespace heatlab {

namespace {

constexpr double kPi = 3.141592653589793238;
constexpr double kSeriesSwitch = 0.6;

// survival P(tau > t) by reflection images, accurate for small t
double tau_survival_images(double t) {
    const double rt = std::sqrt(t);
    double s = 0.0;
    for (int k = 0;; ++k) {
        const double hi = normal_cdf((1.0 - 2.0 * k) / rt) - normal_cdf((-1.0 - 2.0 * k) / rt);
        const double lo = k == 0 ? 0.0
                                 : normal_cdf((1.0 + 2.0 * k) / rt) - normal_cdf((-1.0 + 2.0 * k) / rt);
        const double term = (k % 2 == 0 ? 1.0 : -1.0) * (k == 0 ? hi : hi + lo);
        s += term;
        if (k > 0 && std::fabs(term) < 1e-17) break;
        if (k > 64) break;
    }
    return s;
}

// survival by the eigenfunction expansion, accurate for large t
double tau_survival_spectral(double t) {
    double s = 0.0;
    for (int j = 0; j <= 64; ++j) {
        const double a = 2.0 * j + 1.0;
        const double ex = a * a * kPi * kPi * t / 8.0;
        if (ex > 745.0) break;
        const double term = (j % 2 == 0 ? 1.0 : -1.0) * 4.0 / (kPi * a) * std::exp(-ex);
        s += term;
        if (std::fabs(term) < 1e-17) break;
    }
    return s;
}

double tau_pdf_images(double t) {
    const double rt = std::sqrt(t);
    const double t32 = t * rt;
    double s = 0.0;
    for (int k = 0;; ++k) {
        const double c1 = 1.0 - 2.0 * k;
        const double c2 = -1.0 - 2.0 * k;
        double term = c1 * normal_pdf(c1 / rt) - c2 * normal_pdf(c2 / rt);
        if (k > 0) {
            const double d1 = 1.0 + 2.0 * k;
            const double d2 = -1.0 + 2.0 * k;
            term += d1 * normal_pdf(d1 / rt) - d2 * normal_pdf(d2 / rt);
        }
        term *= (k % 2 == 0 ? 1.0 : -1.0) / (2.0 * t32);
        s += term;
        if (k > 0 && std::fabs(term) < 1e-18) break;
        if (k > 64) break;
    }
    return s;
}

double tau_pdf_spectral(double t) {
    double s = 0.0;
    for (int j = 0; j <= 64; ++j) {
        const double a = 2.0 * j + 1.0;
        const double ex = a * a * kPi * kPi * t / 8.0;
        if (ex > 745.0) break;
        const double term = (j % 2 == 0 ? 1.0 : -1.0) * kPi / 2.0 * a * std::exp(-ex);
        s += term;
        if (std::fabs(term) < 1e-18) break;
    }
    return s;
}

// Newton inversion of the CDF; start must bracket loosely.
double invert_cdf(double u, double t0) {
    double t = t0;
    for (int it = 0; it < 60; ++it) {
        const double f = tau_unit_cdf(t) - u;
        const double d = tau_unit_pdf(t);
        if (d <= 0.0) break;
        double step = f / d;
        if (step > 0.5 * t) step = 0.5 * t;  // keep t positive
        if (step < -3.0 * std::max(t, 0.25)) step = -3.0 * std::max(t, 0.25);
        t -= step;
        if (std::fabs(step) < 1e-14 * std::max(t, 1.0)) break;
    }
    return t;
}

struct TauTable {
    static constexpr double kULo = 0.01;
    static constexpr double kUHi = 0.99;
    static constexpr int kKnots = 100001;
    double du = 0.0;
    std::vector<double> t;  // knot values
    std::vector<double> d;  // PCHIP slopes dt/du at knots

    TauTable() {
        du = (kUHi - kULo) / static_cast<double>(kKnots - 1);
        t.resize(kKnots);
        d.resize(kKnots);
        double warm = 0.18;  // near the 1% quantile
        for (int i = 0; i < kKnots; ++i) {
            const double u = kULo + du * static_cast<double>(i);
            warm = invert_cdf(u, warm);
            t[static_cast<std::size_t>(i)] = warm;
        }
        // Fritsch-Carlson monotone slopes on the uniform grid
        std::vector<double> sec(kKnots - 1);
        for (int i = 0; i + 1 < kKnots; ++i)
            sec[static_cast<std::size_t>(i)] =
                (t[static_cast<std::size_t>(i + 1)] - t[static_cast<std::size_t>(i)]) / du;
        d[0] = sec[0];
        d[static_cast<std::size_t>(kKnots - 1)] = sec[static_cast<std::size_t>(kKnots - 2)];
        for (int i = 1; i + 1 < kKnots; ++i) {
            const double s0 = sec[static_cast<std::size_t>(i - 1)];
            const double s1 = sec[static_cast<std::size_t>(i)];
            d[static_cast<std::size_t>(i)] =
                (s0 * s1 <= 0.0) ? 0.0 : 2.0 * s0 * s1 / (s0 + s1);  // harmonic mean
        }
    }

    double eval(double u) const {
        const double x = (u - kULo) / du;
        auto i = static_cast<std::size_t>(x);
        if (i >= static_cast<std::size_t>(kKnots - 1)) i = kKnots - 2;
        const double r = x - static_cast<double>(i);
        const double r2 = r * r;
        const double r3 = r2 * r;
        return t[i] * (2.0 * r3 - 3.0 * r2 + 1.0) + d[i] * du * (r3 - 2.0 * r2 + r) +
               t[i + 1] * (-2.0 * r3 + 3.0 * r2) + d[i + 1] * du * (r3 - r2);
    }
};

const TauTable& tau_table() {
    static const TauTable table;
    return table;
}

}  // namespace

double tau_unit_cdf(double t) {
    if (t <= 0.0) return 0.0;
    return 1.0 - (t < kSeriesSwitch ? tau_survival_images(t) : tau_survival_spectral(t));
}

double tau_unit_pdf(double t) {
    if (t <= 0.0) return 0.0;
    return t < kSeriesSwitch ? tau_pdf_images(t) : tau_pdf_spectral(t);
}

double tau_unit_quantile(double u) {
    if (!(u > 0.0) || !(u < 1.0)) throw std::invalid_argument("tau_unit_quantile: u in (0,1)");
    if (u < TauTable::kULo) {
        // small-t start from P(tau <= t) ~ 4 Phi(-1/sqrt(t))
        const double q = normal_quantile(u / 4.0);
        return invert_cdf(u, 1.0 / (q * q));
    }
    if (u > TauTable::kUHi) {
        // large-t start from 1 - F(t) ~ (4/pi) e^{-pi^2 t/8}
        const double t0 = 8.0 / (kPi * kPi) * std::log(4.0 / (kPi * (1.0 - u)));
        return invert_cdf(u, t0);
    }
    return invert_cdf(u, tau_table().eval(u));
}

double sample_tau_unit(RngStream& rng) {
    const double u = rng.next_open();
    if (u < TauTable::kULo) {
        const double q = normal_quantile_fast(u / 4.0);
        const double t0 = 1.0 / (q * q);
        // two Newton polish steps on the series CDF
        double t = t0;
        for (int it = 0; it < 2; ++it) {
            const double d = tau_unit_pdf(t);
            if (d <= 0.0) break;
            double step = (tau_unit_cdf(t) - u) / d;
            if (step > 0.5 * t) step = 0.5 * t;
            t -= step;
        }
        return t;
    }
    if (u > TauTable::kUHi) {
        double t = 8.0 / (kPi * kPi) * std::log(4.0 / (kPi * (1.0 - u)));
        for (int it = 0; it < 2; ++it) {
            const double d = tau_unit_pdf(t);
            if (d <= 0.0) break;
            t -= (tau_unit_cdf(t) - u) / d;
        }
        return t;
    }
    return tau_table().eval(u);
}

void simulate_walk(double t, const LatticeParams& lp, RngStream& rng, ExitWalkPath& out,
                   bool store_increments) {
    const ThetaIndex ti = theta_of(t, lp);
    const double h = lp.h();
    const double scale = lp.T / static_cast<double>(lp.n);  // (h/sigma)^2
    out.dtau.clear();
    out.dx.clear();
    out.J = -1;
    out.L = 0;
    out.X_at_ntheta = 0.0;
    out.X_at_J = 0.0;
    out.tau_at_J = 0.0;

    double tau = 0.0;
    double x = 0.0;
    std::int64_t k = 0;
    while (k < ti.n_theta || out.J < 0) {
        ++k;
        const double dt = sample_tau_unit(rng) * scale;
        const double dx = rng.next_sign() > 0 ? h : -h;
        tau += dt;
        x += dx;
        if (store_increments) {
            out.dtau.push_back(dt);
            out.dx.push_back(dx);
        }
        if (tau < ti.theta_n) out.L = k;
        if (out.J < 0 && (k % 2) == 0 && tau > ti.theta_n) {
            out.J = k;
            out.X_at_J = x;
            out.tau_at_J = tau;
        }
        if (k == ti.n_theta) out.X_at_ntheta = x;
    }
}

namespace {

struct ChunkSums {
    double v = 0.0;
    double vv = 0.0;
};

McEstimate merge_mean(const std::vector<ChunkSums>& sums, std::int64_t paths) {
    double sv = 0.0, svv = 0.0;
    for (const auto& c : sums) {
        sv += c.v;
        svv += c.vv;
    }
    McEstimate est;
    est.paths = paths;
    est.mean = sv / static_cast<double>(paths);
    const double var =
        std::max(0.0, svv / static_cast<double>(paths) - est.mean * est.mean);
    est.std_error = std::sqrt(var / static_cast<double>(paths > 1 ? paths - 1 : 1));
    return est;
}

}  // namespace

McEstimate global_error_mc(const TerminalCondition& g, double x0, double t,
                           const LatticeParams& lp, std::int64_t paths, std::uint64_t seed,
                           int workers) {
    if (paths < 1000) throw std::invalid_argument("global_error_mc: paths must be >= 1000");
    std::vector<ChunkSums> sums(static_cast<std::size_t>(chunk_count(paths)));
    parallel_chunks(paths, kDefaultChunk, workers, [&](std::int64_t c, std::int64_t lo, std::int64_t hi) {
        ExitWalkPath path;
        ChunkSums acc;
        for (std::int64_t p = lo; p < hi; ++p) {
            RngStream rng(seed, static_cast<std::uint64_t>(p));
            simulate_walk(t, lp, rng, path);
            const double v1 = evaluate(g, x0 + path.X_at_ntheta) - evaluate(g, x0 + path.X_at_J);
            const double v2 = evaluate(g, x0 - path.X_at_ntheta) - evaluate(g, x0 - path.X_at_J);
            const double v = 0.5 * (v1 + v2);  // antithetic in the signs
            acc.v += v;
            acc.vv += v * v;
        }
        sums[static_cast<std::size_t>(c)] = acc;
    });
    return merge_mean(sums, paths);
}

McEstimate local_error_mc(const TerminalCondition& g, double x0, double t,
                          const LatticeParams& lp, std::int64_t paths, std::uint64_t seed,
                          int workers) {
    if (paths < 1000) throw std::invalid_argument("local_error_mc: paths must be >= 1000");
    const ThetaIndex ti = theta_of(t, lp);
    const HeatParams hp{lp.T, lp.sigma};
    const EvalResult exact = u_exact(g, lp.T - ti.theta_n, x0, hp, QuadratureSpec{1e-12, 4000});
    std::vector<ChunkSums> sums(static_cast<std::size_t>(chunk_count(paths)));
    parallel_chunks(paths, kDefaultChunk, workers, [&](std::int64_t c, std::int64_t lo, std::int64_t hi) {
        ExitWalkPath path;
        ChunkSums acc;
        for (std::int64_t p = lo; p < hi; ++p) {
            RngStream rng(seed, static_cast<std::uint64_t>(p));
            simulate_walk(t, lp, rng, path);
            const double v =
                0.5 * (evaluate(g, x0 + path.X_at_J) + evaluate(g, x0 - path.X_at_J));
            acc.v += v;
            acc.vv += v * v;
        }
        sums[static_cast<std::size_t>(c)] = acc;
    });
    McEstimate est = merge_mean(sums, paths);
    est.mean -= exact.value;
    return est;
}

JnMomentReport jn_moment_report(double t, const LatticeParams& lp, std::int64_t paths,
                                std::uint64_t seed, int workers) {
    if (paths < 10000) throw std::invalid_argument("jn_moment_report: paths must be >= 10^4");
    const ThetaIndex ti = theta_of(t, lp);

    struct Acc {
        double d = 0, d2 = 0, d4 = 0, ad = 0;
        double tg = 0, tg2 = 0;
        double j = 0, v = 0, jv = 0, j2 = 0, v2 = 0, jv2 = 0, jvj = 0, jvv = 0;
        double tail = 0;
    };
    const double tail_threshold = std::pow(static_cast<double>(ti.n_theta), 0.6);
    std::vector<Acc> sums(static_cast<std::size_t>(chunk_count(paths)));
    parallel_chunks(paths, kDefaultChunk, workers, [&](std::int64_t c, std::int64_t lo, std::int64_t hi) {
        ExitWalkPath path;
        Acc a;
        for (std::int64_t p = lo; p < hi; ++p) {
            RngStream rng(seed, static_cast<std::uint64_t>(p));
            simulate_walk(t, lp, rng, path);
            const double dgap = static_cast<double>(path.J - ti.n_theta);
            if (std::fabs(dgap) > tail_threshold) a.tail += 1.0;
            const double tgap = path.tau_at_J - ti.theta_n;
            const double jv = static_cast<double>(path.J) * path.tau_at_J;
            a.d += dgap;
            a.d2 += dgap * dgap;
            a.d4 += dgap * dgap * dgap * dgap;
            a.ad += std::fabs(dgap);
            a.tg += tgap;
            a.tg2 += tgap * tgap;
            a.j += static_cast<double>(path.J);
            a.v += path.tau_at_J;
            a.jv += jv;
            a.j2 += static_cast<double>(path.J) * static_cast<double>(path.J);
            a.v2 += path.tau_at_J * path.tau_at_J;
            a.jv2 += jv * jv;
            a.jvj += jv * static_cast<double>(path.J);
            a.jvv += jv * path.tau_at_J;
        }
        sums[static_cast<std::size_t>(c)] = a;
    });

    Acc tot;
    for (const auto& a : sums) {
        tot.d += a.d; tot.d2 += a.d2; tot.d4 += a.d4; tot.ad += a.ad;
        tot.tg += a.tg; tot.tg2 += a.tg2;
        tot.j += a.j; tot.v += a.v; tot.jv += a.jv;
        tot.j2 += a.j2; tot.v2 += a.v2; tot.jv2 += a.jv2; tot.jvj += a.jvj; tot.jvv += a.jvv;
        tot.tail += a.tail;
    }
    const double n = static_cast<double>(paths);
    const double nt = static_cast<double>(ti.n_theta);

    JnMomentReport rep;
    rep.n_theta = ti.n_theta;
    rep.theta_n = ti.theta_n;
    rep.paths = paths;
    rep.mean_j_gap = tot.d / n;
    rep.mean_j_gap_se = std::sqrt(std::max(0.0, tot.d2 / n - rep.mean_j_gap * rep.mean_j_gap) / n);
    rep.second_moment_scaled = tot.d2 / n / nt;
    {
        const double m = tot.d2 / n;
        const double var = std::max(0.0, tot.d4 / n - m * m);
        rep.second_moment_se = std::sqrt(var / n) / nt;
    }
    rep.mean_tau_gap = tot.tg / n;
    rep.mean_tau_gap_se =
        std::sqrt(std::max(0.0, tot.tg2 / n - rep.mean_tau_gap * rep.mean_tau_gap) / n);
    rep.abs_moment_scaled[0] = tot.ad / n / std::sqrt(nt);
    rep.abs_moment_scaled[1] = tot.d2 / n / nt;
    rep.abs_moment_scaled[2] = tot.d4 / n / (nt * nt);

    // factorization gap with a delta-method standard error
    const double mj = tot.j / n;
    const double mv = tot.v / n;
    const double mjv = tot.jv / n;
    rep.factorization_gap = mjv - mj * mv;
    {
        const double c11 = tot.jv2 / n - mjv * mjv;
        const double c22 = tot.j2 / n - mj * mj;
        const double c33 = tot.v2 / n - mv * mv;
        const double c12 = tot.jvj / n - mjv * mj;
        const double c13 = tot.jvv / n - mjv * mv;
        const double c23 = tot.jv / n - mj * mv;  // Cov(J, tau_J) estimate
        const double g1 = 1.0, g2 = -mv, g3 = -mj;
        const double var = g1 * g1 * c11 + g2 * g2 * c22 + g3 * g3 * c33 +
                           2.0 * (g1 * g2 * c12 + g1 * g3 * c13 + g2 * g3 * c23);
        rep.factorization_gap_se = std::sqrt(std::max(0.0, var) / n);
    }
    rep.tail35_frequency = tot.tail / n;
    rep.tail35_scaled = rep.tail35_frequency * nt * nt;
    return rep;
}

McEstimate tail_frequency(double t, const LatticeParams& lp, double delta, std::int64_t paths,
                          std::uint64_t seed, int workers) {
    const ThetaIndex ti = theta_of(t, lp);
    const double threshold = static_cast<double>(ti.n_theta) * (1.0 + delta);
    std::vector<ChunkSums> sums(static_cast<std::size_t>(chunk_count(paths)));
    parallel_chunks(paths, kDefaultChunk, workers, [&](std::int64_t c, std::int64_t lo, std::int64_t hi) {
        ExitWalkPath path;
        ChunkSums acc;
        for (std::int64_t p = lo; p < hi; ++p) {
            RngStream rng(seed, static_cast<std::uint64_t>(p));
            simulate_walk(t, lp, rng, path);
            const double v = static_cast<double>(path.J) > threshold ? 1.0 : 0.0;
            acc.v += v;
            acc.vv += v;
        }
        sums[static_cast<std::size_t>(c)] = acc;
    });
    return merge_mean(sums, paths);
}

double h_function(double x) {
    if (!(x > 0.0) || !(x < kPi / 2.0)) throw std::invalid_argument("h_function: x in (0, pi/2)");
    if (x < 0.1) {
        // 1/2 - (2/15) x^2 - (17/420) x^4 - ... from the log cos expansion
        const double x2 = x * x;
        return 0.5 - (2.0 / 15.0) * x2 - (17.0 / 420.0) * x2 * x2;
    }
    const double x2 = x * x;
    return 1.0 + 6.0 / (x2 * x2) * (0.5 * x2 + std::log(std::cos(x)));
}

TailBound tail_bound_rhs(double delta, std::int64_t n_theta) {
    const double dmax = kPi * kPi / (12.0 + kPi * kPi);
    if (!(delta > 0.0) || !(delta < dmax))
        throw std::invalid_argument("tail_bound_rhs: delta outside (0, pi^2/(12+pi^2))");
    const double nt = static_cast<double>(n_theta);
    auto check_integer = [&](double v) {
        if (std::fabs(v - std::round(v)) > 1e-9)
            throw std::invalid_argument("tail_bound_rhs: n_theta (1 +- delta) must be an integer");
    };
    check_integer(nt * (1.0 + delta));
    check_integer(nt * (1.0 - delta));
    TailBound tb;
    const double xu = std::sqrt(3.0 * delta / (1.0 + delta));
    const double xl = std::sqrt(3.0 * delta / (1.0 - delta));
    tb.upper = std::exp(-1.5 * nt * delta * delta / (1.0 + delta) * h_function(xu));
    tb.lower = std::exp(-1.5 * nt * delta * delta / (1.0 - delta) * h_function(xl));
    return tb;
}

}  // namespace heatlab
