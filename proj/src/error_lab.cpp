#include "heatlab/error_lab.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "heatlab/parallel.hpp"

namespace heatlab {

std::shared_ptr<const QTable> qtable_for(double h, double theta, double sigma,
                                         std::int64_t paths, std::uint64_t seed, int workers,
                                         bool fresh) {
    using Key = std::tuple<double, double, double, std::int64_t, std::uint64_t>;
    static std::mutex mtx;
    static std::map<Key, std::shared_ptr<const QTable>> cache;
    const Key key{h, theta, sigma, paths, seed};
    if (!fresh) {
        std::lock_guard lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    const double ymax = 8.0 * sigma * std::sqrt(theta);
    auto table = std::make_shared<QTable>(
        build_qtable(h, theta, sigma, ymax, h / 8.0, paths, seed, workers));
    std::lock_guard lock(mtx);
    cache[key] = table;
    return table;
}

std::vector<ErrorReport> decompose_batch(std::span<const TerminalCondition> gs, double t,
                                         double x, const LatticeParams& lp,
                                         const McBudget& budget) {
    const ThetaIndex ti = theta_of(t, lp);
    const HeatParams hp{lp.T, lp.sigma};
    const QuadratureSpec quad{1e-11, 4000};
    const double h = lp.h();
    const double tk = lp.t_k(ti.k);
    const bool on_lattice = (t == tk);

    const auto qt = qtable_for(h, ti.theta_n, lp.sigma, budget.q_paths, budget.seed ^ 0x5bd1e995u,
                               budget.workers, budget.fresh_tables);

    // one walk population shared by every terminal condition
    const std::size_t n_g = gs.size();
    struct Acc {
        std::vector<double> v, vv;
    };
    const std::int64_t n_chunks = chunk_count(budget.glob_paths);
    std::vector<Acc> sums(static_cast<std::size_t>(n_chunks));
    parallel_chunks(budget.glob_paths, kDefaultChunk, budget.workers,
                    [&](std::int64_t c, std::int64_t lo, std::int64_t hi) {
        Acc acc;
        acc.v.assign(n_g, 0.0);
        acc.vv.assign(n_g, 0.0);
        ExitWalkPath path;
        for (std::int64_t p = lo; p < hi; ++p) {
            RngStream rng(budget.seed, static_cast<std::uint64_t>(p));
            simulate_walk(t, lp, rng, path);
            for (std::size_t i = 0; i < n_g; ++i) {
                const double v1 =
                    evaluate(gs[i], x + path.X_at_ntheta) - evaluate(gs[i], x + path.X_at_J);
                const double v2 =
                    evaluate(gs[i], x - path.X_at_ntheta) - evaluate(gs[i], x - path.X_at_J);
                const double v = 0.5 * (v1 + v2);
                acc.v[i] += v;
                acc.vv[i] += v * v;
            }
        }
        sums[static_cast<std::size_t>(c)] = std::move(acc);
    });

    std::vector<ErrorReport> reports(n_g);
    for (std::size_t i = 0; i < n_g; ++i) {
        ErrorReport rep;
        rep.t = t;
        rep.x = x;
        rep.n = lp.n;
        rep.n_theta = ti.n_theta;
        rep.theta_n = ti.theta_n;
        rep.on_lattice = on_lattice;

        const EvalResult u_t = u_exact(gs[i], t, x, hp, quad);
        rep.total = un_binomial(gs[i], t, x, lp) - u_t.value;
        rep.quad_tol += u_t.abs_error;
        rep.converged = rep.converged && u_t.converged;

        if (on_lattice) {
            rep.adj = 0.0;
        } else {
            const EvalResult u_k = u_exact(gs[i], tk, x, hp, quad);
            rep.adj = u_k.value - u_t.value;
            rep.quad_tol += u_k.abs_error + u_t.abs_error;
            rep.converged = rep.converged && u_k.converged;
        }

        const LocalErrorDet loc = local_error_deterministic(gs[i], x, h, ti.theta_n, *qt, quad);
        rep.loc = loc.value;
        rep.loc_unc = loc.uncertainty;
        rep.quad_tol += loc.quad_error;
        rep.converged = rep.converged && loc.converged;

        double sv = 0.0, svv = 0.0;
        for (const auto& a : sums) {
            sv += a.v[i];
            svv += a.vv[i];
        }
        const double paths = static_cast<double>(budget.glob_paths);
        rep.glob = sv / paths;
        const double var = std::max(0.0, svv / paths - rep.glob * rep.glob);
        rep.glob_unc = 3.0 * std::sqrt(var / std::max(paths - 1.0, 1.0));

        rep.residual = rep.total - rep.adj - rep.loc - rep.glob;
        reports[i] = rep;
    }
    return reports;
}

ErrorReport decompose(const TerminalCondition& g, double t, double x, const LatticeParams& lp,
                      const McBudget& budget) {
    return decompose_batch(std::span<const TerminalCondition>{&g, 1}, t, x, lp, budget)[0];
}

RateFit rate_study(const TerminalCondition& g, double t, double x, double T, double sigma,
                   std::span<const std::int64_t> n_list, const QuadratureSpec& quad) {
    if (n_list.size() < 5) throw std::invalid_argument("rate_study: need at least 5 lattice sizes");
    RateFit fit;
    bool pos = false, neg = false;
    for (const std::int64_t n : n_list) {
        const LatticeParams lp(n, T, sigma);
        const EvalResult err = total_error(g, t, x, lp, quad);
        fit.n.push_back(n);
        fit.abs_err.push_back(std::fabs(err.value));
        const double floor = 10.0 * (1e-14 + err.abs_error);
        const bool usable = std::fabs(err.value) > floor;
        fit.used.push_back(usable);
        if (usable) (err.value > 0.0 ? pos : neg) = true;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int m = 0;
    for (std::size_t i = 0; i < fit.n.size(); ++i) {
        if (!fit.used[i]) continue;
        const double lx = std::log(static_cast<double>(fit.n[i]));
        const double ly = std::log(fit.abs_err[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
        ++m;
    }
    fit.points_used = m;
    fit.degenerate = (m < 5) || (pos && neg);
    if (m >= 2) {
        const double dm = static_cast<double>(m);
        const double denom = dm * sxx - sx * sx;
        fit.slope = (dm * sxy - sx * sy) / denom;
        fit.intercept = (sy - fit.slope * sx) / dm;
        const double ss_tot = syy - sy * sy / dm;
        const double ss_res = ss_tot - fit.slope * (sxy - sx * sy / dm);
        fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    }
    return fit;
}

std::vector<SharpnessRow> sharpness_run(std::span<const std::int64_t> n_list) {
    const TerminalCondition g = make_indicator(0.0);
    std::vector<SharpnessRow> rows;
    rows.reserve(n_list.size());
    for (const std::int64_t n : n_list) {
        const LatticeParams lp(n, 1.0, 1.0);
        SharpnessRow row;
        row.n = n;
        row.eps = total_error(g, 0.0, 0.0, lp).value;
        row.sqrt_n_eps = std::sqrt(static_cast<double>(n)) * row.eps;
        rows.push_back(row);
    }
    return rows;
}

std::vector<BlowupRow> blowup_profile(const TerminalCondition& g, const LatticeParams& lp,
                                      std::span<const double> t_values, double x,
                                      const QuadratureSpec& quad) {
    const HeatParams hp{lp.T, lp.sigma};
    const GrowthEnvelope env = growth_envelope(g);
    std::vector<BlowupRow> rows;
    rows.reserve(t_values.size());
    for (const double t : t_values) {
        const ThetaIndex ti = theta_of(t, lp);
        const double tk = lp.t_k(ti.k);
        BlowupRow row;
        row.t = t;
        row.n_theta = ti.n_theta;
        row.on_lattice = (t == tk);
        const EvalResult err = total_error(g, t, x, lp, quad);
        row.eps = err.value;
        const double n = static_cast<double>(lp.n);
        row.envelope = row.on_lattice
                           ? 1.0 / std::sqrt(n * (lp.T - tk))
                           : 1.0 / (std::sqrt(n) * (lp.T - t));
        row.scaled_ratio = std::fabs(row.eps) / row.envelope;
        if (row.on_lattice) {
            row.adj = 0.0;
            row.adj_bound = 0.0;
        } else {
            const EvalResult u_k = u_exact(g, tk, x, hp, quad);
            const EvalResult u_t = u_exact(g, t, x, hp, quad);
            row.adj = u_k.value - u_t.value;
            row.adj_bound = 8.0 * env.A * lp.T / (n * (lp.T - t)) *
                            std::exp(env.b * std::fabs(x) +
                                     env.b * env.b * lp.sigma * lp.sigma * lp.T);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<HolderProbeRow> holder_uniform_probe(const TerminalCondition& g, double T,
                                                 double sigma,
                                                 std::span<const std::int64_t> n_list, double x,
                                                 const QuadratureSpec& quad) {
    const auto* hg = std::get_if<HolderFunction>(&g);
    if (hg == nullptr) throw std::invalid_argument("holder_uniform_probe: g must be a Hoelder entry");
    const double alpha = hg->alpha;
    std::vector<HolderProbeRow> rows;
    for (const std::int64_t n : n_list) {
        const LatticeParams lp(n, T, sigma);
        // lattice points spread over [0, T) plus off-lattice midpoints and the
        // last two cells near T
        std::vector<double> ts;
        for (const std::int64_t k :
             {std::int64_t{0}, n / 8, n / 4, 3 * n / 8, n / 2 - 2, n / 2 - 1}) {
            if (k < 0 || k >= n / 2) continue;
            const double tk = lp.t_k(k);
            ts.push_back(tk);
            ts.push_back(tk + 0.37 * 2.0 * T / static_cast<double>(n));  // off-lattice
        }
        HolderProbeRow row;
        row.n = n;
        for (const double t : ts) {
            if (!(t >= 0.0) || !(t < T)) continue;
            const double e = std::fabs(total_error(g, t, x, lp, quad).value);
            row.sup_eps = std::max(row.sup_eps, e);
        }
        row.sup_scaled = row.sup_eps * std::pow(static_cast<double>(n), alpha / 4.0);
        rows.push_back(row);
    }
    return rows;
}

std::vector<CatalogEntry> default_catalog(const LatticeParams& lp) {
    std::vector<CatalogEntry> cat;
    cat.push_back({"indicator", make_indicator(0.0)});
    cat.push_back({"sign", make_sign()});
    cat.push_back({"x2", make_x_squared()});
    cat.push_back({"sawtooth", make_sawtooth()});
    cat.push_back({"abs_sqrt", make_abs_sqrt(0.0)});
    cat.push_back({"abs_sqrt_off", make_abs_sqrt(lp.h() / 3.0)});
    cat.push_back({"sin", make_sine()});
    return cat;
}

}  // namespace heatlab
