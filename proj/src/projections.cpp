#include "heatlab/projections.hpp"

#include <algorithm>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "heatlab/bridge.hpp"
#include "heatlab/special.hpp"

namespace heatlab {

double dist_odd(double x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("dist_odd: h must be positive");
    return std::fabs(std::remainder(x - h, 2.0 * h));
}

double dist_even(double x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("dist_even: h must be positive");
    return std::fabs(std::remainder(x, 2.0 * h));
}

double LatticeLinear::operator()(double x) const {
    if (values.empty()) return 0.0;
    if (values.size() == 1) return values.front();
    const double pos0 = node_pos(k_lo);
    const double u = (x - pos0) / (2.0 * h);
    if (u <= 0.0) return values.front();
    const auto last = static_cast<double>(values.size() - 1);
    if (u >= last) return values.back();
    const auto i = static_cast<std::size_t>(u);
    const double frac = u - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
}

LatticeLinear pi_e(const TerminalCondition& g, double h, std::int64_t k_lo, std::int64_t k_hi) {
    return sample_even([&](double x) { return evaluate(g, x); }, h, k_lo, k_hi);
}

LatticeLinear pi_o(const LatticeLinear& even_fn) {
    if (even_fn.odd) throw std::invalid_argument("pi_o: input must be an even-lattice function");
    LatticeLinear out;
    out.h = even_fn.h;
    out.odd = true;
    out.k_lo = even_fn.k_lo;
    if (even_fn.values.size() >= 2) {
        out.values.reserve(even_fn.values.size() - 1);
        for (std::size_t i = 0; i + 1 < even_fn.values.size(); ++i)
            out.values.push_back(0.5 * (even_fn.values[i] + even_fn.values[i + 1]));
    }
    return out;
}

double QTable::q(double yy) const {
    const double a = std::fabs(yy);
    if (y.size() < 2 || a >= y.back()) return dist_odd(a, h) / h;
    const double u = a / pitch;
    auto i = static_cast<std::size_t>(u);
    if (i + 1 >= y.size()) i = y.size() - 2;
    const double frac = u - static_cast<double>(i);
    return q_hat[i] + frac * (q_hat[i + 1] - q_hat[i]);
}

double QTable::ci_at(double yy) const {
    const double a = std::fabs(yy);
    if (y.size() < 2 || a >= y.back()) {
        // beyond the table the d_o/h fallback is good to O(h / (sigma sqrt(theta)))
        return std::min(1.0, 6.0 * h / (sigma * std::sqrt(theta)));
    }
    const double u = a / pitch;
    auto i = static_cast<std::size_t>(u);
    if (i + 1 >= y.size()) i = y.size() - 2;
    const double frac = u - static_cast<double>(i);
    return ci[i] + frac * (ci[i + 1] - ci[i]);
}

void QTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("QTable::save: cannot open " + path);
    out.precision(17);
    out << "# h=" << h << " theta=" << theta << " sigma=" << sigma << " pitch=" << pitch
        << " paths=" << paths << " steps=" << steps << " seed=" << seed << "\n";
    out << "y,q_hat,ci\n";
    for (std::size_t i = 0; i < y.size(); ++i)
        out << y[i] << "," << q_hat[i] << "," << ci[i] << "\n";
}

QTable QTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("QTable::load: cannot open " + path);
    QTable qt;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw std::runtime_error("QTable::load: missing metadata header");
    {
        std::istringstream meta(line.substr(2));
        std::string kv;
        while (meta >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "h") qt.h = std::stod(val);
            else if (key == "theta") qt.theta = std::stod(val);
            else if (key == "sigma") qt.sigma = std::stod(val);
            else if (key == "pitch") qt.pitch = std::stod(val);
            else if (key == "paths") qt.paths = std::stoll(val);
            else if (key == "steps") qt.steps = std::stoll(val);
            else if (key == "seed") qt.seed = std::stoull(val);
        }
    }
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double vals[3] = {0, 0, 0};
        for (int c = 0; c < 3 && std::getline(row, cell, ','); ++c) vals[c] = std::stod(cell);
        qt.y.push_back(vals[0]);
        qt.q_hat.push_back(vals[1]);
        qt.ci.push_back(vals[2]);
    }
    return qt;
}

LocalErrorDet local_error_deterministic(const TerminalCondition& g, double x0, double h,
                                        double theta, const QTable& qt,
                                        const QuadratureSpec& quad) {
    if (!(h > 0.0) || !(theta > 0.0))
        throw std::invalid_argument("local_error_deterministic: h and theta must be positive");
    if (std::fabs(qt.h - h) > 1e-9 * h || std::fabs(qt.theta - theta) > 1e-9 * theta)
        throw std::invalid_argument("local_error_deterministic: table built for different (h, theta)");
    const double sigma = qt.sigma;
    const double s = sigma * std::sqrt(theta);
    const double window = 12.0 * s + std::fabs(x0);

    const auto k_hi = static_cast<std::int64_t>(std::ceil(window / (2.0 * h))) + 1;
    const std::int64_t k_lo = -k_hi;

    auto gx0 = [&](double u) { return evaluate(g, x0 + u); };
    const LatticeLinear even = sample_even(gx0, h, k_lo, k_hi);
    const LatticeLinear odd = pi_o(even);

    LocalErrorDet out;

    // First expectation: (Pi_e g^{x0} - g^{x0}) against the density. Cell
    // boundaries carry the interpolation kinks and the jump points of g^{x0}
    // so every adaptive segment sees a smooth integrand.
    std::vector<double> cuts;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) cuts.push_back(2.0 * static_cast<double>(k) * h);
    for (const double f : feature_points(g)) {
        const double y = f - x0;
        if (y > cuts.front() && y < cuts.back()) cuts.push_back(y);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const QuadratureSpec cell_spec{quad.abs_tol / (2.0 * static_cast<double>(cuts.size())), 60};
    double e1 = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto f = [&](double x) {
            return (even(x) - gx0(x)) * gaussian_density(x, theta, sigma);
        };
        const QuadResult r = adaptive_gk15(f, cuts[i], cuts[i + 1], cell_spec);
        e1 += r.value;
        out.quad_error += r.error;
        out.converged = out.converged && r.converged;
    }

    // Second expectation: (Pi_o Pi_e - Pi_e) g^{x0} weighted by q, integrated
    // over q-grid subcells (both factors are linear there). The confidence
    // radii go through the same integral with |difference| as weight.
    double e2 = 0.0;
    double unc = 0.0;
    const double pitch = qt.pitch;
    const auto n_sub = static_cast<std::int64_t>(std::ceil(window / pitch));
    const QuadratureSpec sub_spec{quad.abs_tol / (4.0 * static_cast<double>(n_sub)), 8};
    bool tail_extrapolated = false;
    for (std::int64_t j = -n_sub; j < n_sub; ++j) {
        const double a = static_cast<double>(j) * pitch;
        const double b = a + pitch;
        if (std::max(std::fabs(a), std::fabs(b)) > qt.ymax()) tail_extrapolated = true;
        auto fval = [&](double x) {
            return (odd(x) - even(x)) * qt.q(x) * gaussian_density(x, theta, sigma);
        };
        auto func = [&](double x) {
            return std::fabs(odd(x) - even(x)) * qt.ci_at(x) * gaussian_density(x, theta, sigma);
        };
        const QuadResult rv = adaptive_gk15(fval, a, b, sub_spec);
        const QuadResult ru = adaptive_gk15(func, a, b, sub_spec);
        e2 += rv.value;
        unc += ru.value;
        out.quad_error += rv.error;
    }
    if (tail_extrapolated) {
        // table shorter than the quadrature window: only acceptable while the
        // unresolved Gaussian mass is far below the requested tolerance
        const double missing = normal_cdf(-qt.ymax() / s);
        if (missing > 10.0 * quad.abs_tol) out.converged = false;
    }

    out.value = e1 + e2;
    out.uncertainty = unc;
    return out;
}

double gbv_local_error_bound(const GbvFunction& g, double x0, double h, double theta,
                             double sigma, double T) {
    const double beta = g.beta;
    GbvFunction measure_only = g;
    measure_only.jumps.clear();
    const TailNorm tn = gbv_tail_norm(measure_only, beta);
    double atom_part = 0.0;
    for (const std::size_t i : even_lattice_jumps(g, x0, h))
        atom_part += std::fabs(g.jumps[i].weight) * std::exp(-beta * std::fabs(g.jumps[i].location));
    const double variation = tn.value + atom_part;
    const double coef =
        7.0 / std::sqrt(2.0 * 3.141592653589793238) * std::exp(0.5 * beta * beta * sigma * sigma * T) +
        1.5 * super_coef(beta, h, theta, sigma);
    return (h / (sigma * std::sqrt(theta))) * std::exp(3.0 * beta * h + beta * std::fabs(x0)) * coef *
           variation;
}

}  // namespace heatlab
