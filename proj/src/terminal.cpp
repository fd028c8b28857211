#include "heatlab/terminal.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "heatlab/quadrature.hpp"

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Signed measure of (a,b] restricted to one component, a <= b. Endpoint
// handling for point masses is resolved by the caller; this helper treats
// density pieces only (endpoints carry no mass there).
double density_measure(const DensityPiece& p, double a, double b) {
    const double lo = std::max(a, p.lo);
    const double hi = std::min(b, p.hi);
    if (!(hi > lo)) return 0.0;
    return p.integral(lo, hi);
}

// nu(x) = mu([0,x]) for x >= 0, -mu((x,0)) for x < 0 (measure part only).
double measure_cdf(const GbvFunction& g, double x) {
    double nu = 0.0;
    for (const auto& comp : g.mu) {
        if (const auto* pm = std::get_if<PointMass>(&comp)) {
            if (x >= 0.0) {
                if (pm->at >= 0.0 && pm->at <= x) nu += pm->mass;
            } else {
                if (pm->at > x && pm->at < 0.0) nu -= pm->mass;
            }
        } else {
            const auto& dp = std::get<DensityPiece>(comp);
            if (x >= 0.0) {
                nu += density_measure(dp, 0.0, x);
            } else {
                nu -= density_measure(dp, x, 0.0);
            }
        }
    }
    return nu;
}

double poly_abs_bound(const std::vector<double>& coeffs, double r) {
    // bound for |p(y)| over |y| <= r (r >= 1 assumed by callers)
    double bound = 0.0;
    double pw = 1.0;
    for (double c : coeffs) {
        bound += std::fabs(c) * pw;
        pw *= r;
    }
    return bound;
}

// int_R^inf r^d e^{-beta r} dr type bound for the truncation search.
double exp_poly_tail(const std::vector<double>& coeffs, double beta, double R) {
    // |p(y)| <= poly_abs_bound(coeffs, y) <= C y^d for y >= max(R,1)
    const std::size_t d = coeffs.empty() ? 0 : coeffs.size() - 1;
    double cmax = 0.0;
    for (double c : coeffs) cmax += std::fabs(c);
    // int_R^inf y^d e^{-beta y} dy = e^{-beta R} sum_{j=0..d} (d!/j!) R^j / beta^{d+1-j}
    double sum = 0.0;
    double fact = 1.0;  // d!/j! built from j = d downwards
    double rj = std::pow(R, static_cast<double>(d));
    double bpow = 1.0 / beta;
    for (std::size_t j = 0; j <= d; ++j) {
        sum += fact * rj * bpow;
        fact *= static_cast<double>(d - j);
        if (R > 0.0) rj /= R;
        bpow /= beta;
    }
    return cmax * std::exp(-beta * R) * sum;
}

}  // namespace

double DensityPiece::eval(double y) const {
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * y + coeffs[i];
    return v;
}

double DensityPiece::integral(double a, double b) const {
    if (!(b > a)) return 0.0;
    double va = 0.0, vb = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) {
        const double k = static_cast<double>(i) + 1.0;
        va = va * a + coeffs[i] / k;
        vb = vb * b + coeffs[i] / k;
    }
    return vb * b - va * a;
}

double HolderFunction::eval(double x) const {
    switch (kind) {
        case HolderKind::abs_pow: return std::pow(std::fabs(x - shift), alpha);
        case HolderKind::sin_wave: return std::sin(omega * x);
    }
    return 0.0;
}

double EbFunction::eval(double x) const {
    switch (kind) {
        case EbKind::poly: {
            double v = 0.0;
            for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
            return v;
        }
        case EbKind::cos_scaled:
            return coeffs.at(0) * std::cos(coeffs.at(1) * x);
    }
    return 0.0;
}

double evaluate(const GbvFunction& g, double x) {
    double v = g.c + measure_cdf(g, x);
    for (const auto& j : g.jumps)
        if (j.location == x) v += j.weight;
    return v;
}

double evaluate(const TerminalCondition& g, double x) {
    return std::visit([x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GbvFunction>) return evaluate(f, x);
        else return f.eval(x);
    }, g);
}

TailNorm gbv_tail_norm(const GbvFunction& g, double beta) {
    if (beta < 0.0) throw std::invalid_argument("gbv_tail_norm: beta must be >= 0");
    TailNorm out;
    double total = 0.0;
    for (const auto& j : g.jumps) total += std::fabs(j.weight) * std::exp(-beta * std::fabs(j.location));

    std::size_t n_pieces = 0;
    for (const auto& comp : g.mu)
        if (std::holds_alternative<DensityPiece>(comp)) ++n_pieces;
    const double piece_tol = n_pieces == 0 ? 1e-10 : 1e-10 / static_cast<double>(n_pieces);

    for (const auto& comp : g.mu) {
        if (const auto* pm = std::get_if<PointMass>(&comp)) {
            total += std::fabs(pm->mass) * std::exp(-beta * std::fabs(pm->at));
            continue;
        }
        const auto& dp = std::get<DensityPiece>(comp);
        bool nonzero = false;
        for (double c : dp.coeffs) nonzero = nonzero || c != 0.0;
        if (!nonzero) continue;

        double lo = dp.lo, hi = dp.hi;
        if (std::isinf(lo) || std::isinf(hi)) {
            if (beta <= 0.0) {
                out.converged = false;
                continue;
            }
            // find a radius beyond which the weighted tail is negligible
            double r = 16.0 / beta + 16.0;
            int guard = 0;
            while (exp_poly_tail(dp.coeffs, beta, r) > 0.05 * piece_tol && guard++ < 200) r *= 1.5;
            lo = std::max(lo, -r);
            hi = std::min(hi, r);
        }
        auto integrand = [&](double y) { return std::exp(-beta * std::fabs(y)) * std::fabs(dp.eval(y)); };
        QuadratureSpec spec{piece_tol, 4000};
        // split at 0 so the |y| kink sits on a cell boundary
        QuadResult r1, r2;
        if (lo < 0.0 && hi > 0.0) {
            r1 = adaptive_gk15(integrand, lo, 0.0, spec);
            r2 = adaptive_gk15(integrand, 0.0, hi, spec);
        } else {
            r1 = adaptive_gk15(integrand, lo, hi, spec);
        }
        if (!r1.converged || !r2.converged) out.converged = false;
        total += r1.value + r2.value;
    }
    out.value = total;
    return out;
}

GbvFunction shift(const GbvFunction& g, double x0) {
    GbvFunction out;
    out.beta = g.beta;
    double mass_at_x0 = 0.0;
    out.mu.reserve(g.mu.size());
    for (const auto& comp : g.mu) {
        if (const auto* pm = std::get_if<PointMass>(&comp)) {
            if (pm->at == x0) mass_at_x0 += pm->mass;
            out.mu.push_back(PointMass{pm->mass, pm->at - x0});
        } else {
            auto dp = std::get<DensityPiece>(comp);
            // density in the shifted variable: f'(u) = f(x0 + u)
            // re-expand polynomial around the shift
            std::vector<double> shifted(dp.coeffs.size(), 0.0);
            // p(x0 + u) via Horner in (x0 + u): synthetic Taylor shift
            std::vector<double> cs = dp.coeffs;
            for (std::size_t i = 0; i < shifted.size(); ++i) {
                // evaluate derivative i at x0 / i!
                double v = 0.0;
                for (std::size_t k = cs.size(); k-- > 0;) v = v * x0 + cs[k];
                shifted[i] = v;
                // differentiate cs and divide by (i+1)
                for (std::size_t k = 1; k < cs.size(); ++k)
                    cs[k - 1] = cs[k] * static_cast<double>(k) / static_cast<double>(i + 1);
                if (!cs.empty()) cs.pop_back();
            }
            dp.coeffs = std::move(shifted);
            dp.lo = dp.lo - x0;
            dp.hi = dp.hi - x0;
            out.mu.push_back(std::move(dp));
        }
    }
    out.jumps.reserve(g.jumps.size());
    for (const auto& j : g.jumps) out.jumps.push_back({j.weight, j.location - x0});
    // A mass that lands exactly at the new origin re-enters through the
    // translated component, so it is removed from the absorbed constant.
    out.c = g.c + measure_cdf(g, x0) - mass_at_x0;
    return out;
}

std::vector<std::size_t> even_lattice_jumps(const GbvFunction& g, double x0, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("even_lattice_jumps: h must be positive");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < g.jumps.size(); ++i) {
        const double r = (g.jumps[i].location - x0) / (2.0 * h);
        const double nearest = std::round(r);
        if (std::fabs(r - nearest) <= 1e-12 * std::max(1.0, std::fabs(r))) idx.push_back(i);
    }
    return idx;
}

GrowthEnvelope growth_envelope(const TerminalCondition& g) {
    return std::visit([](const auto& f) -> GrowthEnvelope {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GbvFunction>) {
            const TailNorm tn = gbv_tail_norm(f, f.beta);
            if (!tn.converged)
                throw std::domain_error("growth_envelope: weighted variation diverges for stored beta");
            return {std::fabs(f.c) + tn.value, f.beta};
        } else if constexpr (std::is_same_v<T, HolderFunction>) {
            // |g(x)| <= A |x|^alpha e^{beta|x|} + |g(0)| and
            // |x|^alpha <= (alpha/e)^alpha e^{|x|}  (delta = 1)
            const double factor = std::pow(f.alpha / 2.718281828459045235, f.alpha);
            return {f.A * factor + std::fabs(f.eval(0.0)), f.beta + 1.0};
        } else {
            return {f.A, f.b};
        }
    }, g);
}

std::vector<double> feature_points(const TerminalCondition& g) {
    std::vector<double> pts;
    if (const auto* gbv = std::get_if<GbvFunction>(&g)) {
        for (const auto& comp : gbv->mu) {
            if (const auto* pm = std::get_if<PointMass>(&comp)) {
                pts.push_back(pm->at);
            } else {
                const auto& dp = std::get<DensityPiece>(comp);
                if (std::isfinite(dp.lo)) pts.push_back(dp.lo);
                if (std::isfinite(dp.hi)) pts.push_back(dp.hi);
            }
        }
        for (const auto& j : gbv->jumps) pts.push_back(j.location);
    } else if (const auto* hf = std::get_if<HolderFunction>(&g)) {
        if (hf->kind == HolderKind::abs_pow) pts.push_back(hf->shift);
    }
    return pts;
}

// --------------------------- catalog ---------------------------------------

TerminalCondition make_indicator(double a) {
    GbvFunction g;
    g.c = a < 0.0 ? 1.0 : 0.0;
    g.mu.push_back(PointMass{1.0, a});
    g.beta = 0.0;
    return g;
}

TerminalCondition make_sign() {
    GbvFunction g;
    g.c = -1.0;
    g.mu.push_back(PointMass{2.0, 0.0});
    g.beta = 0.0;
    return g;
}

TerminalCondition make_x_squared() {
    GbvFunction g;
    g.c = 0.0;
    DensityPiece p;
    p.coeffs = {0.0, 2.0};  // d mu = 2y dy
    p.lo = -kInf;
    p.hi = kInf;
    g.mu.push_back(std::move(p));
    g.beta = 1.0;
    return g;
}

TerminalCondition make_sawtooth() {
    GbvFunction g;
    g.c = 0.0;
    const double bounds[5] = {-2.0, -1.0, 0.0, 1.0, 2.0};
    const double slope[4] = {1.0, -1.0, 1.0, -1.0};
    for (int i = 0; i < 4; ++i) {
        DensityPiece p;
        p.coeffs = {slope[i]};
        p.lo = bounds[i];
        p.hi = bounds[i + 1];
        g.mu.push_back(std::move(p));
    }
    g.beta = 0.0;
    return g;
}

TerminalCondition make_abs_sqrt(double shift) {
    HolderFunction f;
    f.alpha = 0.5;
    f.A = 1.0;
    f.beta = 0.0;
    f.kind = HolderKind::abs_pow;
    f.shift = shift;
    return f;
}

TerminalCondition make_sine() {
    HolderFunction f;
    f.alpha = 1.0;
    f.A = 1.0;
    f.beta = 0.0;
    f.kind = HolderKind::sin_wave;
    f.omega = 1.0;
    return f;
}

TerminalCondition make_eb_cos(double amplitude, double frequency, double A, double b) {
    EbFunction f;
    f.kind = EbKind::cos_scaled;
    f.coeffs = {amplitude, frequency};
    f.A = A;
    f.b = b;
    return f;
}

namespace {

TerminalCondition parse_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "gbv") {
        GbvFunction g;
        g.c = j.value("c", 0.0);
        g.beta = j.value("beta", 0.0);
        if (j.contains("components")) {
            for (const auto& comp : j.at("components")) {
                const std::string type = comp.at("type").get<std::string>();
                if (type == "point_mass") {
                    g.mu.push_back(PointMass{comp.at("mass").get<double>(),
                                             comp.at("at").get<double>()});
                } else if (type == "density") {
                    DensityPiece p;
                    p.coeffs = comp.at("coeffs").get<std::vector<double>>();
                    const auto& sup = comp.at("support");
                    auto bound = [](const nlohmann::json& v) -> double {
                        if (v.is_string()) {
                            const std::string s = v.get<std::string>();
                            if (s == "inf" || s == "+inf") return kInf;
                            if (s == "-inf") return -kInf;
                            throw std::invalid_argument("terminal config: bad support bound");
                        }
                        return v.get<double>();
                    };
                    p.lo = bound(sup.at(0));
                    p.hi = bound(sup.at(1));
                    if (!(p.hi > p.lo))
                        throw std::invalid_argument("terminal config: degenerate density support");
                    g.mu.push_back(std::move(p));
                } else {
                    throw std::invalid_argument("terminal config: unknown component type " + type);
                }
            }
        }
        if (j.contains("jumps")) {
            for (const auto& atom : j.at("jumps"))
                g.jumps.push_back({atom.at("alpha").get<double>(), atom.at("x").get<double>()});
            for (std::size_t i = 0; i < g.jumps.size(); ++i)
                for (std::size_t k = i + 1; k < g.jumps.size(); ++k)
                    if (g.jumps[i].location == g.jumps[k].location)
                        throw std::invalid_argument("terminal config: duplicate jump locations");
        }
        return g;
    }
    if (family == "holder") {
        HolderFunction f;
        f.alpha = j.at("alpha").get<double>();
        f.A = j.at("A").get<double>();
        f.beta = j.value("beta", 0.0);
        const std::string catalog = j.at("catalog").get<std::string>();
        if (catalog == "abs_pow") {
            f.kind = HolderKind::abs_pow;
            f.shift = j.value("shift", 0.0);
        } else if (catalog == "sin") {
            f.kind = HolderKind::sin_wave;
            f.omega = j.value("omega", 1.0);
        } else {
            throw std::invalid_argument("terminal config: unknown holder catalog " + catalog);
        }
        return f;
    }
    if (family == "eb") {
        EbFunction f;
        f.A = j.at("A").get<double>();
        f.b = j.at("b").get<double>();
        const std::string catalog = j.at("catalog").get<std::string>();
        if (catalog == "poly") {
            f.kind = EbKind::poly;
            f.coeffs = j.at("coeffs").get<std::vector<double>>();
        } else if (catalog == "cos") {
            f.kind = EbKind::cos_scaled;
            f.coeffs = {j.value("amplitude", 1.0), j.value("frequency", 1.0)};
        } else {
            throw std::invalid_argument("terminal config: unknown eb catalog " + catalog);
        }
        return f;
    }
    throw std::invalid_argument("terminal config: unknown family " + family);
}

}  // namespace

TerminalCondition terminal_from_json_text(const std::string& text) {
    return parse_json(nlohmann::json::parse(text));
}

TerminalCondition terminal_from_spec(const std::string& name_or_path) {
    if (name_or_path == "indicator") return make_indicator(0.0);
    if (name_or_path == "sign") return make_sign();
    if (name_or_path == "x2") return make_x_squared();
    if (name_or_path == "sawtooth") return make_sawtooth();
    if (name_or_path == "abs_sqrt") return make_abs_sqrt(0.0);
    if (name_or_path == "sin") return make_sine();
    std::ifstream in(name_or_path);
    if (!in) throw std::invalid_argument("terminal config: cannot open " + name_or_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return terminal_from_json_text(ss.str());
}

}  // namespace heatlab
