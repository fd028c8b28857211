#include "heatlab/lattice.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>

#include "heatlab/kernels.hpp"

namespace heatlab {

LatticeParams::LatticeParams(std::int64_t n_, double T_, double sigma_, double z0_)
    : n(n_), T(T_), sigma(sigma_), z0(z0_) {
    if (n < 2 || (n % 2) != 0) throw std::invalid_argument("LatticeParams: n must be even and >= 2");
    if (!(T > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("LatticeParams: T and sigma must be positive");
}

double LatticeParams::h() const { return sigma * std::sqrt(T / static_cast<double>(n)); }

ThetaIndex theta_of(double t, const LatticeParams& lp) {
    if (!(t >= 0.0) || !(t < lp.T)) throw std::invalid_argument("theta_of: t must lie in [0, T)");
    const double ratio = (lp.T - t) * static_cast<double>(lp.n) / (2.0 * lp.T);
    // Lattice times land on integers up to roundoff; snap before the ceiling.
    std::int64_t m = static_cast<std::int64_t>(std::ceil(ratio - 1e-9));
    if (m < 1) m = 1;
    if (m > lp.n / 2) m = lp.n / 2;
    ThetaIndex ti;
    ti.n_theta = 2 * m;
    ti.theta_n = static_cast<double>(ti.n_theta) * lp.T / static_cast<double>(lp.n);
    ti.k = lp.n / 2 - m;
    return ti;
}

namespace {

std::shared_ptr<const BinomialRow> build_row(std::int64_t N) {
    auto row = std::make_shared<BinomialRow>();
    row->N = N;
    row->w.assign(static_cast<std::size_t>(N) + 1, 0.0);
    const std::int64_t mid = N / 2;
    row->w[static_cast<std::size_t>(mid)] = 1.0;
    // multiplicative recursion outward: w_{j+1}/w_j = (N-j)/(j+1)
    for (std::int64_t j = mid; j < N; ++j) {
        row->w[static_cast<std::size_t>(j + 1)] =
            row->w[static_cast<std::size_t>(j)] * static_cast<double>(N - j) / static_cast<double>(j + 1);
    }
    for (std::int64_t j = mid; j > 0; --j) {
        row->w[static_cast<std::size_t>(j - 1)] =
            row->w[static_cast<std::size_t>(j)] * static_cast<double>(j) / static_cast<double>(N - j + 1);
    }
    const double total = kernels::sum(row->w);
    const double inv = 1.0 / total;
    for (double& v : row->w) v *= inv;
    return row;
}

std::shared_ptr<const BinomialRow> build_row_odd_mid(std::int64_t N) {
    // N odd never occurs for the walk (n_theta is even) but keep the routine
    // total: start from the lower central term.
    auto row = std::make_shared<BinomialRow>();
    row->N = N;
    row->w.assign(static_cast<std::size_t>(N) + 1, 0.0);
    const std::int64_t mid = (N - 1) / 2;
    row->w[static_cast<std::size_t>(mid)] = 1.0;
    for (std::int64_t j = mid; j < N; ++j)
        row->w[static_cast<std::size_t>(j + 1)] =
            row->w[static_cast<std::size_t>(j)] * static_cast<double>(N - j) / static_cast<double>(j + 1);
    for (std::int64_t j = mid; j > 0; --j)
        row->w[static_cast<std::size_t>(j - 1)] =
            row->w[static_cast<std::size_t>(j)] * static_cast<double>(j) / static_cast<double>(N - j + 1);
    const double inv = 1.0 / kernels::sum(row->w);
    for (double& v : row->w) v *= inv;
    return row;
}

}  // namespace

std::shared_ptr<const BinomialRow> binom_row(std::int64_t N) {
    if (N < 0) throw std::invalid_argument("binom_row: N must be >= 0");
    static std::shared_mutex mtx;
    static std::map<std::int64_t, std::shared_ptr<const BinomialRow>> cache;
    {
        std::shared_lock lock(mtx);
        auto it = cache.find(N);
        if (it != cache.end()) return it->second;
    }
    auto row = (N % 2 == 0) ? build_row(N) : build_row_odd_mid(N);
    std::unique_lock lock(mtx);
    auto [it, inserted] = cache.emplace(N, std::move(row));
    return it->second;
}

double un_binomial(const TerminalCondition& g, double t, double x, const LatticeParams& lp) {
    if (t == lp.T) return evaluate(g, x);
    const ThetaIndex ti = theta_of(t, lp);
    const std::int64_t N = ti.n_theta;
    const auto row = binom_row(N);
    const double h = lp.h();
    std::vector<double> gv(static_cast<std::size_t>(N) + 1);
    for (std::int64_t j = 0; j <= N; ++j)
        gv[static_cast<std::size_t>(j)] = evaluate(g, x + static_cast<double>(2 * j - N) * h);
    return kernels::dot(row->w, gv);
}

double un_recursion(const TerminalCondition& g, double t, double x, const LatticeParams& lp) {
    if (t == lp.T) return evaluate(g, x);
    const ThetaIndex ti = theta_of(t, lp);
    const std::int64_t N = ti.n_theta;
    const double h = lp.h();
    std::vector<double> v(static_cast<std::size_t>(N) + 1);
    for (std::int64_t j = 0; j <= N; ++j)
        v[static_cast<std::size_t>(j)] = evaluate(g, x + static_cast<double>(2 * j - N) * h);
    std::size_t len = v.size();
    while (len > 1) {
        std::span<const double> src(v.data(), len);
        std::span<double> dst(v.data(), len - 2);
        kernels::stencil_quarter_half_quarter(src, dst);
        len -= 2;
    }
    return v[0];
}

EvalResult total_error(const TerminalCondition& g, double t, double x, const LatticeParams& lp,
                       const QuadratureSpec& quad) {
    if (!(t >= 0.0) || !(t < lp.T)) throw std::invalid_argument("total_error: t must lie in [0, T)");
    const HeatParams hp{lp.T, lp.sigma};
    const EvalResult u = u_exact(g, t, x, hp, quad);
    EvalResult out;
    out.value = un_binomial(g, t, x, lp) - u.value;
    out.abs_error = u.abs_error;
    out.converged = u.converged;
    return out;
}

}  // namespace heatlab
