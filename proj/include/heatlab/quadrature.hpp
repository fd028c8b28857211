#pragma once

#include <algorithm>
#include <cmath>
#include <queue>

namespace heatlab {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    int max_subdivisions = 2000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    int subdivisions = 0;
};

namespace quad_detail {

// 15-point Kronrod / 7-point Gauss pair (QUADPACK dqk15 abscissae/weights).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Cell {
    double a, b, value, error;
    bool operator<(const Cell& o) const { return error < o.error; }
};

template <class F>
Cell eval_gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv1[7], fv2[7];
    const double fc = f(c);
    double result_g = fc * kWg[3];
    double result_k = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        fv1[j] = f(c - dx);
        fv2[j] = f(c + dx);
        const double fsum = fv1[j] + fv2[j];
        if (j % 2 == 1) result_g += kWg[j / 2] * fsum;
        result_k += kWgk[j] * fsum;
    }
    const double mean = result_k * 0.5;
    double resasc = kWgk[7] * std::fabs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));
    resasc *= std::fabs(half);

    Cell cell;
    cell.a = a;
    cell.b = b;
    cell.value = result_k * half;
    double err = std::fabs((result_k - result_g) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    cell.error = err;
    return cell;
}

}  // namespace quad_detail

// Globally adaptive Gauss-Kronrod integration on [a, b]. Splits the interval
// with the current largest error estimate until the total estimate drops
// below abs_tol or the subdivision budget is spent. Deterministic.
template <class F>
QuadResult adaptive_gk15(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    QuadResult out;
    if (a == b) return out;
    std::priority_queue<quad_detail::Cell> cells;
    auto first = quad_detail::eval_gk15(f, a, b);
    double total = first.value;
    double total_err = first.error;
    cells.push(first);
    int splits = 0;
    while (total_err > spec.abs_tol && splits < spec.max_subdivisions) {
        const auto worst = cells.top();
        if (worst.error <= 0.0) break;
        cells.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // machine resolution reached
            cells.push({worst.a, worst.b, worst.value, 0.0});
            total_err -= worst.error;
            continue;
        }
        const auto left = quad_detail::eval_gk15(f, worst.a, mid);
        const auto right = quad_detail::eval_gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        cells.push(left);
        cells.push(right);
        ++splits;
    }
    out.value = total;
    out.error = std::max(total_err, 0.0);
    out.converged = out.error <= spec.abs_tol;
    out.subdivisions = splits;
    return out;
}

}  // namespace heatlab
