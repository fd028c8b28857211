#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace heatlab {

// ---------------------------------------------------------------------------
// Terminal conditions come in three families:
//   * GbvFunction  - generalized bounded variation: a constant, a signed
//     measure (finite list of point masses and piecewise-polynomial density
//     pieces) and finitely many single-point modifications,
//   * HolderFunction - locally alpha-Hoelder catalog entries with an
//     exponentially growing Hoelder constant certificate,
//   * EbFunction   - exponentially bounded catalog entries with a stored
//     growth certificate.
// ---------------------------------------------------------------------------

struct JumpAtom {
    double weight = 0.0;    // single-point modification weight
    double location = 0.0;  // pairwise distinct within one function
};

struct PointMass {
    double mass = 0.0;
    double at = 0.0;
};

struct DensityPiece {
    std::vector<double> coeffs;  // c0 + c1*y + c2*y^2 + ...
    double lo = 0.0;             // support [lo, hi); may be +-infinity
    double hi = 0.0;

    double eval(double y) const;
    double integral(double a, double b) const;  // exact polynomial antiderivative
};

using MeasureComponent = std::variant<PointMass, DensityPiece>;

struct GbvFunction {
    double c = 0.0;
    std::vector<MeasureComponent> mu;
    std::vector<JumpAtom> jumps;
    double beta = 0.0;  // growth exponent of the weighted variation norm
};

enum class HolderKind { abs_pow, sin_wave };

struct HolderFunction {
    double alpha = 1.0;
    double A = 0.0;
    double beta = 0.0;
    HolderKind kind = HolderKind::abs_pow;
    double shift = 0.0;  // abs_pow: |x - shift|^alpha
    double omega = 1.0;  // sin_wave: sin(omega x)

    double eval(double x) const;
};

enum class EbKind { poly, cos_scaled };

struct EbFunction {
    EbKind kind = EbKind::poly;
    std::vector<double> coeffs;  // poly coefficients, or {amplitude, frequency}
    double A = 0.0;              // stored certificate |g(x)| <= A e^{b|x|}
    double b = 0.0;

    double eval(double x) const;
};

using TerminalCondition = std::variant<GbvFunction, HolderFunction, EbFunction>;

// Pointwise evaluation. For the GBV family this follows the representation
// g(x) = c + mu([0,x]) - mu((x,0)) + sum_i alpha_i 1_{x_i}(x): a point mass at
// p contributes for x >= 0 when p is in the closed interval [0,x] and for
// x < 0 when p is in the open interval (x,0). With this split a unit mass at
// a represents the right-continuous step 1_{[a,inf)} exactly, including the
// value 1 at the jump point itself.
double evaluate(const GbvFunction& g, double x);
double evaluate(const TerminalCondition& g, double x);

struct TailNorm {
    double value = 0.0;
    bool converged = true;  // false when the density part diverges for this beta
};

// int e^{-beta |y|} d|mu|(y) + sum_i |alpha_i| e^{-beta |x_i|}; density parts
// by adaptive quadrature with absolute tolerance 1e-10.
TailNorm gbv_tail_norm(const GbvFunction& g, double beta);

// Representation of g(x0 + .): translated component supports and jump
// locations; evaluate(shift(g,x0), x) == evaluate(g, x0+x).
GbvFunction shift(const GbvFunction& g, double x0);

// Indices i with x_i - x0 an even multiple of h (relative tolerance 1e-12).
std::vector<std::size_t> even_lattice_jumps(const GbvFunction& g, double x0, double h);

struct GrowthEnvelope {
    double A = 0.0;
    double b = 0.0;
};

// Certified pair with |g(x)| <= A e^{b|x|} for the whole family.
GrowthEnvelope growth_envelope(const TerminalCondition& g);

// Locations where g jumps or kinks (mass points, finite piece boundaries,
// single-point modifications, the |.|^alpha singularity). Quadratures split
// their domains here so adaptive error estimates stay honest.
std::vector<double> feature_points(const TerminalCondition& g);

// --------------------------- catalog ---------------------------------------

TerminalCondition make_indicator(double a);            // 1_{[a, inf)}
TerminalCondition make_sign();                         // -1 + 2*1_{[0, inf)}
TerminalCondition make_x_squared();                    // x^2 as GBV, beta = 1
TerminalCondition make_sawtooth();                     // zigzag on [-2,2], 0 outside
TerminalCondition make_abs_sqrt(double shift = 0.0);   // |x - shift|^{1/2}
TerminalCondition make_sine();                         // sin(x), Lipschitz
TerminalCondition make_eb_cos(double amplitude, double frequency, double A, double b);

// Declarative config: either a catalog shorthand ("indicator", "sign", "x2",
// "sawtooth", "abs_sqrt", "sin") or a path to a JSON file; schema in README.
TerminalCondition terminal_from_spec(const std::string& name_or_path);
TerminalCondition terminal_from_json_text(const std::string& text);

}  // namespace heatlab
