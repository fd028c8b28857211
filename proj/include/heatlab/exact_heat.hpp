#pragma once

#include "heatlab/quadrature.hpp"
#include "heatlab/special.hpp"
#include "heatlab/terminal.hpp"

namespace heatlab {

struct HeatParams {
    double T = 1.0;
    double sigma = 1.0;
};

struct EvalResult {
    double value = 0.0;
    double abs_error = 0.0;
    bool converged = true;
};

// u(t,x) = E[g(x + sigma W_{T-t})], the smoothed terminal condition serving as
// ground truth. GBV point masses go through the normal CDF in closed form,
// density pieces and catalog entries through adaptive quadrature on a window
// wide enough that the Gaussian tail is negligible against the growth
// certificate. At t == T the terminal condition itself is returned and jump
// atoms contribute nothing for t < T.
EvalResult u_exact(const TerminalCondition& g, double t, double x, const HeatParams& hp,
                   const QuadratureSpec& quad = {});

// Direct route: int g(x+y) p_{T-t}(y) dy by quadrature for every family.
// Used as the cross-check path against the closed-form split.
EvalResult u_exact_quadrature(const TerminalCondition& g, double t, double x,
                              const HeatParams& hp, const QuadratureSpec& quad = {});

// Time derivative via differentiation under the integral sign:
// int g(x+y) p_{T-t}(y) (1 - y^2/(sigma^2 (T-t))) / (2 (T-t)) dy,  t < T.
EvalResult dudt(const TerminalCondition& g, double t, double x, const HeatParams& hp,
                const QuadratureSpec& quad = {});

}  // namespace heatlab
