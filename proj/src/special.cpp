#include "heatlab/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace heatlab {

namespace {

// Coefficients from W. J. Cody, "Rational Chebyshev approximations for the
// error function", Math. Comp. 23 (1969), as distributed in netlib/specfun.
constexpr double kA[5] = {3.1611237438705656, 113.864154151050156, 377.485237685302021,
                          3209.37758913846947, 0.185777706184603153};
constexpr double kB[4] = {23.6012909523441209, 244.024637934444173, 1282.61652607737228,
                          2844.23683343917062};
constexpr double kC[9] = {0.564188496988670089, 8.88314979438837594, 66.1191906371416295,
                          298.635138197400131,  881.95222124176909,  1712.04761263407058,
                          2051.07837782607147,  1230.33935479799725, 2.15311535474403846e-8};
constexpr double kD[8] = {15.7449261107098347, 117.693950891312499, 537.181101862009858,
                          1621.38957456669019, 3290.79923573345963, 4362.61909014324716,
                          3439.36767414372164, 1230.33935480374942};
constexpr double kP[6] = {0.305326634961232344, 0.360344899949804439, 0.125781726111229246,
                          0.0160837851487422766, 6.58749161529837803e-4, 0.0163153871373020978};
constexpr double kQ[5] = {2.56852019228982242, 1.87295284992346047, 0.527905102951428412,
                          0.0605183413124413191, 0.00233520497626869185};

constexpr double kSqrPi = 0.56418958354775628695;  // 1/sqrt(pi)
constexpr double kThresh = 0.46875;
constexpr double kXBig = 26.543;
constexpr double kXSmall = 1.11e-16;

// jint: 0 -> erf, 1 -> erfc
double calerf(double x, int jint) {
    const double y = std::fabs(x);
    double result;

    if (y <= kThresh) {
        double ysq = 0.0;
        if (y > kXSmall) ysq = y * y;
        double xnum = kA[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + kA[i]) * ysq;
            xden = (xden + kB[i]) * ysq;
        }
        result = x * (xnum + kA[3]) / (xden + kB[3]);
        if (jint != 0) result = 1.0 - result;
        return result;
    }

    if (y <= 4.0) {
        double xnum = kC[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + kC[i]) * y;
            xden = (xden + kD[i]) * y;
        }
        result = (xnum + kC[7]) / (xden + kD[7]);
        const double ysq = std::trunc(y * 16.0) / 16.0;
        const double del = (y - ysq) * (y + ysq);
        result = std::exp(-ysq * ysq) * std::exp(-del) * result;
    } else {
        result = 0.0;
        if (y < kXBig) {
            const double ysq = 1.0 / (y * y);
            double xnum = kP[5] * ysq;
            double xden = ysq;
            for (int i = 0; i < 4; ++i) {
                xnum = (xnum + kP[i]) * ysq;
                xden = (xden + kQ[i]) * ysq;
            }
            result = ysq * (xnum + kP[4]) / (xden + kQ[4]);
            result = (kSqrPi - result) / y;
            const double yred = std::trunc(y * 16.0) / 16.0;
            const double del = (y - yred) * (y + yred);
            result = std::exp(-yred * yred) * std::exp(-del) * result;
        }
    }

    if (jint == 0) {
        result = (0.5 - result) + 0.5;
        if (x < 0.0) result = -result;
    } else {
        if (x < 0.0) result = 2.0 - result;
    }
    return result;
}

// Acklam's rational approximation for the inverse normal CDF.
constexpr double kQa[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                           -2.759285104469687e+02, 1.383577518672690e+02,
                           -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kQb[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                           -1.556989798598866e+02, 6.680131188771972e+01,
                           -1.328068155288572e+01};
constexpr double kQc[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                           -2.400758277161838e+00, -2.549732539343734e+00,
                           4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kQd[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                           2.445134137142996e+00, 3.754408661907416e+00};
constexpr double kPLow = 0.02425;

}  // namespace

double erf_cody(double x) { return calerf(x, 0); }
double erfc_cody(double x) { return calerf(x, 1); }

double normal_cdf(double z) { return 0.5 * erfc_cody(-z * 0.7071067811865475244); }

double normal_pdf(double z) { return 0.3989422804014326779 * std::exp(-0.5 * z * z); }

double gaussian_density(double y, double theta, double sigma) {
    if (!(theta > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("gaussian_density: theta and sigma must be positive");
    const double v = sigma * sigma * theta;
    return std::exp(-0.5 * y * y / v) / std::sqrt(6.283185307179586477 * v);
}

double normal_quantile_fast(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
    if (p < kPLow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((kQc[0] * q + kQc[1]) * q + kQc[2]) * q + kQc[3]) * q + kQc[4]) * q + kQc[5]) /
               ((((kQd[0] * q + kQd[1]) * q + kQd[2]) * q + kQd[3]) * q + 1.0);
    }
    if (p > 1.0 - kPLow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((kQc[0] * q + kQc[1]) * q + kQc[2]) * q + kQc[3]) * q + kQc[4]) * q + kQc[5]) /
               ((((kQd[0] * q + kQd[1]) * q + kQd[2]) * q + kQd[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((kQa[0] * r + kQa[1]) * r + kQa[2]) * r + kQa[3]) * r + kQa[4]) * r + kQa[5]) * q /
           (((((kQb[0] * r + kQb[1]) * r + kQb[2]) * r + kQb[3]) * r + kQb[4]) * r + 1.0);
}

double normal_quantile(double p) {
    double x = normal_quantile_fast(p);
    // One Halley refinement against the Cody CDF.
    const double e = normal_cdf(x) - p;
    const double u = e * 2.506628274631000502 * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

}  // namespace heatlab
