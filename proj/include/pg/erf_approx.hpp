#pragma once
#include <cmath>

namespace pg {

// Abramowitz & Stegun 7.1.26: 5-term rational polynomial approximation of erf
// for t >= 0, extended to negatives by oddness. Max absolute error ~1.4e-7.
inline double erf_approx(double t) {
    if (t == 0.0) return 0.0;  // the polynomial leaves a 1e-9 residue at 0; oddness demands 0
    double sign = t < 0 ? -1.0 : 1.0;
    t = std::fabs(t);
    constexpr double p = 0.3275911;
    constexpr double a1 = 0.254829592, a2 = -0.284496736, a3 = 1.421413741;
    constexpr double a4 = -1.453152027, a5 = 1.061405429;
    double u = 1.0 / (1.0 + p * t);
    double poly = u * (a1 + u * (a2 + u * (a3 + u * (a4 + u * a5))));
    return sign * (1.0 - poly * std::exp(-t * t));
}

}  // namespace pg
