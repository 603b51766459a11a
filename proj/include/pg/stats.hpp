#pragma once
#include <vector>
#include <cmath>
#include <boost/math/special_functions/gamma.hpp>

namespace pg {

// Pearson chi-square goodness-of-fit. Bins with expected count < 5 are merged into
// their neighbor (Cochran's rule) before the statistic is formed. Returns the
// p-value via the regularized upper incomplete gamma function.
inline double chi_square_p_value(const std::vector<double>& observed,
                                 const std::vector<double>& expected) {
    std::vector<double> obs, exp;
    double o_acc = 0, e_acc = 0;
    for (size_t i = 0; i < observed.size(); ++i) {
        o_acc += observed[i];
        e_acc += expected[i];
        if (e_acc >= 5.0) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
            o_acc = e_acc = 0;
        }
    }
    if (e_acc > 0 && !exp.empty()) {  // fold the remainder into the last kept bin
        obs.back() += o_acc;
        exp.back() += e_acc;
    }
    if (exp.size() < 2) return 1.0;
    double stat = 0;
    for (size_t i = 0; i < exp.size(); ++i) {
        double diff = obs[i] - exp[i];
        stat += diff * diff / exp[i];
    }
    double dof = static_cast<double>(exp.size() - 1);
    return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

struct RunningMeanVar {
    long n = 0;
    double mean = 0, m2 = 0;

    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
    double std_error() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }
};

}  // namespace pg
