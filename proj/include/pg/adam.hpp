#pragma once
#include <vector>
#include <cmath>
#include <algorithm>

namespace pg {

// Adam with bias correction. The update direction m_hat/(sqrt(v_hat)+eps) is clipped
// per parameter at +/- clip before the learning rate is applied; the clip guards
// against rare near-zero emission-pdf outliers in the training stream.
struct AdamState {
    std::vector<double> m, v;
    long t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double clip = 10.0;

    explicit AdamState(size_t n = 0, double eps_ = 1e-8) : m(n, 0.0), v(n, 0.0), eps(eps_) {}

    void resize(size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
        t = 0;
    }

    // In-place step on params given grad (same length). Returns nothing; t advances.
    void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
        ++t;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            double m_hat = m[i] / bc1;
            double v_hat = v[i] / bc2;
            double dir = m_hat / (std::sqrt(v_hat) + eps);
            dir = std::clamp(dir, -clip, clip);
            params[i] -= lr * dir;
        }
    }
};

}  // namespace pg
