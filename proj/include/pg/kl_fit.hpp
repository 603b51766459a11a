#pragma once
#include <vector>
#include <cmath>
#include "pg/encoding.hpp"
#include "pg/adam.hpp"

namespace pg {

// One recorded photon: first-bounce location, the emission pdf that generated it,
// and how many times the camera pass gathered it.
struct TrainingSample {
    Vec3 x;          // world units
    double q_hat = 1;  // > 0
    int t_count = 0;
    int first_surface = -1;   // scene surface index of the first bounce, if any
    bool deposited = false;   // the emission stored a photon
};

// Flat parameter layout per component: mu.x mu.y mu.z p_sigma raw_weight.
inline std::vector<double> pack(const EncodedMixture& enc) {
    std::vector<double> p;
    p.reserve(enc.param_count());
    for (const auto& c : enc.components) {
        p.push_back(c.scaled_mu.x);
        p.push_back(c.scaled_mu.y);
        p.push_back(c.scaled_mu.z);
        p.push_back(c.p_sigma);
        p.push_back(c.raw_weight);
    }
    return p;
}

inline void unpack(const std::vector<double>& p, EncodedMixture& enc) {
    for (size_t i = 0; i < enc.components.size(); ++i) {
        auto& c = enc.components[i];
        c.scaled_mu = {p[5 * i], p[5 * i + 1], p[5 * i + 2]};
        c.p_sigma = p[5 * i + 3];
        c.raw_weight = p[5 * i + 4];
    }
}

// Gradient of log q(u) in encoded (scaled) space at u = x_world * B, with respect to
// every encoded parameter. q is the normalized mixture over scaled positions:
//   q(u) = sum_i w_i N(u; m_i, s_i^2 I),  s_i = c_s sigmoid(p_i),  w = softmax(w').
// Responsibilities r_i = w_i N_i / q give
//   d log q / d m_i  = r_i (u - m_i) / s_i^2
//   d log q / d p_i  = r_i (|u - m_i|^2 / s_i^2 - 3) (1 - s_i / c_s)
//   d log q / d w'_j = r_j - w_j
// evaluated with log-sum-exp so far-away samples cannot underflow q to zero.
// Returns the gradient in pack() layout; log_q_out receives log q(u) if non-null.
inline std::vector<double> grad_log_mixture(const EncodedMixture& enc, const Vec3& u,
                                            double* log_q_out = nullptr) {
    size_t K = enc.components.size();
    std::vector<double> raw(K), s(K), d2(K), log_wN(K);
    for (size_t i = 0; i < K; ++i) raw[i] = enc.components[i].raw_weight;
    std::vector<double> w = softmax(raw);
    double mx = -1e300;
    for (size_t i = 0; i < K; ++i) {
        s[i] = kCs * sigmoid(enc.components[i].p_sigma);
        d2[i] = length_sq(u - enc.components[i].scaled_mu);
        double log_n = -d2[i] / (2.0 * s[i] * s[i]) - 3.0 * std::log(s[i]) -
                       1.5 * std::log(kTwoPi);
        log_wN[i] = std::log(w[i]) + log_n;
        mx = std::max(mx, log_wN[i]);
    }
    double sum = 0;
    for (size_t i = 0; i < K; ++i) sum += std::exp(log_wN[i] - mx);
    double log_q = mx + std::log(sum);
    if (log_q_out) *log_q_out = log_q;

    std::vector<double> grad(5 * K);
    for (size_t i = 0; i < K; ++i) {
        double r = std::exp(log_wN[i] - log_q);
        Vec3 gm = (u - enc.components[i].scaled_mu) * (r / (s[i] * s[i]));
        grad[5 * i] = gm.x;
        grad[5 * i + 1] = gm.y;
        grad[5 * i + 2] = gm.z;
        grad[5 * i + 3] = r * (d2[i] / (s[i] * s[i]) - 3.0) * (1.0 - s[i] / kCs);
        grad[5 * i + 4] = r - w[i];
    }
    return grad;
}

// Learning rate: 0.1 at iteration 0 decaying geometrically to 0.01 at the last.
inline double lr_schedule(long iteration, long total) {
    if (total <= 1) return 0.1;
    double frac = static_cast<double>(iteration) / static_cast<double>(total - 1);
    return 0.1 * std::pow(0.1, frac);
}

// One Adam step on the batch KL gradient estimate
//   g = -(1/|batch|) sum_k (t_k / q_hat_k) grad_log_mixture(enc, x_k * B).
// Samples with t_count = 0 contribute nothing (their coefficient is zero), and the
// overall unknown scale of t/q_hat washes out through Adam's moment normalization.
inline void kl_step(EncodedMixture& enc, AdamState& adam,
                    const std::vector<TrainingSample>& batch, double lr, double B) {
    size_t n_par = enc.param_count();
    std::vector<double> grad(n_par, 0.0);
    for (const auto& smp : batch) {
        if (smp.t_count == 0) continue;
        double coef = static_cast<double>(smp.t_count) / smp.q_hat;
        std::vector<double> g = grad_log_mixture(enc, smp.x * B);
        for (size_t i = 0; i < n_par; ++i) grad[i] -= coef * g[i];
    }
    double inv_n = 1.0 / static_cast<double>(batch.size());
    for (double& gi : grad) gi *= inv_n;
    std::vector<double> params = pack(enc);
    adam.step(params, grad, lr);
    unpack(params, enc);
}

}  // namespace pg
