#pragma once
#include <cmath>
#include <vector>
#include "pg/adam.hpp"
#include "pg/encoding.hpp"
#include "pg/frame.hpp"
#include "pg/gaussian.hpp"
#include "pg/rng.hpp"
#include "pg/vec.hpp"

namespace pg {

// von Mises-Fisher lobe. The density is kept in the numerically stable
// normalized form kappa / (2 pi (1 - e^{-2 kappa})) * e^{kappa (cos t - 1)},
// which integrates to 1 over the sphere for every kappa; the classical
// kappa/(4 pi sinh kappa) constant equals this density at cos t = 0.
struct VMFLobe {
    Vec3 nu{0, 0, 1};  // unit mean direction
    double kappa = 1;  // concentration > 0
};

inline double vmf_pdf(const VMFLobe& lobe, const Vec3& w) {
    double c = std::clamp(dot(lobe.nu, w), -1.0, 1.0);
    double k = lobe.kappa;
    if (k < 1e-8) return 0.07957747154594766788;  // 1/(4 pi), uniform limit
    return k / (kTwoPi * -std::expm1(-2.0 * k)) * std::exp(k * (c - 1.0));
}

// Inverse-CDF sampling: cos t = 1 + log(u (1 - e^{-2k}) + e^{-2k}) / k.
inline Direction vmf_sample(const VMFLobe& lobe, Pcg32& rng) {
    double k = lobe.kappa;
    double c;
    if (k < 1e-8) {
        c = 1.0 - 2.0 * rng.next_double();
    } else {
        double u = rng.next_double();
        double e2k = std::exp(-2.0 * k);
        c = 1.0 + std::log(u * (1.0 - e2k) + e2k) / k;
        c = std::clamp(c, -1.0, 1.0);
    }
    double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    double phi = kTwoPi * rng.next_double();
    Frame f(lobe.nu);
    return Direction(f.to_world({s * std::cos(phi), s * std::sin(phi), c}));
}

struct WeightedVMF {
    double weight = 1;
    VMFLobe lobe;
};

struct VMFMixture {
    std::vector<WeightedVMF> lobes;
    bool empty() const { return lobes.empty(); }
};

inline double vmf_mixture_pdf(const VMFMixture& m, const Vec3& w) {
    double p = 0;
    for (const auto& l : m.lobes) p += l.weight * vmf_pdf(l.lobe, w);
    return p;
}

inline Direction vmf_mixture_sample(const VMFMixture& m, Pcg32& rng) {
    double u = rng.next_double(), acc = 0;
    for (const auto& l : m.lobes) {
        acc += l.weight;
        if (u <= acc || &l == &m.lobes.back()) return vmf_sample(l.lobe, rng);
    }
    return vmf_sample(m.lobes.back().lobe, rng);
}

// --- fitting parameterization -------------------------------------------
// Per lobe: raw mean (3 values, renormalized after every step), raw kappa
// (softplus), raw weight (softmax). Shares the Adam/KL machinery used by the
// spatial mixture.

inline double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }
inline double softplus_inv(double y) { return y > 30 ? y : std::log(std::expm1(y)); }

constexpr double kVmfKappaMin = 1e-3;
constexpr double kVmfKappaMax = 5e3;

struct EncodedVMF {
    // layout per lobe: [nu.x, nu.y, nu.z, kappa_raw, w_raw]
    std::vector<double> params;
    size_t lobe_count() const { return params.size() / 5; }
};

inline EncodedVMF encode_vmf(const VMFMixture& m) {
    EncodedVMF enc;
    for (const auto& l : m.lobes) {
        enc.params.push_back(l.lobe.nu.x);
        enc.params.push_back(l.lobe.nu.y);
        enc.params.push_back(l.lobe.nu.z);
        enc.params.push_back(softplus_inv(std::clamp(l.lobe.kappa, kVmfKappaMin, kVmfKappaMax)));
        enc.params.push_back(std::log(std::max(l.weight, 1e-12)));
    }
    return enc;
}

inline VMFMixture decode_vmf(const EncodedVMF& enc) {
    VMFMixture m;
    size_t n = enc.lobe_count();
    std::vector<double> raw(n);
    for (size_t i = 0; i < n; ++i) raw[i] = enc.params[5 * i + 4];
    std::vector<double> w = softmax(raw);
    for (size_t i = 0; i < n; ++i) {
        VMFLobe lobe;
        Vec3 nu{enc.params[5 * i], enc.params[5 * i + 1], enc.params[5 * i + 2]};
        double len = length(nu);
        lobe.nu = len > 0 ? nu / len : Vec3{0, 0, 1};
        lobe.kappa = std::clamp(softplus(enc.params[5 * i + 3]), kVmfKappaMin, kVmfKappaMax);
        m.lobes.push_back({w[i], lobe});
    }
    return m;
}

// Gradient of log(mixture pdf at u) with respect to the encoded parameters.
// The raw mean receives the unconstrained gradient; decode_vmf renormalizes.
inline std::vector<double> grad_log_vmf(const EncodedVMF& enc, const Vec3& u,
                                        double* log_q_out = nullptr) {
    size_t n = enc.lobe_count();
    std::vector<double> raw(n), kappa(n), c(n), log_wN(n), nu_len(n);
    for (size_t i = 0; i < n; ++i) raw[i] = enc.params[5 * i + 4];
    std::vector<double> w = softmax(raw);
    double mx = -1e300;
    for (size_t i = 0; i < n; ++i) {
        Vec3 nu{enc.params[5 * i], enc.params[5 * i + 1], enc.params[5 * i + 2]};
        nu_len[i] = length(nu);
        Vec3 unit = nu_len[i] > 0 ? nu / nu_len[i] : Vec3{0, 0, 1};
        kappa[i] = std::clamp(softplus(enc.params[5 * i + 3]), kVmfKappaMin, kVmfKappaMax);
        c[i] = std::clamp(dot(unit, u), -1.0, 1.0);
        double log_norm = std::log(kappa[i]) - std::log(kTwoPi) -
                          std::log(-std::expm1(-2.0 * kappa[i]));
        log_wN[i] = std::log(std::max(w[i], 1e-300)) + log_norm + kappa[i] * (c[i] - 1.0);
        mx = std::max(mx, log_wN[i]);
    }
    double sum = 0;
    for (size_t i = 0; i < n; ++i) sum += std::exp(log_wN[i] - mx);
    double log_q = mx + std::log(sum);
    if (log_q_out) *log_q_out = log_q;

    std::vector<double> grad(5 * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double r = std::exp(log_wN[i] - log_q);
        Vec3 nu{enc.params[5 * i], enc.params[5 * i + 1], enc.params[5 * i + 2]};
        double len = nu_len[i] > 0 ? nu_len[i] : 1.0;
        Vec3 unit = nu_len[i] > 0 ? nu / nu_len[i] : Vec3{0, 0, 1};
        // d cos/d nu_raw through the normalization: (u - (u . unit) unit) / len
        Vec3 dc = (u - unit * c[i]) / len;
        grad[5 * i + 0] = r * kappa[i] * dc.x;
        grad[5 * i + 1] = r * kappa[i] * dc.y;
        grad[5 * i + 2] = r * kappa[i] * dc.z;
        double k = kappa[i];
        double dlog_dk = 1.0 / k - 2.0 * std::exp(-2.0 * k) / (-std::expm1(-2.0 * k)) +
                         (c[i] - 1.0);
        bool clamped = (k <= kVmfKappaMin || k >= kVmfKappaMax);
        grad[5 * i + 3] = clamped ? 0.0 : r * dlog_dk * sigmoid(enc.params[5 * i + 3]);
        grad[5 * i + 4] = r - w[i];
    }
    return grad;
}

}  // namespace pg
