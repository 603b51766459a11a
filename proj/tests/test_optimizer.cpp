#include <doctest.h>
#include <cmath>
#include <stdexcept>
#include <vector>
#include "pg/adam.hpp"
#include "pg/encoding.hpp"
#include "pg/gaussian.hpp"
#include "pg/kl_fit.hpp"
#include "pg/rng.hpp"
#include "pg/stats.hpp"

using namespace pg;

TEST_CASE("scale_factor examples and rejection") {
    CHECK(scale_factor(20.0) == 1.0);
    CHECK(scale_factor(40.0) == 0.5);
    CHECK(scale_factor(1e-3) == doctest::Approx(20000.0).epsilon(1e-12));
    CHECK_THROWS_AS(scale_factor(0.0), std::invalid_argument);
    CHECK_THROWS_AS(scale_factor(-3.0), std::invalid_argument);
}

TEST_CASE("decode: sigmoid sigma and softmax weights") {
    EncodedMixture enc;
    enc.components.push_back({{1.0, 2.0, 3.0}, 0.0, 0.0});
    GaussianMixture m = decode(enc, 1.0);
    CHECK(m.components[0].g.sigma == doctest::Approx(0.325).epsilon(1e-12));
    CHECK(m.components[0].g.mu == Vec3{1.0, 2.0, 3.0});
    CHECK(m.components[0].weight == 1.0);

    // scaled-space cap divided by B for world sigma
    GaussianMixture m2 = decode(enc, 2.0);
    CHECK(m2.components[0].g.sigma == doctest::Approx(0.1625).epsilon(1e-12));
    CHECK(m2.components[0].g.mu == Vec3{0.5, 1.0, 1.5});

    EncodedMixture eq;
    for (int i = 0; i < 32; ++i) eq.components.push_back({{0, 0, 0}, 0.0, 1.7});
    GaussianMixture meq = decode(eq, 1.0);
    for (const auto& c : meq.components)
        CHECK(c.weight == doctest::Approx(1.0 / 32).epsilon(1e-14));

    EncodedMixture two;
    two.components.push_back({{0, 0, 0}, 0.0, std::log(3.0)});
    two.components.push_back({{0, 0, 0}, 0.0, 0.0});
    GaussianMixture mtwo = decode(two, 1.0);
    CHECK(mtwo.components[0].weight == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(mtwo.components[1].weight == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("encode/decode round trip within 1e-9") {
    for (double B : {1.0, 1.25, 0.04, 300.0}) {
        GaussianMixture m;
        m.components.push_back({0.65, {{2, 0, 0}, 0.4 / B}});
        m.components.push_back({0.25, {{-2, 1, 0.3}, 0.01 / B}});
        m.components.push_back({0.10, {{0.5, -3, 2}, 0.6489 / B}});
        for (auto& c : m.components) c.g.mu = c.g.mu / B;
        GaussianMixture back = decode(encode(m, B), B);
        REQUIRE(back.components.size() == m.components.size());
        for (size_t i = 0; i < m.components.size(); ++i) {
            CHECK(length(back.components[i].g.mu - m.components[i].g.mu) < 1e-9);
            CHECK(std::fabs(back.components[i].g.sigma - m.components[i].g.sigma) < 1e-9);
            CHECK(std::fabs(back.components[i].weight - m.components[i].weight) < 1e-9);
        }
    }
}

TEST_CASE("grad_log_mixture: stationary point and lone-component weight") {
    EncodedMixture enc;
    enc.components.push_back({{0.7, -0.3, 1.1}, 0.4, 0.0});
    std::vector<double> g = grad_log_mixture(enc, {0.7, -0.3, 1.1});
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 0.0);
    CHECK(g[4] == doctest::Approx(0.0).epsilon(1e-15));  // softmax of one element is constant
    // moved off the mean the weight gradient stays zero for a single component
    std::vector<double> g2 = grad_log_mixture(enc, {1.5, 0.2, 0.0});
    CHECK(g2[4] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("grad_log_mixture matches central finite differences (100 seeds)") {
    const double h = 1e-5;
    double worst = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        Pcg32 rng(900 + seed, 17);
        EncodedMixture enc;
        for (int i = 0; i < 3; ++i)
            enc.components.push_back({{4 * rng.next_double() - 2, 4 * rng.next_double() - 2,
                                       4 * rng.next_double() - 2},
                                      3 * rng.next_double() - 1.5,
                                      2 * rng.next_double() - 1});
        // evaluation point within ~2 sigma of a random component
        int pick = static_cast<int>(rng.next_double() * 3);
        double sig = kCs * sigmoid(enc.components[pick].p_sigma);
        Vec3 u = enc.components[pick].scaled_mu +
                 Vec3{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()} * sig;
        std::vector<double> analytic = grad_log_mixture(enc, u);
        std::vector<double> params = pack(enc);
        for (size_t j = 0; j < params.size(); ++j) {
            EncodedMixture ep = enc, em = enc;
            std::vector<double> pp = params, pm = params;
            pp[j] += h;
            pm[j] -= h;
            unpack(pp, ep);
            unpack(pm, em);
            double lp, lm;
            grad_log_mixture(ep, u, &lp);
            grad_log_mixture(em, u, &lm);
            double fd = (lp - lm) / (2 * h);
            double rel = std::fabs(analytic[j] - fd) / std::max(1.0, std::fabs(fd));
            worst = std::max(worst, rel);
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("lr_schedule endpoints and geometric midpoint") {
    CHECK(lr_schedule(0, 100) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(lr_schedule(99, 100) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(lr_schedule(50, 101) == doctest::Approx(std::sqrt(0.1 * 0.01)).epsilon(1e-12));
    CHECK(lr_schedule(0, 1) == 0.1);
}

TEST_CASE("kl_step: all-zero batch leaves parameters unchanged, advances Adam") {
    EncodedMixture enc;
    enc.components.push_back({{1, 2, 3}, 0.3, 0.2});
    enc.components.push_back({{-1, 0, 1}, -0.4, -0.1});
    EncodedMixture before = enc;
    AdamState adam(enc.param_count());
    std::vector<TrainingSample> batch(64);
    for (auto& s : batch) s = {{0.5, 0.5, 0.5}, 2.0, 0};
    kl_step(enc, adam, batch, 0.1, 1.0);
    CHECK(adam.t == 1);
    for (size_t i = 0; i < enc.components.size(); ++i) {
        CHECK(enc.components[i].scaled_mu == before.components[i].scaled_mu);
        CHECK(enc.components[i].p_sigma == before.components[i].p_sigma);
        CHECK(enc.components[i].raw_weight == before.components[i].raw_weight);
    }
}

TEST_CASE("Adam: first-step scale invariance and finite moments") {
    std::vector<double> ga{0.3, -2.0, 5.0}, gb{0.3e6, -2.0e6, 5.0e6};
    std::vector<double> pa{1, 1, 1}, pb{1, 1, 1};
    AdamState a(3), b(3);
    a.step(pa, ga, 0.05);
    b.step(pb, gb, 0.05);
    for (int i = 0; i < 3; ++i) {
        CHECK(pa[i] == doctest::Approx(pb[i]).epsilon(1e-6));
        CHECK(std::fabs(pa[i] - 1.0) == doctest::Approx(0.05).epsilon(1e-4));
    }
}

namespace {

GaussianMixture sample_mixture_fixture() {
    GaussianMixture m;
    m.components.push_back({0.65, {{2, 0, 0}, 0.4}});
    m.components.push_back({0.35, {{-2, 1, 0}, 0.4}});
    return m;
}

Vec3 sample_from_mixture(const GaussianMixture& m, Pcg32& rng) {
    double u = rng.next_double(), acc = 0;
    for (const auto& c : m.components) {
        acc += c.weight;
        if (u <= acc || &c == &m.components.back()) return sample_point(c.g, rng);
    }
    return sample_point(m.components.back().g, rng);
}

}  // namespace

TEST_CASE("kl_step fixed point: samples from q with matched q_hat give zero expected gradient") {
    const double B = 1.25;
    GaussianMixture target = sample_mixture_fixture();
    EncodedMixture enc = encode(target, B);
    GaussianMixture world = decode(enc, B);

    Pcg32 rng(71, 9);
    const int n = 10000;
    const double c = 8.0;
    size_t n_par = enc.param_count();
    std::vector<RunningMeanVar> acc(n_par);
    for (int i = 0; i < n; ++i) {
        Vec3 x = sample_from_mixture(world, rng);
        double q = mixture_density(world, x);
        int t = sample_poisson(rng, c * q);
        std::vector<double> g = grad_log_mixture(enc, x * B);
        double coef = static_cast<double>(t) / q;
        for (size_t j = 0; j < n_par; ++j) acc[j].add(coef * g[j]);
    }
    double norm_mean = 0, norm_se = 0;
    for (size_t j = 0; j < n_par; ++j) {
        norm_mean += acc[j].mean * acc[j].mean;
        double se = acc[j].std_error();
        norm_se += se * se;
    }
    CHECK(std::sqrt(norm_mean) < 3 * std::sqrt(norm_se));
}

TEST_CASE("scale cancellation: t_count scaled by a constant gives the same updates") {
    const double B = 1.0;
    EncodedMixture e1;
    e1.components.push_back({{0.5, 0, 0}, 0.2, 0.1});
    e1.components.push_back({{-0.5, 0.3, 0}, -0.3, -0.1});
    EncodedMixture e2 = e1;
    AdamState a1(e1.param_count(), 1e-12), a2(e2.param_count(), 1e-12);

    Pcg32 rng(81, 3);
    for (int step = 0; step < 5; ++step) {
        std::vector<TrainingSample> b1, b2;
        for (int i = 0; i < 256; ++i) {
            Vec3 x{2 * rng.next_double() - 1, 2 * rng.next_double() - 1, 2 * rng.next_double() - 1};
            double qh = 0.5 + rng.next_double();
            int t = static_cast<int>(rng.next_double() * 4);
            b1.push_back({x, qh, t});
            b2.push_back({x, qh, 7 * t});
        }
        kl_step(e1, a1, b1, 0.05, B);
        kl_step(e2, a2, b2, 0.05, B);
    }
    for (size_t i = 0; i < e1.components.size(); ++i) {
        CHECK(length(e1.components[i].scaled_mu - e2.components[i].scaled_mu) < 1e-6);
        CHECK(std::fabs(e1.components[i].p_sigma - e2.components[i].p_sigma) < 1e-6);
        CHECK(std::fabs(e1.components[i].raw_weight - e2.components[i].raw_weight) < 1e-6);
    }
}

TEST_CASE("weights stay on the simplex after noisy steps") {
    EncodedMixture enc;
    for (int i = 0; i < 4; ++i)
        enc.components.push_back({{static_cast<double>(i), 0, 0}, 0.1 * i, 0.2 * i});
    AdamState adam(enc.param_count());
    Pcg32 rng(91, 1);
    for (int step = 0; step < 50; ++step) {
        std::vector<TrainingSample> batch;
        for (int i = 0; i < 64; ++i)
            batch.push_back({{6 * rng.next_double() - 3, 2 * rng.next_double() - 1, 0},
                             0.2 + rng.next_double(),
                             static_cast<int>(rng.next_double() * 3)});
        kl_step(enc, adam, batch, lr_schedule(step, 50), 1.0);
        GaussianMixture m = decode(enc, 1.0);
        double sum = 0;
        for (const auto& c : m.components) {
            CHECK(c.weight >= 0.0);
            sum += c.weight;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        for (const auto& c : enc.components) {
            CHECK(std::isfinite(c.scaled_mu.x));
            CHECK(std::isfinite(c.p_sigma));
            CHECK(std::isfinite(c.raw_weight));
        }
    }
}

TEST_CASE("recovery: two well-separated targets refit within 0.1 sigma (single seed)") {
    const double B = scale_factor(16.0);  // 1.25
    GaussianMixture target = sample_mixture_fixture();
    const double sigma_world = 0.4;
    const double box_lo = -4.0, box_hi = 4.0;
    const double box_volume = std::pow(box_hi - box_lo, 3.0);
    double p_peak = 0;
    for (const auto& c : target.components)
        p_peak = std::max(p_peak, mixture_density(target, c.g.mu));
    const double c_rate = 10.0 / p_peak;

    Pcg32 rng(4242, 0);
    EncodedMixture enc;
    for (const auto& c : target.components) {
        Vec3 jitter{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()};
        enc.components.push_back({(c.g.mu + jitter) * B, 0.0, 0.0});
    }
    AdamState adam(enc.param_count());

    const int steps = 512, batch_size = 4096;
    for (int it = 0; it < steps; ++it) {
        GaussianMixture current = decode(enc, B);
        std::vector<TrainingSample> batch;
        batch.reserve(batch_size);
        for (int i = 0; i < batch_size; ++i) {
            Vec3 x;
            if (rng.next_double() < 0.8) {
                x = sample_from_mixture(current, rng);
                if (x.x < box_lo || x.x > box_hi || x.y < box_lo || x.y > box_hi ||
                    x.z < box_lo || x.z > box_hi) {
                    --i;
                    continue;
                }
            } else {
                x = {box_lo + (box_hi - box_lo) * rng.next_double(),
                     box_lo + (box_hi - box_lo) * rng.next_double(),
                     box_lo + (box_hi - box_lo) * rng.next_double()};
            }
            double q_hat = 0.8 * mixture_density(current, x) + 0.2 / box_volume;
            int t = sample_poisson(rng, c_rate * mixture_density(target, x));
            batch.push_back({x, q_hat, t});
        }
        kl_step(enc, adam, batch, lr_schedule(it, steps), B);
    }

    GaussianMixture fitted = decode(enc, B);
    REQUIRE(fitted.components.size() == 2);
    // best of the two possible pairings
    auto err = [&](int a, int b) {
        return std::max(length(fitted.components[0].g.mu - target.components[a].g.mu),
                        length(fitted.components[1].g.mu - target.components[b].g.mu));
    };
    double worst = std::min(err(0, 1), err(1, 0));
    CHECK(worst < 0.1 * sigma_world);
}
