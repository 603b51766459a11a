// Photon tracing, gathering, full render passes, and the replica-exchange
// emitter. Statistical cases run on fixed seeds so every bound below is
// deterministic once it holds.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "pg/gaussian.hpp"
#include "pg/mcmc.hpp"
#include "pg/renderer.hpp"
#include "pg/stats.hpp"
#include "test_scenes.hpp"

using namespace pg;
using namespace pg::testutil;

namespace {

bool same_rgb(const RGB& a, const RGB& b) { return a.r == b.r && a.g == b.g && a.b == b.b; }

double rel_diff(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// 45-degree mirror redirecting a vertical ray onto a receiver wall at x = 3.
struct MirrorBench {
    Scene scene;
    int mirror_id = -1, wall_id = -1;
};

MirrorBench make_mirror_bench() {
    MirrorBench mb;
    Scene& s = mb.scene;
    int white = add_material(s, Material::kDiffuse, {0.8, 0.8, 0.8});
    int mirror = add_material(s, Material::kMirror);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vec3 a{inv_sqrt2, -inv_sqrt2, 0};  // in-plane axes of x + y = 0
    Vec3 b{0, 0, 1};
    mb.mirror_id = add_quad(s, (a + b) * -1.0, a * 2.0, b * 2.0, mirror, true, false);
    mb.wall_id = add_quad(s, {3, -2, -2}, {0, 4, 0}, {0, 0, 4}, white, false, true);
    Light l;
    l.kind = Light::kPoint;
    l.position = {0, 2, 0};
    l.intensity = {1, 1, 1};
    s.lights.push_back(l);
    compute_bounding_sphere(s);
    return mb;
}

// Floor-only scene (no caster anywhere): caustics must stay black.
Scene make_casterless_scene() {
    Scene s;
    int white = add_material(s, Material::kDiffuse, {0.7, 0.7, 0.7});
    add_quad(s, {-2, 0, -2}, {4, 0, 0}, {0, 0, 4}, white, false, true);
    Light l;
    l.kind = Light::kPoint;
    l.position = {0, 2.5, 0};
    l.intensity = {5, 5, 5};
    s.lights.push_back(l);
    s.camera.position = {0, 2.2, 2.2};
    s.camera.look_at = {0, 0, 0};
    s.camera.fov_deg = 45;
    s.camera.width = 16;
    s.camera.height = 12;
    compute_bounding_sphere(s);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Photon map range queries

TEST_CASE("photon map: within() returns exactly the linear-scan ball") {
    Pcg32 rng(101, 7);
    std::vector<Photon> photons(1000);
    for (Photon& p : photons) {
        p.position = {2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0,
                      2.0 * rng.next_double() - 1.0};
        p.flux = {1, 1, 1};
    }
    std::vector<Photon> copy = photons;  // build() reorders; scan the same layout
    PhotonMap map(std::move(photons));

    std::vector<int> got, want;
    for (int q = 0; q < 100; ++q) {
        Vec3 x{2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0,
               2.0 * rng.next_double() - 1.0};
        double r = 0.05 + 0.6 * rng.next_double();
        got.clear();
        map.within(x, r, got);
        want.clear();
        for (int i = 0; i < static_cast<int>(map.size()); ++i)
            if (length_sq(map.photons()[i].position - x) <= r * r) want.push_back(i);
        std::sort(got.begin(), got.end());
        REQUIRE(got.size() == want.size());
        CHECK(got == want);
    }
    CHECK(copy.size() == map.size());
}

// ---------------------------------------------------------------------------
// Photon tracing

TEST_CASE("trace: a ray that escapes reports no first bounce") {
    MirrorBench mb = make_mirror_bench();
    EmissionSample e;
    e.x0 = {0, 5, 0};
    e.w0 = Direction{0, 1, 0};
    e.pdf = 1;
    e.flux = {1, 1, 1};
    Pcg32 rng(3, 4);
    TraceResult tr = trace_photon(mb.scene, e, 8, rng);
    CHECK_FALSE(tr.has_first_bounce);
    CHECK_FALSE(tr.deposited);
}

TEST_CASE("trace: paths whose first hit is not a caster die there") {
    MirrorBench mb = make_mirror_bench();
    EmissionSample e;
    e.x0 = {2, 0, 0};  // straight at the wall, never touching the mirror
    e.w0 = Direction{1, 0, 0};
    e.pdf = 1;
    e.flux = {1, 1, 1};
    Pcg32 rng(3, 4);
    TraceResult tr = trace_photon(mb.scene, e, 8, rng);
    CHECK(tr.has_first_bounce);
    CHECK(tr.first_surface == mb.wall_id);
    CHECK(tr.first_bounce.x == doctest::Approx(3.0).epsilon(1e-9));
    CHECK_FALSE(tr.deposited);
}

TEST_CASE("trace: mirror redirect deposits flux / pdf at the receiver") {
    MirrorBench mb = make_mirror_bench();
    EmissionSample e;
    e.x0 = {0, 2, 0};
    e.w0 = Direction{0, -1, 0};
    e.pdf = 2.5;
    e.flux = {3, 4, 5};
    Pcg32 rng(3, 4);
    TraceResult tr = trace_photon(mb.scene, e, 8, rng);
    REQUIRE(tr.deposited);
    CHECK(tr.first_surface == mb.mirror_id);
    CHECK(length(tr.first_bounce - Vec3{0, 0, 0}) < 1e-9);
    CHECK(length(tr.photon.position - Vec3{3, 0, 0}) < 1e-9);
    CHECK(tr.photon.incident.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(tr.photon.incident.y) < 1e-12);
    // the deposit carries exactly flux / pdf -- no hidden scaling anywhere
    CHECK(tr.photon.flux.r == 3.0 / 2.5);
    CHECK(tr.photon.flux.g == 4.0 / 2.5);
    CHECK(tr.photon.flux.b == 5.0 / 2.5);
    CHECK(tr.photon.emission_pdf == 2.5);
    CHECK(tr.photon.first_surface == mb.mirror_id);
}

TEST_CASE("trace: a mirror box exhausts max_depth without depositing") {
    Scene s;
    int mirror = add_material(s, Material::kMirror);
    int white = add_material(s, Material::kDiffuse, {0.5, 0.5, 0.5});
    add_quad(s, {-1, 0, -1}, {2, 0, 0}, {0, 0, 2}, mirror, true, false);
    add_quad(s, {-1, 1, -1}, {2, 0, 0}, {0, 0, 2}, mirror, true, false);
    add_quad(s, {-1, -5, -1}, {2, 0, 0}, {0, 0, 2}, white, false, true);  // unreachable
    Light l;
    l.position = {0, 0.5, 0};
    s.lights.push_back(l);
    compute_bounding_sphere(s);

    EmissionSample e;
    e.x0 = {0, 0.5, 0};
    e.w0 = Direction{0, 1, 0};
    e.pdf = 1;
    e.flux = {1, 1, 1};
    Pcg32 rng(9, 9);
    TraceResult tr = trace_photon(s, e, 16, rng);
    CHECK(tr.has_first_bounce);
    CHECK_FALSE(tr.deposited);
}

// Independent dielectric reference: own sphere/plane intersections, Snell
// refraction in perpendicular/parallel decomposition, exact unpolarized
// Fresnel roulette. Shares the emission directions with the production
// tracer; only the roulette streams differ.
namespace brute {

struct BHit {
    double t = 0;
    Vec3 p, n;
    bool sphere = false;
    bool front = true;
};

bool hit_sphere(const Vec3& o, const Vec3& d, const Vec3& c, double R, double tmin, BHit& h) {
    Vec3 oc = o - c;
    double b = dot(oc, d);
    double cc = dot(oc, oc) - R * R;
    double disc = b * b - cc;
    if (disc < 0) return false;
    double s = std::sqrt(disc);
    double t = -b - s;
    if (t <= tmin) t = -b + s;
    if (t <= tmin) return false;
    h.t = t;
    h.p = o + d * t;
    Vec3 n = (h.p - c) * (1.0 / R);
    h.front = dot(d, n) < 0;
    h.n = h.front ? n : n * -1.0;
    h.sphere = true;
    return true;
}

bool hit_floor(const Vec3& o, const Vec3& d, double tmin, BHit& h) {
    if (std::fabs(d.y) < 1e-12) return false;
    double t = -o.y / d.y;
    if (t <= tmin) return false;
    Vec3 p = o + d * t;
    if (std::fabs(p.x) > 2.0 || std::fabs(p.z) > 2.0) return false;
    h.t = t;
    h.p = p;
    h.n = d.y < 0 ? Vec3{0, 1, 0} : Vec3{0, -1, 0};
    h.sphere = false;
    h.front = true;
    return true;
}

// true when the path ends on the floor having entered through the sphere
bool trace(Vec3 o, Vec3 d, const Vec3& c, double R, double ior, int max_depth, Pcg32& rr) {
    bool through_glass = false;
    for (int depth = 0; depth < max_depth; ++depth) {
        BHit hs, hf, h;
        bool bs = hit_sphere(o, d, c, R, 1e-6, hs);
        bool bf = hit_floor(o, d, 1e-6, hf);
        if (!bs && !bf) return false;
        h = (bs && (!bf || hs.t < hf.t)) ? hs : hf;
        if (depth == 0 && !h.sphere) return false;  // first contact must be the caster
        if (!h.sphere) return through_glass;        // diffuse floor terminates
        through_glass = true;
        double n1 = h.front ? 1.0 : ior;
        double n2 = h.front ? ior : 1.0;
        double eta = n1 / n2;
        double cosi = -dot(d, h.n);
        Vec3 t_perp = (d + h.n * cosi) * eta;
        double k = 1.0 - dot(t_perp, t_perp);
        if (k <= 0) {  // total internal reflection
            d = normalize(d + h.n * (2.0 * cosi));
            o = h.p;
            continue;
        }
        double cost = std::sqrt(k);
        double rs = (n1 * cosi - n2 * cost) / (n1 * cosi + n2 * cost);
        double rp = (n1 * cost - n2 * cosi) / (n1 * cost + n2 * cosi);
        double fr = 0.5 * (rs * rs + rp * rp);
        if (rr.next_double() < fr) {
            d = normalize(d + h.n * (2.0 * cosi));
        } else {
            d = normalize(t_perp - h.n * cost);
        }
        o = h.p;
    }
    return false;
}

}  // namespace brute

TEST_CASE("trace: glass-sphere floor flux matches an independent tracer within 2%") {
    Scene s = make_glass_sphere_scene(0.35);
    const Light& light = s.lights[0];
    const Vec3 center{0, 0.8, 0};
    const double R = 0.35, ior = 1.5;
    const int N = 1000000;

    Pcg32 dir_rng(77, 5);
    long prod_hits = 0, brute_hits = 0;
    double prod_flux = 0;
    for (int i = 0; i < N; ++i) {
        Vec3 w = sample_uniform_sphere(dir_rng);
        EmissionSample e;
        e.x0 = light.position;
        e.w0 = Direction(w);
        e.pdf = kInv4Pi;
        e.flux = light.intensity;

        Pcg32 rr_a = make_stream(1, 0, kStreamMisc, static_cast<uint64_t>(i));
        TraceResult tr = trace_photon(s, e, 8, rr_a);
        if (tr.deposited) {
            ++prod_hits;
            prod_flux += luminance(tr.photon.flux);
        }

        Pcg32 rr_b = make_stream(2, 0, kStreamMisc, static_cast<uint64_t>(i));
        if (brute::trace(light.position, w, center, R, ior, 8, rr_b)) ++brute_hits;
    }
    REQUIRE(brute_hits > 500);
    INFO("production " << prod_hits << " vs reference " << brute_hits);
    CHECK(rel_diff(static_cast<double>(prod_hits), static_cast<double>(brute_hits)) < 0.02);
    // per-deposit weight is constant for a point light: flux = intensity / pdf
    CHECK(prod_flux ==
          doctest::Approx(prod_hits * luminance(light.intensity) / kInv4Pi).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// Gathering

TEST_CASE("gather: radius conventions and photon selection") {
    auto ring = [](double r, double flux) {
        std::vector<Photon> ps(4);
        ps[0].position = {r, 0, 0};
        ps[1].position = {-r, 0, 0};
        ps[2].position = {0, r, 0};
        ps[3].position = {0, -r, 0};
        for (Photon& p : ps) p.flux = {flux, flux, flux};
        return ps;
    };

    SUBCASE("four equidistant photons pin the adaptive radius") {
        PhotonMap map(ring(0.25, 1.0));
        GatherResult g = gather(map, {0, 0, 0}, {1, 1, 1}, 0.5, 1);
        REQUIRE(g.ids.size() == 4);
        CHECK(g.used_radius == doctest::Approx(0.25).epsilon(1e-12));
        double expect = 4.0 / (kPi * kPi * 0.25 * 0.25);
        CHECK(g.radiance.r == doctest::Approx(expect).epsilon(1e-12));
        CHECK(g.radiance.g == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("fewer than four in range fall back to the cap radius") {
        auto ps = ring(0.25, 1.0);
        ps.pop_back();
        PhotonMap map(std::move(ps));
        GatherResult g = gather(map, {0, 0, 0}, {1, 1, 1}, 0.5, 1);
        REQUIRE(g.ids.size() == 3);
        CHECK(g.used_radius == 0.5);
        CHECK(g.radiance.r == doctest::Approx(3.0 / (kPi * kPi * 0.25)).epsilon(1e-12));
    }

    SUBCASE("photons beyond the cap never participate") {
        auto ps = ring(0.25, 1.0);
        Photon far;
        far.position = {0.9, 0, 0};
        far.flux = {100, 100, 100};
        ps.push_back(far);
        PhotonMap map(std::move(ps));
        GatherResult g = gather(map, {0, 0, 0}, {1, 1, 1}, 0.5, 1);
        REQUIRE(g.ids.size() == 4);
        for (int id : g.ids) CHECK(map.photons()[id].flux.r == 1.0);
        GatherResult gf = gather_fixed(map, {0, 0, 0}, {1, 1, 1}, 0.5, 1);
        CHECK(gf.ids.size() == 4);
        CHECK(gf.used_radius == 0.5);
    }

    SUBCASE("an empty map yields zero radiance at the cap radius") {
        PhotonMap map{std::vector<Photon>{}};
        GatherResult g = gather(map, {0, 0, 0}, {1, 1, 1}, 0.5, 1);
        CHECK(g.ids.empty());
        CHECK(g.radiance.r == 0.0);
        CHECK(g.used_radius == 0.5);
    }
}

TEST_CASE("gather: uniform photon field reproduces the analytic density") {
    // N photons of flux f jittered over the unit square give the estimator
    // expectation f * albedo / pi when n_emitted = N.
    const int N = 20000;
    Pcg32 rng(404, 11);
    std::vector<Photon> ps(N);
    for (Photon& p : ps) {
        p.position = {rng.next_double(), rng.next_double(), 0.0};
        p.flux = {2.0, 2.0, 2.0};
    }
    PhotonMap map(std::move(ps));
    const RGB albedo{0.6, 0.6, 0.6};
    const double analytic = 2.0 * 0.6 / kPi;
    const double r = 0.05;

    RunningMeanVar fixed_est, adaptive_est;
    for (int gy = 0; gy < 8; ++gy)
        for (int gx = 0; gx < 8; ++gx) {
            Vec3 x{0.2 + 0.6 * gx / 7.0, 0.2 + 0.6 * gy / 7.0, 0.0};
            GatherResult gf = gather_fixed(map, x, albedo, r, N);
            fixed_est.add(gf.radiance.g);
            GatherResult ga = gather(map, x, albedo, r, N);
            adaptive_est.add(ga.radiance.g);
            CHECK(ga.used_radius <= r);
            CHECK(ga.used_radius > 0.0);
        }
    INFO("fixed " << fixed_est.mean << " adaptive " << adaptive_est.mean << " analytic "
                  << analytic);
    CHECK(rel_diff(fixed_est.mean, analytic) < 0.10);
    // the 4th-neighbour estimator inflates a Poisson field by ~4/3
    CHECK(adaptive_est.mean > analytic);
    CHECK(adaptive_est.mean < 1.8 * analytic);
}

// ---------------------------------------------------------------------------
// Renderer end-to-end behaviour

TEST_CASE("render: configuration and scene validation") {
    Scene s = make_glass_sphere_scene();
    RenderConfig cfg;
    cfg.iterations = 0;
    CHECK_THROWS_AS(Renderer(s, cfg), std::invalid_argument);
    cfg = RenderConfig{};
    cfg.beta = 1.5;
    CHECK_THROWS_AS(Renderer(s, cfg), std::invalid_argument);
    cfg = RenderConfig{};
    Scene dark = s;
    dark.lights.clear();
    CHECK_THROWS_AS(Renderer(dark, cfg), std::invalid_argument);
    Scene deaf = s;
    for (Surface& surf : deaf.surfaces) surf.receiver = false;
    CHECK_THROWS_AS(Renderer(deaf, cfg), std::invalid_argument);
}

TEST_CASE("render: a single iteration accumulates nothing") {
    Scene s = make_glass_sphere_scene();
    s.camera.width = 24;
    s.camera.height = 18;
    RenderConfig cfg;
    cfg.iterations = 1;
    cfg.photons_per_iteration = 2048;
    Renderer r(s, cfg);
    RunResult rr = r.run();
    CHECK(rr.metrics.size() == 1);
    CHECK(r.framebuffer().samples == 0);
    for (const RGB& px : r.framebuffer().image()) CHECK(luminance(px) == 0.0);
    CHECK(rr.light_flux[0] == 0.0);
}

TEST_CASE("render: every strategy leaves the caustic layer black without casters") {
    Scene s = make_casterless_scene();
    const GuiderKind kinds[] = {GuiderKind::kG3D,  GuiderKind::kUniform, GuiderKind::kBound,
                                GuiderKind::kH2D,  GuiderKind::kVMF,     GuiderKind::kMCMC};
    for (GuiderKind kind : kinds) {
        CAPTURE(static_cast<int>(kind));
        RenderConfig cfg;
        cfg.guider = kind;
        cfg.iterations = 3;
        cfg.photons_per_iteration = 1024;
        cfg.components = 4;
        cfg.mcmc_chains = 8;
        cfg.seed = 5;
        Renderer r(s, cfg);
        RunResult rr = r.run();
        double caustic_total = 0, direct_total = 0;
        for (const RGB& px : r.framebuffer().caustic) caustic_total += luminance(px);
        for (const RGB& px : r.framebuffer().direct) direct_total += luminance(px);
        CHECK(caustic_total == 0.0);
        CHECK(direct_total > 0.0);
        for (const MetricsRow& row : rr.metrics) CHECK(row.gathered == 0);
    }
}

TEST_CASE("render: beta = 0 guiding is bit-identical to the uniform strategy") {
    Scene s = make_glass_sphere_scene();
    s.camera.width = 48;
    s.camera.height = 36;
    RenderConfig base;
    base.iterations = 3;
    base.photons_per_iteration = 4096;
    base.seed = 7;
    base.beta = 0.0;

    RenderConfig cg = base;
    cg.guider = GuiderKind::kG3D;
    RenderConfig cu = base;
    cu.guider = GuiderKind::kUniform;

    Renderer rg(s, cg), ru(s, cu);
    RunResult og = rg.run(), ou = ru.run();

    const Framebuffer& fg = rg.framebuffer();
    const Framebuffer& fu = ru.framebuffer();
    REQUIRE(fg.caustic.size() == fu.caustic.size());
    int mismatches = 0;
    for (size_t i = 0; i < fg.caustic.size(); ++i) {
        if (!same_rgb(fg.caustic[i], fu.caustic[i])) ++mismatches;
        if (!same_rgb(fg.direct[i], fu.direct[i])) ++mismatches;
        if (fg.radius[i] != fu.radius[i]) ++mismatches;
    }
    CHECK(mismatches == 0);
    REQUIRE(og.metrics.size() == ou.metrics.size());
    for (size_t i = 0; i < og.metrics.size(); ++i)
        CHECK(og.metrics[i].gathered == ou.metrics[i].gathered);
    CHECK(og.light_flux[0] == ou.light_flux[0]);
    // the guided run did have a live mixture -- beta alone switched it off
    const GaussianMixture* mix = rg.guider(0).mixture();
    REQUIRE(mix != nullptr);
    CHECK_FALSE(mix->components.empty());
}

TEST_CASE("render: guided emission preserves deposited energy and multiplies deposits") {
    Scene s = make_glass_sphere_scene();
    s.camera.width = 32;
    s.camera.height = 24;
    RenderConfig cg;
    cg.guider = GuiderKind::kG3D;
    cg.beta = 0.8;
    cg.components = 16;
    cg.photons_per_iteration = 8192;
    cg.iterations = 13;
    cg.seed = 21;
    RenderConfig cu = cg;
    cu.guider = GuiderKind::kUniform;

    Renderer rg(s, cg), ru(s, cu);
    IterationOutput g0 = rg.render_iteration(0);
    rg.init_light_mixtures(g0.batches);
    (void)ru.render_iteration(0);

    RunningMeanVar flux_g, flux_u;
    long dep_g = 0, dep_u = 0;
    for (int it = 1; it < cg.iterations; ++it) {
        IterationOutput og = rg.render_iteration(it);
        IterationOutput ou = ru.render_iteration(it);
        flux_g.add(og.deposited_flux[0]);
        flux_u.add(ou.deposited_flux[0]);
        dep_g += og.deposited;
        dep_u += ou.deposited;
    }
    const GaussianMixture* mix = rg.guider(0).mixture();
    REQUIRE(mix != nullptr);
    REQUIRE_FALSE(mix->components.empty());

    double se = std::sqrt(flux_g.std_error() * flux_g.std_error() +
                          flux_u.std_error() * flux_u.std_error());
    INFO("guided " << flux_g.mean << " +- " << flux_g.std_error() << ", uniform " << flux_u.mean
                   << " +- " << flux_u.std_error());
    CHECK(std::fabs(flux_g.mean - flux_u.mean) <= 3.0 * se);
    CHECK(rel_diff(flux_g.mean, flux_u.mean) < 0.3);  // no stray pmf / pdf factors
    // guiding must concentrate emissions onto the caster
    INFO("deposits guided " << dep_g << " uniform " << dep_u);
    CHECK(dep_g > 3 * dep_u);
}

TEST_CASE("render: gather totals reconcile with the training batches") {
    Scene s = make_glass_sphere_scene();
    s.camera.width = 32;
    s.camera.height = 24;
    RenderConfig cfg;
    cfg.photons_per_iteration = 4096;
    cfg.iterations = 4;
    cfg.seed = 3;
    Renderer r(s, cfg);
    IterationOutput o0 = r.render_iteration(0);
    r.init_light_mixtures(o0.batches);
    IterationOutput o1 = r.render_iteration(1);

    long total_from_lights = 0;
    for (long t : o1.gather_totals) total_from_lights += t;
    CHECK(o1.gathered == total_from_lights);

    long total_from_batches = 0;
    long deposited_in_batches = 0;
    for (const auto& batch : o1.batches)
        for (const TrainingSample& smp : batch) {
            total_from_batches += smp.t_count;
            deposited_in_batches += smp.deposited ? 1 : 0;
            CHECK(smp.q_hat > 0.0);
            if (smp.t_count > 0) CHECK(smp.deposited);
        }
    CHECK(total_from_batches == o1.gathered);
    CHECK(deposited_in_batches == o1.deposited);
    CHECK(o1.gathered > 0);  // the caustic is actually being seen
}

TEST_CASE("render: radius heatmap stays within the cap") {
    Scene s = make_glass_sphere_scene();
    s.camera.width = 32;
    s.camera.height = 24;
    RenderConfig cfg;
    cfg.photons_per_iteration = 4096;
    cfg.iterations = 3;
    Renderer r(s, cfg);
    r.run();
    const Framebuffer& fb = r.framebuffer();
    int positive = 0;
    for (double rad : fb.radius) {
        CHECK(rad >= 0.0);
        CHECK(rad <= r.max_radius() + 1e-12);
        positive += rad > 0 ? 1 : 0;
    }
    CHECK(positive > 0);
}

// ---------------------------------------------------------------------------
// Initializer modes

TEST_CASE("render: geometry initialization plants every mean on the caster") {
    Scene s = make_glass_sphere_scene(0.35);
    RenderConfig cfg;
    cfg.components = 8;
    cfg.iterations = 1;
    cfg.photons_per_iteration = 4096;
    cfg.init_mode = InitMode::kGeometry;
    Renderer r(s, cfg);
    r.run();
    const GaussianMixture* mix = r.guider(0).mixture();
    REQUIRE(mix != nullptr);
    REQUIRE_FALSE(mix->components.empty());
    CHECK(mix->components.size() <= 8);
    double wsum = 0;
    for (const WeightedGaussian& c : mix->components) {
        wsum += c.weight;
        CHECK(c.g.sigma > 0.0);
        // seed means are centroids of surface patches: inside the sphere but
        // hugging it (a cap centroid for k = 8 sits near 0.87 r)
        double d = length(c.g.mu - Vec3{0, 0.8, 0});
        CHECK(d <= 0.35 * (1 + 1e-9));
        CHECK(d >= 0.2);
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("render: geometry initialization survives a light that sees nothing") {
    // Light underneath the floor: every photon dies at a non-caster first hit,
    // so the seed ranking has no votes and must fall back to the caster hull.
    Scene s = make_glass_sphere_scene(0.35);
    s.lights[0].position = {0, -1.0, 0};
    RenderConfig cfg;
    cfg.components = 6;
    cfg.iterations = 1;
    cfg.photons_per_iteration = 2048;
    Renderer r(s, cfg);
    r.run();
    const GaussianMixture* mix = r.guider(0).mixture();
    REQUIRE(mix != nullptr);
    REQUIRE_FALSE(mix->components.empty());
    for (const WeightedGaussian& c : mix->components) {
        double d = length(c.g.mu - Vec3{0, 0.8, 0});
        CHECK(d <= 0.35 * (1 + 1e-9));
        CHECK(d >= 0.2);
    }
}

TEST_CASE("render: naive initialization clusters the deposited bounces") {
    Scene s = make_glass_sphere_scene(0.35);
    RenderConfig cfg;
    cfg.components = 8;
    cfg.iterations = 1;
    cfg.photons_per_iteration = 8192;
    cfg.init_mode = InitMode::kNaive;
    Renderer r(s, cfg);
    r.run();
    const GaussianMixture* mix = r.guider(0).mixture();
    REQUIRE(mix != nullptr);
    REQUIRE_FALSE(mix->components.empty());
    for (const WeightedGaussian& c : mix->components) {
        CHECK(c.g.sigma >= 1e-4 * r.scene().bound_radius * 0.999);
        CHECK(length(c.g.mu - r.scene().bound_center) <= r.scene().bound_radius * 1.001);
    }
}

TEST_CASE("render: initialization off leaves the mixture empty") {
    Scene s = make_glass_sphere_scene();
    RenderConfig cfg;
    cfg.iterations = 1;
    cfg.photons_per_iteration = 1024;
    cfg.init_mode = InitMode::kOff;
    Renderer r(s, cfg);
    r.run();
    const GaussianMixture* mix = r.guider(0).mixture();
    REQUIRE(mix != nullptr);
    CHECK(mix->components.empty());
}

// ---------------------------------------------------------------------------
// Scripted emission (primary-sample-space replay)

TEST_CASE("scripted emission: an empty script defers to the fallback stream exactly") {
    Scene s = make_glass_sphere_scene();
    Light rect;
    rect.kind = Light::kRectArea;
    rect.corner = {-0.5, 2.0, -0.5};
    rect.edge_u = {1, 0, 0};
    rect.edge_v = {0, 0, 1};
    rect.radiance = {3, 3, 3};
    Light dir;
    dir.kind = Light::kDirectional;
    dir.direction = {0.3, -1, 0.1};
    dir.radiance = {2, 2, 2};
    const Light lights[] = {s.lights[0], rect, dir};

    for (const Light& l : lights) {
        CAPTURE(static_cast<int>(l.kind));
        ScriptedRng sr;
        sr.overflow = Pcg32(55, 8);
        Pcg32 pr(55, 8);
        EmissionSample a = emit_uniform(s, l, sr);
        EmissionSample b = emit_uniform(s, l, pr);
        CHECK(a.x0.x == b.x0.x);
        CHECK(a.x0.y == b.x0.y);
        CHECK(a.x0.z == b.x0.z);
        CHECK(a.w0.v.x == b.w0.v.x);
        CHECK(a.w0.v.y == b.w0.v.y);
        CHECK(a.w0.v.z == b.w0.v.z);
        CHECK(a.pdf == b.pdf);
        CHECK(same_rgb(a.flux, b.flux));
    }
}

TEST_CASE("scripted emission: coordinates map to the documented draws") {
    Scene s = make_glass_sphere_scene();

    SUBCASE("point light: two coordinates set the sphere direction") {
        ScriptedRng sr;
        sr.script = {0.3, 0.7};
        EmissionSample e = emit_uniform(s, s.lights[0], sr);
        double z = 1.0 - 2.0 * 0.3;
        double r = std::sqrt(1.0 - z * z);
        double phi = 2.0 * kPi * 0.7;
        CHECK(e.x0.x == s.lights[0].position.x);
        CHECK(e.w0.v.x == doctest::Approx(r * std::cos(phi)).epsilon(1e-12));
        CHECK(e.w0.v.y == doctest::Approx(r * std::sin(phi)).epsilon(1e-12));
        CHECK(e.w0.v.z == doctest::Approx(z).epsilon(1e-12));
        CHECK(e.pdf == kInv4Pi);
        CHECK(same_rgb(e.flux, s.lights[0].intensity));
    }

    SUBCASE("rect light: position pair first, then the cosine direction") {
        Light rect;
        rect.kind = Light::kRectArea;
        rect.corner = {-1, 2, -1};
        rect.edge_u = {2, 0, 0};
        rect.edge_v = {0, 0, 2};
        rect.radiance = {3, 3, 3};
        ScriptedRng sr;
        sr.script = {0.25, 0.5, 0.3, 0.7};
        EmissionSample e = emit_uniform(s, rect, sr);
        Vec3 want = rect.corner + rect.edge_u * 0.25 + rect.edge_v * 0.5;
        CHECK(e.x0.x == want.x);
        CHECK(e.x0.y == want.y);
        CHECK(e.x0.z == want.z);
        double cos_theta = std::sqrt(1.0 - 0.3);  // hemisphere z from the third draw
        CHECK(dot(e.w0.v, rect.rect_normal()) == doctest::Approx(cos_theta).epsilon(1e-12));
        CHECK(e.pdf == doctest::Approx(cos_theta / kPi / rect.rect_area()).epsilon(1e-12));
        CHECK(e.flux.r == doctest::Approx(3.0 * cos_theta).epsilon(1e-12));
    }

    SUBCASE("directional light: two coordinates pick the disk point") {
        Light dl;
        dl.kind = Light::kDirectional;
        dl.direction = {0.2, -1, 0.1};
        dl.radiance = {2, 2, 2};
        ScriptedRng sr;
        sr.script = {0.4, 0.9};
        EmissionSample e = emit_uniform(s, dl, sr);
        Vec3 w = normalize(dl.direction);
        double b = s.bound_radius;
        CHECK(e.w0.v.x == doctest::Approx(w.x).epsilon(1e-12));
        CHECK(e.w0.v.y == doctest::Approx(w.y).epsilon(1e-12));
        // x0 sits on the pushed-back plane, within the bounding disk
        Vec3 on_plane = e.x0 + w * b - s.bound_center;
        CHECK(std::fabs(dot(on_plane, w)) < 1e-9);
        CHECK(length(on_plane) <= b * (1 + 1e-12));
        CHECK(e.pdf == doctest::Approx(1.0 / (kPi * b * b)).epsilon(1e-12));
        CHECK(same_rgb(e.flux, dl.radiance));
    }
}

// ---------------------------------------------------------------------------
// Replica-exchange emitter

TEST_CASE("mcmc: one-dimensional toy chain matches its stationary distribution") {
    auto in_target = [](double x) {
        return (x >= 0.2 && x < 0.25) || (x >= 0.6 && x < 0.7);
    };
    TargetFn target = [&](const std::vector<double>& v) { return in_target(v[0]); };

    McmcChain chain;
    chain.state = {0.62};
    chain.seeded = true;
    Pcg32 rng(987, 3);
    long proposed = 0, accepted = 0;
    const int steps = 200000;
    std::vector<long> bins(100, 0);
    for (int i = 0; i < steps; ++i) {
        McmcRecord rec = mcmc_step(chain, target, 0.05, 1, rng, proposed, accepted);
        REQUIRE(rec != McmcRecord::kNone);
        REQUIRE(in_target(chain.state[0]));
        int b = std::min(99, static_cast<int>(chain.state[0] * 100.0));
        bins[b] += 1;
    }
    CHECK(proposed == steps);
    double b_hat = static_cast<double>(accepted) / static_cast<double>(proposed);
    CHECK(b_hat == doctest::Approx(0.15).epsilon(0.07));

    // analytic stationary density: uniform over the 0.15 target mass
    double tv = 0;
    for (int b = 0; b < 100; ++b) {
        double lo = b / 100.0;
        double expect = in_target(lo + 0.005) ? (0.01 / 0.15) : 0.0;
        tv += std::fabs(static_cast<double>(bins[b]) / steps - expect);
    }
    tv *= 0.5;
    INFO("total variation " << tv);
    CHECK(tv <= 0.05);
}

TEST_CASE("mcmc: an always-true target degenerates to uniform sampling") {
    TargetFn target = [](const std::vector<double>&) { return true; };
    McmcChain chain;
    Pcg32 rng(55, 1);
    long proposed = 0, accepted = 0;
    RunningMeanVar mean;
    for (int i = 0; i < 20000; ++i) {
        McmcRecord rec = mcmc_step(chain, target, 0.001, 2, rng, proposed, accepted);
        CHECK(rec == McmcRecord::kUniformAccept);
        mean.add(chain.state[0]);
    }
    CHECK(accepted == proposed);
    CHECK(mean.mean == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("mcmc: unseeded chains stay silent until the first acceptance") {
    TargetFn target = [](const std::vector<double>& v) { return v[0] < 0.05; };
    McmcChain chain;
    Pcg32 rng(42, 9);
    long proposed = 0, accepted = 0;
    bool seen_accept = false;
    for (int i = 0; i < 400; ++i) {
        McmcRecord rec = mcmc_step(chain, target, 0.005, 1, rng, proposed, accepted);
        if (!seen_accept) {
            CHECK((rec == McmcRecord::kNone || rec == McmcRecord::kUniformAccept));
            if (rec == McmcRecord::kUniformAccept) seen_accept = true;
        } else {
            CHECK(rec != McmcRecord::kNone);
        }
        if (rec != McmcRecord::kNone) CHECK(chain.state[0] < 0.05);
    }
    CHECK(seen_accept);  // p = 0.05 per step makes a miss astronomically unlikely
    CHECK(accepted < proposed);
}

TEST_CASE("mcmc: emitter flux calibrates against uniform emission") {
    Scene s = make_glass_sphere_scene(0.35);
    const Light& light = s.lights[0];

    // uniform reference estimate of the deposited luminance per emission
    const int NU = 200000;
    double uniform_est = 0;
    for (int i = 0; i < NU; ++i) {
        Pcg32 rng = make_stream(900, 0, kStreamMisc, static_cast<uint64_t>(i));
        EmissionSample e = emit_uniform(s, light, rng);
        TraceResult tr = trace_photon(s, e, 8, rng);
        if (tr.deposited) uniform_est += luminance(tr.photon.flux);
    }
    uniform_est /= NU;

    McmcEmitter em(32, 0.005, 123);
    const int passes = 10, per_pass = 30000;
    RunningMeanVar est;
    for (int it = 0; it < passes; ++it) {
        long n_emitted = 0;
        std::vector<Photon> ps = em.photon_pass(s, per_pass, it, 8, &n_emitted);
        CHECK(n_emitted == (per_pass + 31) / 32);
        double pass_est = 0;
        for (const Photon& p : ps) {
            CHECK(p.light_id == 0);
            pass_est += luminance(p.flux);
        }
        pass_est /= static_cast<double>(n_emitted);
        if (it >= 2) est.add(pass_est);  // let the visibility estimate settle
    }
    INFO("mcmc " << est.mean << " vs uniform " << uniform_est << ", visibility "
                 << em.visibility());
    CHECK(em.visibility() > 0.001);
    CHECK(em.visibility() < 0.05);
    CHECK(rel_diff(est.mean, uniform_est) < 0.10);
}

TEST_CASE("mcmc: renderer integration keeps deposits flowing") {
    Scene s = make_glass_sphere_scene();
    s.camera.width = 24;
    s.camera.height = 18;
    RenderConfig cfg;
    cfg.guider = GuiderKind::kMCMC;
    cfg.iterations = 4;
    cfg.photons_per_iteration = 4096;
    cfg.mcmc_chains = 16;
    cfg.seed = 2;
    Renderer r(s, cfg);
    RunResult rr = r.run();
    CHECK(rr.metrics.size() == 4);
    double caustic_total = 0;
    for (const RGB& px : r.framebuffer().caustic) caustic_total += luminance(px);
    CHECK(caustic_total > 0.0);
    CHECK(rr.light_flux[0] > 0.0);
}
