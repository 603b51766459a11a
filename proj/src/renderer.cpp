#include "pg/renderer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pg/initializer.hpp"
#include "pg/kmeans.hpp"

namespace pg {

namespace {

constexpr double kRayEps = 1e-6;  // self-intersection guard, matches the shadow tests
constexpr int kInitSurfaceSamples = 4096;  // caster-surface points behind the seed set

Vec3 reflect(const Vec3& d, const Vec3& n) { return d - n * (2.0 * dot(d, n)); }

// Mirror or dielectric bounce; updates the ray in place. The dielectric picks
// reflection with the exact Fresnel probability (unpolarized) and refracts
// otherwise, so the photon flux never needs scaling by the lobe choice.
template <class Rng>
void specular_scatter(const Material& m, const Hit& h, Ray& ray, Rng& rng) {
    const Vec3 d = ray.d;
    const Vec3 n = h.normal;  // faces the incoming ray
    if (m.kind == Material::kMirror) {
        ray = {h.position, normalize(reflect(d, n))};
        return;
    }
    double cosi = -dot(d, n);
    double n1 = h.front_face ? 1.0 : m.ior;
    double n2 = h.front_face ? m.ior : 1.0;
    double eta = n1 / n2;
    double sin2t = eta * eta * std::max(0.0, 1.0 - cosi * cosi);
    if (sin2t >= 1.0) {  // total internal reflection
        ray = {h.position, normalize(reflect(d, n))};
        return;
    }
    double cost = std::sqrt(1.0 - sin2t);
    double rs = (n1 * cosi - n2 * cost) / (n1 * cosi + n2 * cost);
    double rp = (n1 * cost - n2 * cosi) / (n1 * cost + n2 * cosi);
    double fresnel = 0.5 * (rs * rs + rp * rp);
    if (rng.next_double() < fresnel)
        ray = {h.position, normalize(reflect(d, n))};
    else
        ray = {h.position, normalize(d * eta + n * (eta * cosi - cost))};
}

// Next-event estimation at a diffuse hit: every light is tested once. Rect
// lights always consume their two area draws so the draw count per pixel
// stays independent of visibility outcomes.
template <class Rng>
RGB direct_lighting(const Scene& scene, const Hit& h, const RGB& albedo, Rng& rng) {
    RGB sum;
    const Vec3& x = h.position;
    const Vec3& n = h.normal;
    for (const Light& light : scene.lights) {
        if (light.kind == Light::kPoint) {
            Vec3 d = light.position - x;
            double r2 = length_sq(d);
            if (r2 <= 0) continue;
            Vec3 wi = d / std::sqrt(r2);
            double c = dot(n, wi);
            if (c <= 0) continue;
            if (occluded(scene, x, light.position)) continue;
            sum += light.intensity * (albedo * (c / (kPi * r2)));
        } else if (light.kind == Light::kRectArea) {
            double u1 = rng.next_double(), u2 = rng.next_double();
            Vec3 q = light.corner + light.edge_u * u1 + light.edge_v * u2;
            Vec3 d = q - x;
            double r2 = length_sq(d);
            if (r2 <= 0) continue;
            Vec3 wi = d / std::sqrt(r2);
            double cos_x = dot(n, wi);
            double cos_l = -dot(light.rect_normal(), wi);  // one-sided emitter
            if (cos_x <= 0 || cos_l <= 0) continue;
            if (occluded(scene, x, q)) continue;
            sum += light.radiance * (albedo * (cos_x * cos_l * light.rect_area() / (kPi * r2)));
        } else {
            Vec3 wi = normalize(light.direction) * -1.0;
            double c = dot(n, wi);
            if (c <= 0) continue;
            if (occluded_dir(scene, x, wi, 1e30)) continue;
            sum += light.radiance * (albedo * (c / kPi));
        }
    }
    return sum;
}

RGB accumulate_flux(const PhotonMap& map, const std::vector<int>& ids) {
    RGB flux;
    for (int id : ids) flux += map.photons()[id].flux;
    return flux;
}

Vec3 uniform_in_sphere(const Vec3& center, double radius, Pcg32& rng) {
    Vec3 dir = sample_uniform_sphere(rng);
    double r = radius * std::cbrt(rng.next_double());
    return center + dir * r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Framebuffer

void Framebuffer::init(int w, int h) {
    width = w;
    height = h;
    samples = 0;
    size_t n = static_cast<size_t>(w) * h;
    caustic.assign(n, RGB{});
    direct.assign(n, RGB{});
    radius.assign(n, 0.0);
    lum_mean.assign(n, 0.0);
    lum_m2.assign(n, 0.0);
}

void Framebuffer::accumulate(const std::vector<RGB>& c, const std::vector<RGB>& d,
                             const std::vector<double>& r) {
    ++samples;
    double inv = 1.0 / static_cast<double>(samples);
    for (size_t i = 0; i < caustic.size(); ++i) {
        caustic[i] += (c[i] - caustic[i]) * inv;
        direct[i] += (d[i] - direct[i]) * inv;
        radius[i] = r[i];
        double lum = luminance(c[i]);
        double delta = lum - lum_mean[i];
        lum_mean[i] += delta * inv;
        lum_m2[i] += delta * (lum - lum_mean[i]);
    }
}

double Framebuffer::lum_stderr(size_t i) const {
    if (samples < 2) return 0.0;
    double var = lum_m2[i] / static_cast<double>(samples - 1);
    return std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
}

std::vector<RGB> Framebuffer::image() const {
    std::vector<RGB> out(caustic.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = caustic[i] + direct[i];
    return out;
}

std::vector<RGB> Framebuffer::caustic_image() const { return caustic; }

// ---------------------------------------------------------------------------
// Photon tracing

template <class Rng>
TraceResult trace_photon(const Scene& scene, const EmissionSample& e, int max_depth, Rng& rng) {
    TraceResult out;
    Ray ray{e.x0, e.w0.v};
    bool caster_seen = false;
    for (int depth = 0; depth < max_depth; ++depth) {
        Hit h;
        if (!intersect(scene, ray, h, kRayEps)) return out;  // escaped
        if (depth == 0) {
            out.has_first_bounce = true;
            out.first_bounce = h.position;
            out.first_surface = h.surface;
            if (!h.caster) return out;  // a path not entering through a caster dies
        }
        const Material& m = scene.materials[h.material];
        if (m.kind == Material::kDiffuse) {
            if (caster_seen && h.receiver) {
                out.deposited = true;
                out.photon.position = h.position;
                out.photon.incident = ray.d;
                out.photon.flux = e.flux / e.pdf;
                out.photon.first_bounce = out.first_bounce;
                out.photon.first_surface = out.first_surface;
                out.photon.emission_pdf = e.pdf;
            }
            return out;  // diffuse terminates, deposit or not
        }
        caster_seen = caster_seen || h.caster;
        specular_scatter(m, h, ray, rng);
    }
    return out;  // depth exhausted
}

template TraceResult trace_photon<Pcg32>(const Scene&, const EmissionSample&, int, Pcg32&);
template TraceResult trace_photon<ScriptedRng>(const Scene&, const EmissionSample&, int,
                                               ScriptedRng&);

// ---------------------------------------------------------------------------
// Gathering

GatherResult gather(const PhotonMap& map, const Vec3& x, const RGB& albedo, double max_radius,
                    long n_emitted) {
    GatherResult g;
    g.used_radius = max_radius;
    map.knn(x, 4, max_radius, g.ids);
    if (g.ids.size() == 4)
        g.used_radius = length(x - map.photons()[g.ids.back()].position);
    if (g.ids.empty() || n_emitted <= 0) return g;
    g.used_radius = std::max(g.used_radius, 1e-9 * max_radius);  // coincident-photon guard
    double norm = 1.0 / (kPi * kPi * g.used_radius * g.used_radius *
                         static_cast<double>(n_emitted));
    g.radiance = accumulate_flux(map, g.ids) * albedo * norm;
    return g;
}

GatherResult gather_fixed(const PhotonMap& map, const Vec3& x, const RGB& albedo,
                          double max_radius, long n_emitted) {
    GatherResult g;
    g.used_radius = max_radius;
    map.within(x, max_radius, g.ids);
    if (g.ids.empty() || n_emitted <= 0) return g;
    double norm = 1.0 / (kPi * kPi * max_radius * max_radius * static_cast<double>(n_emitted));
    g.radiance = accumulate_flux(map, g.ids) * albedo * norm;
    return g;
}

// ---------------------------------------------------------------------------
// Renderer

Renderer::Renderer(const Scene& scene, const RenderConfig& cfg)
    : scene_(scene),
      cfg_(cfg),
      tree_(std::max<int>(1, static_cast<int>(scene.lights.size())), cfg.branch_threshold) {
    if (cfg.iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
    if (cfg.photons_per_iteration < 1)
        throw std::invalid_argument("config: photons_per_iteration must be >= 1");
    if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0))
        throw std::invalid_argument("config: beta must lie in [0, 1]");
    if (cfg.components < 1) throw std::invalid_argument("config: components must be >= 1");
    if (cfg.max_depth < 2) throw std::invalid_argument("config: max_depth must be >= 2");
    if (cfg.guider == GuiderKind::kMCMC && cfg.mcmc_chains < 1)
        throw std::invalid_argument("config: mcmc_chains must be >= 1");
    if (scene_.lights.empty()) throw std::invalid_argument("scene: needs at least one light");
    bool any_receiver = false;
    for (const Surface& s : scene_.surfaces) any_receiver = any_receiver || s.receiver;
    if (!any_receiver) throw std::invalid_argument("scene: needs at least one receiver");

    compute_bounding_sphere(scene_);
    max_radius_ = cfg_.max_radius_scale * scene_.bound_diameter();

    if (cfg_.guider == GuiderKind::kMCMC) {
        mcmc_ = std::make_unique<McmcEmitter>(cfg_.mcmc_chains, cfg_.mcmc_sigma, cfg_.seed);
    } else {
        guiders_.reserve(scene_.lights.size());
        for (int li = 0; li < static_cast<int>(scene_.lights.size()); ++li)
            guiders_.push_back(
                make_guider(cfg_.guider, scene_, li, cfg_.components, cfg_.seed));
    }
    fb_.init(scene_.camera.width, scene_.camera.height);
}

IterationOutput Renderer::render_iteration(int iteration) {
    const int W = scene_.camera.width, H = scene_.camera.height;
    const int L = static_cast<int>(scene_.lights.size());
    const int N = cfg_.photons_per_iteration;

    IterationOutput out;
    out.caustic.assign(static_cast<size_t>(W) * H, RGB{});
    out.direct.assign(static_cast<size_t>(W) * H, RGB{});
    out.radius.assign(static_cast<size_t>(W) * H, 0.0);
    out.batches.resize(L);
    out.gather_totals.assign(L, 0);
    out.deposited_flux.assign(L, 0.0);

    // --- photon pass ---
    std::vector<Photon> photons;
    long n_emitted = N;
    if (mcmc_) {
        photons = mcmc_->photon_pass(scene_, N, iteration, cfg_.max_depth, &n_emitted);
    } else {
        photons.reserve(N / 8);
        tree_.begin_iteration();
        double beta_now = iteration == 0 ? 0.0 : cfg_.beta;
        for (int i = 0; i < N; ++i) {
            Pcg32 rng = make_stream(cfg_.seed, static_cast<uint64_t>(iteration),
                                    kStreamEmission, static_cast<uint64_t>(i));
            double u = rng.next_double();
            int li;
            double pmf;
            if (cfg_.light_sampler == LightSamplerKind::kAdaptive) {
                li = tree_.sample_light(u, &pmf);
            } else {
                li = std::min(L - 1, static_cast<int>(u * L));
                pmf = 1.0 / L;
            }
            EmissionSample e = guiders_[li]->emit(scene_, scene_.lights[li], beta_now, rng);
            e.pdf *= pmf;
            TraceResult tr = trace_photon(scene_, e, cfg_.max_depth, rng);
            if (!tr.has_first_bounce) continue;
            TrainingSample smp;
            smp.x = tr.first_bounce;
            smp.q_hat = e.pdf;
            smp.t_count = 0;
            smp.first_surface = tr.first_surface;
            smp.deposited = tr.deposited;
            int slot = static_cast<int>(out.batches[li].size());
            out.batches[li].push_back(smp);
            if (tr.deposited) {
                Photon p = tr.photon;
                p.light_id = li;
                p.emission_index = slot;
                photons.push_back(p);
            }
        }
    }
    out.deposited = static_cast<long>(photons.size());
    for (const Photon& p : photons) out.deposited_flux[p.light_id] += luminance(p.flux);
    for (double& f : out.deposited_flux) f /= static_cast<double>(n_emitted);

    PhotonMap map(std::move(photons));

    // --- camera pass ---
    for (int idx = 0; idx < W * H; ++idx) {
        Pcg32 rng = make_stream(cfg_.seed, static_cast<uint64_t>(iteration), kStreamCamera,
                                static_cast<uint64_t>(idx));
        double jx = rng.next_double(), jy = rng.next_double();
        Ray ray = camera_ray(scene_.camera, idx % W, idx / W, jx, jy);
        for (int depth = 0; depth < cfg_.max_depth; ++depth) {
            Hit h;
            if (!intersect(scene_, ray, h, kRayEps)) break;
            const Material& m = scene_.materials[h.material];
            if (m.kind == Material::kDiffuse) {
                out.direct[idx] = direct_lighting(scene_, h, m.albedo, rng);
                if (h.receiver) {
                    GatherResult g =
                        cfg_.gather_mode == GatherMode::kAdaptive
                            ? gather(map, h.position, m.albedo, max_radius_, n_emitted)
                            : gather_fixed(map, h.position, m.albedo, max_radius_, n_emitted);
                    out.caustic[idx] = g.radiance;
                    out.radius[idx] = g.used_radius;
                    for (int id : g.ids) map.photon(id).gather_count += 1;
                }
                break;
            }
            specular_scatter(m, h, ray, rng);
        }
    }

    // --- bookkeeping: gather totals, training batches, light tree ---
    for (const Photon& p : map.photons()) {
        out.gathered += p.gather_count;
        out.gather_totals[p.light_id] += p.gather_count;
        if (!mcmc_ && p.emission_index >= 0)
            out.batches[p.light_id][p.emission_index].t_count = p.gather_count;
    }
    if (!mcmc_) {
        for (int li = 0; li < L; ++li)
            tree_.record(li, static_cast<int>(out.gather_totals[li]));
        tree_.refine();
        if (iteration >= 1) {
            for (int li = 0; li < L; ++li)
                guiders_[li]->train(scene_, scene_.lights[li], out.batches[li],
                                    iteration - 1, std::max(1, cfg_.iterations - 1));
        }
    }
    return out;
}

void Renderer::init_light_mixtures(const std::vector<std::vector<TrainingSample>>& batches) {
    if (mcmc_ || cfg_.init_mode == InitMode::kOff) return;
    const int L = static_cast<int>(scene_.lights.size());
    bool any_caster = false;
    for (const Surface& s : scene_.surfaces) any_caster = any_caster || s.caster;

    if (cfg_.init_mode == InitMode::kGeometry) {
        if (!any_caster) return;  // nothing to seed from; mixtures stay empty
        Pcg32 seed_rng = make_stream(cfg_.seed, 0, kStreamInit, 0);
        SeedGaussianSet seeds =
            build_seed_set(scene_, cfg_.components, kInitSurfaceSamples, seed_rng);

        std::vector<Vec3> pooled;  // gathered first bounces across every light
        for (const auto& batch : batches)
            for (const TrainingSample& s : batch)
                if (s.t_count > 0) pooled.push_back(s.x);

        for (int li = 0; li < L; ++li) {
            std::vector<Vec3> pts;
            for (const TrainingSample& s : batches[li])
                if (s.t_count > 0) pts.push_back(s.x);
            std::vector<Gaussian3> picked = assign_and_rank(seeds, pts, cfg_.components);
            if (picked.empty()) picked = assign_and_rank(seeds, pooled, cfg_.components);
            if (picked.empty()) {
                Pcg32 rng = make_stream(cfg_.seed, 0, kStreamInit, 500 + li);
                picked = uniform_seed_fallback(seeds, cfg_.components, rng);
            }
            guiders_[li]->set_mixture(mixture_from_gaussians(picked));
        }
        return;
    }

    // Naive mode: per light, k-means directly on the deposited first-bounce
    // points of the uniform pass; sigma is the RMS member distance with the
    // same floor the geometry seeds use.
    double floor_sigma = 1e-4 * scene_.bound_radius;
    for (int li = 0; li < L; ++li) {
        Pcg32 rng = make_stream(cfg_.seed, 0, kStreamInit, 1000 + li);
        std::vector<Vec3> pts;
        for (const TrainingSample& s : batches[li])
            if (s.deposited) pts.push_back(s.x);
        std::vector<Gaussian3> comps;
        if (!pts.empty()) {
            int k = std::min<int>(cfg_.components, static_cast<int>(pts.size()));
            std::vector<Vec3> centers = kmeans(pts, k, 32, rng);
            std::vector<double> acc(k, 0.0);
            std::vector<long> cnt(k, 0);
            for (const Vec3& p : pts) {
                int best = 0;
                double best_d2 = length_sq(p - centers[0]);
                for (int c = 1; c < k; ++c) {
                    double d2 = length_sq(p - centers[c]);
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = c;
                    }
                }
                acc[best] += best_d2;
                cnt[best] += 1;
            }
            for (int c = 0; c < k; ++c) {
                double sigma = cnt[c] > 0 ? std::sqrt(acc[c] / cnt[c]) : 0.0;
                comps.push_back({centers[c], std::max(sigma, floor_sigma)});
            }
        } else {
            for (int c = 0; c < cfg_.components; ++c)
                comps.push_back({uniform_in_sphere(scene_.bound_center, scene_.bound_radius, rng),
                                 0.05 * scene_.bound_radius});
        }
        guiders_[li]->set_mixture(mixture_from_gaussians(comps));
    }
}

RunResult Renderer::run(const IterationCallback& on_iteration) {
    RunResult rr;
    rr.light_flux.assign(scene_.lights.size(), 0.0);
    for (int it = 0; it < cfg_.iterations; ++it) {
        auto t0 = std::chrono::steady_clock::now();
        IterationOutput out = render_iteration(it);
        if (it == 0) {
            init_light_mixtures(out.batches);  // uniform pass is only fuel for setup
        } else {
            fb_.accumulate(out.caustic, out.direct, out.radius);
            for (size_t li = 0; li < rr.light_flux.size(); ++li)
                rr.light_flux[li] += out.deposited_flux[li];
        }
        auto t1 = std::chrono::steady_clock::now();
        MetricsRow row;
        row.iteration = it;
        row.gathered = out.gathered;
        row.seconds = std::chrono::duration<double>(t1 - t0).count();
        if (on_iteration) on_iteration(it, fb_, row);
        rr.metrics.push_back(row);
    }
    return rr;
}

}  // namespace pg
