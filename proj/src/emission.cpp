#include <stdexcept>
#include <type_traits>
#include "pg/guider.hpp"

namespace pg {
namespace {

// Directional model used by the guided branch of point/rect emission. Keeps
// the per-light-type plumbing (positions, fluxes, blending, fallbacks) in one
// place while each guider supplies only its directional density.
struct DirModel {
    virtual ~DirModel() = default;
    virtual double pdf(const Vec3& x0, const Direction& w) const = 0;
    virtual Direction sample(const Vec3& x0, Pcg32& rng) const = 0;
};

struct MixtureDirModel : DirModel {
    const GaussianMixture* m;
    explicit MixtureDirModel(const GaussianMixture* m_) : m(m_) {}
    double pdf(const Vec3& x0, const Direction& w) const override {
        return directional_pdf_mixture(*m, x0, w);
    }
    Direction sample(const Vec3& x0, Pcg32& rng) const override {
        return sample_direction_mixture(*m, x0, rng);
    }
};

struct VMFDirModel : DirModel {
    const VMFMixture* m;
    explicit VMFDirModel(const VMFMixture* m_) : m(m_) {}
    double pdf(const Vec3&, const Direction& w) const override { return vmf_mixture_pdf(*m, w); }
    Direction sample(const Vec3&, Pcg32& rng) const override {
        return vmf_mixture_sample(*m, rng);
    }
};

struct H2DDirModel : DirModel {
    Histogram2D* h;
    explicit H2DDirModel(Histogram2D* h_) : h(h_) {}
    double pdf(const Vec3&, const Direction& w) const override { return h->pdf(w); }
    Direction sample(const Vec3&, Pcg32& rng) const override { return h->sample(rng); }
};

struct BoundDirModel : DirModel {
    const BoundGuide* bg;
    explicit BoundDirModel(const BoundGuide* bg_) : bg(bg_) {}
    double pdf(const Vec3& x0, const Direction& w) const override { return bound_pdf(*bg, x0, w); }
    Direction sample(const Vec3& x0, Pcg32& rng) const override {
        return bound_sample(*bg, x0, rng);
    }
};

// Uniform-fallback directional density for finite lights.
double uniform_dir_pdf(const Light& light, const Vec3& x0, const Direction& w) {
    (void)x0;
    if (light.kind == Light::kPoint) return kInv4Pi;
    double c = dot(w, light.rect_normal());
    return c > 0 ? c / kPi : 0.0;
}

template <class Rng>
Direction uniform_dir_sample(const Light& light, Rng& rng) {
    if (light.kind == Light::kPoint) return Direction(sample_uniform_sphere(rng));
    Frame f(light.rect_normal());
    return Direction(f.to_world(sample_cosine_hemisphere(rng)));
}

// Joint pdf for point/rect lights given an optional guided directional model.
double finite_light_pdf(const Light& light, const DirModel* guided, double beta,
                        const Vec3& x0, const Direction& w0) {
    double dir;
    if (guided && beta > 0)
        dir = beta * guided->pdf(x0, w0) + (1.0 - beta) * uniform_dir_pdf(light, x0, w0);
    else
        dir = uniform_dir_pdf(light, x0, w0);
    if (light.kind == Light::kRectArea) dir /= light.rect_area();
    return dir;
}

template <class Rng>
EmissionSample finite_light_emit(const Scene&, const Light& light,
                                 const DirModel* guided, double beta, Rng& rng) {
    EmissionSample e;
    if (light.kind == Light::kPoint) {
        e.x0 = light.position;
    } else {
        double u1 = rng.next_double(), u2 = rng.next_double();
        e.x0 = light.corner + light.edge_u * u1 + light.edge_v * u2;
    }
    bool take_guided = false;
    if (guided && beta > 0) take_guided = rng.next_double() < beta;
    if constexpr (std::is_same_v<Rng, Pcg32>) {
        e.w0 = take_guided ? guided->sample(e.x0, rng) : uniform_dir_sample(light, rng);
    } else {
        // scripted replay serves the uniform path only (no guided models)
        e.w0 = uniform_dir_sample(light, rng);
    }
    if (light.kind == Light::kPoint) {
        e.flux = light.intensity;
    } else {
        e.flux = light.radiance * std::max(0.0, dot(e.w0, light.rect_normal()));
    }
    e.pdf = finite_light_pdf(light, guided, beta, e.x0, e.w0);
    return e;
}

// Directional (infinite) lights: direction is fixed; the sampled degree of
// freedom is the origin on the plane through the scene center perpendicular
// to the light, pushed back by the bounding radius. Only the spatial mixture
// can guide this (2D plane projection); other guiders use the uniform disk.
double infinite_light_pdf(const Light& light, const GaussianMixture* mixture, double beta,
                          const Scene& scene, const Vec3& x0) {
    Direction w(light.direction);
    double b = scene.bound_radius;
    PlaneFrame pf = make_plane_frame(scene.bound_center, w);
    Vec3 on_plane = x0 + w.v * b;
    double u = dot(on_plane - pf.origin, pf.t);
    double v = dot(on_plane - pf.origin, pf.b);
    double disk = (u * u + v * v <= b * b) ? 1.0 / (kPi * b * b) : 0.0;
    if (mixture && !mixture->components.empty() && beta > 0) {
        std::vector<WeightedGaussian2> m2 = project_mixture_to_plane(*mixture, pf);
        return beta * plane_mixture_pdf(m2, u, v) + (1.0 - beta) * disk;
    }
    return disk;
}

template <class Rng>
EmissionSample infinite_light_emit(const Light& light, const GaussianMixture* mixture,
                                   double beta, const Scene& scene, Rng& rng) {
    EmissionSample e;
    Direction w(light.direction);
    double b = scene.bound_radius;
    PlaneFrame pf = make_plane_frame(scene.bound_center, w);
    bool guided_ok = mixture && !mixture->components.empty();
    bool take_guided = false;
    if (guided_ok && beta > 0) take_guided = rng.next_double() < beta;
    double u, v;
    if constexpr (!std::is_same_v<Rng, Pcg32>) take_guided = false;
    if (take_guided) {
        if constexpr (std::is_same_v<Rng, Pcg32>) {
            std::vector<WeightedGaussian2> m2 = project_mixture_to_plane(*mixture, pf);
            sample_plane_point(m2, rng, u, v);
        }
    } else {
        double dx, dy;
        sample_uniform_disk(rng, dx, dy);
        u = b * dx;
        v = b * dy;
    }
    e.w0 = w;
    e.x0 = (pf.origin + pf.t * u + pf.b * v) - w.v * b;
    e.flux = light.radiance;  // plane irradiance, W/m^2
    e.pdf = infinite_light_pdf(light, guided_ok ? mixture : nullptr, beta, scene, e.x0);
    return e;
}

Pcg32 seeded_stream(uint64_t seed, int light_index) {
    return make_stream(seed, 0, kStreamInit, static_cast<uint64_t>(light_index) + 0x10000);
}

}  // namespace

EmissionSample emit_uniform(const Scene& scene, const Light& light, Pcg32& rng) {
    if (light.kind == Light::kDirectional)
        return infinite_light_emit(light, nullptr, 0.0, scene, rng);
    return finite_light_emit(scene, light, nullptr, 0.0, rng);
}

EmissionSample emit_uniform(const Scene& scene, const Light& light, ScriptedRng& rng) {
    if (light.kind == Light::kDirectional)
        return infinite_light_emit(light, nullptr, 0.0, scene, rng);
    return finite_light_emit(scene, light, nullptr, 0.0, rng);
}

double emission_pdf_uniform(const Scene& scene, const Light& light, const Vec3& x0,
                            const Direction& w0) {
    if (light.kind == Light::kDirectional)
        return infinite_light_pdf(light, nullptr, 0.0, scene, x0);
    return finite_light_pdf(light, nullptr, 0.0, x0, w0);
}

EmissionSample emit_guided(const Light& light, const GaussianMixture& mixture, double beta,
                           const Scene& scene, Pcg32& rng) {
    if (light.kind == Light::kDirectional)
        return infinite_light_emit(light, &mixture, beta, scene, rng);
    if (mixture.components.empty()) return finite_light_emit(scene, light, nullptr, 0.0, rng);
    MixtureDirModel model(&mixture);
    return finite_light_emit(scene, light, &model, beta, rng);
}

double emission_pdf(const Light& light, const GaussianMixture& mixture, double beta,
                    const Scene& scene, const Vec3& x0, const Direction& w0) {
    if (light.kind == Light::kDirectional)
        return infinite_light_pdf(light, &mixture, beta, scene, x0);
    if (mixture.components.empty()) return finite_light_pdf(light, nullptr, 0.0, x0, w0);
    MixtureDirModel model(&mixture);
    return finite_light_pdf(light, &model, beta, x0, w0);
}

// --- UniformGuider ---------------------------------------------------------

EmissionSample UniformGuider::emit(const Scene& scene, const Light& light, double,
                                   Pcg32& rng) const {
    return emit_uniform(scene, light, rng);
}

double UniformGuider::pdf(const Scene& scene, const Light& light, double, const Vec3& x0,
                          const Direction& w0) const {
    return emission_pdf_uniform(scene, light, x0, w0);
}

// --- GaussianGuider --------------------------------------------------------

void GaussianGuider::set_mixture(const GaussianMixture& m) {
    mix_ = m;
    enc_ = encode(m, B_);
    adam_.resize(enc_.param_count());
}

EmissionSample GaussianGuider::emit(const Scene& scene, const Light& light, double beta,
                                    Pcg32& rng) const {
    return emit_guided(light, mix_, beta, scene, rng);
}

double GaussianGuider::pdf(const Scene& scene, const Light& light, double beta, const Vec3& x0,
                           const Direction& w0) const {
    return emission_pdf(light, mix_, beta, scene, x0, w0);
}

void GaussianGuider::train(const Scene&, const Light&, const std::vector<TrainingSample>& batch,
                           long fit_step, long total_fit_steps) {
    if (mix_.components.empty() || batch.empty()) return;
    kl_step(enc_, adam_, batch, lr_schedule(fit_step, total_fit_steps), B_);
    mix_ = decode(enc_, B_);
}

// --- VMFGuider ---------------------------------------------------------------

VMFGuider::VMFGuider(int lobes, const Vec3& anchor, uint64_t seed) : anchor_(anchor) {
    Pcg32 rng = seeded_stream(seed, 0);
    for (int i = 0; i < lobes; ++i) {
        VMFLobe l;
        l.nu = sample_uniform_sphere(rng);
        l.kappa = 1.0;
        vm_.lobes.push_back({1.0 / lobes, l});
    }
    enc_ = encode_vmf(vm_);
    adam_.resize(enc_.params.size());
}

EmissionSample VMFGuider::emit(const Scene& scene, const Light& light, double beta,
                               Pcg32& rng) const {
    if (light.kind == Light::kDirectional)
        return infinite_light_emit(light, nullptr, 0.0, scene, rng);
    if (vm_.empty()) return finite_light_emit(scene, light, nullptr, 0.0, rng);
    VMFDirModel model(&vm_);
    return finite_light_emit(scene, light, &model, beta, rng);
}

double VMFGuider::pdf(const Scene& scene, const Light& light, double beta, const Vec3& x0,
                      const Direction& w0) const {
    if (light.kind == Light::kDirectional)
        return infinite_light_pdf(light, nullptr, 0.0, scene, x0);
    if (vm_.empty()) return finite_light_pdf(light, nullptr, 0.0, x0, w0);
    VMFDirModel model(&vm_);
    return finite_light_pdf(light, &model, beta, x0, w0);
}

void VMFGuider::train(const Scene&, const Light&, const std::vector<TrainingSample>& batch,
                      long fit_step, long total_fit_steps) {
    if (vm_.empty() || batch.empty()) return;
    size_t n_par = enc_.params.size();
    std::vector<double> grad(n_par, 0.0);
    for (const auto& smp : batch) {
        if (smp.t_count == 0) continue;
        Vec3 rel = smp.x - anchor_;
        if (length_sq(rel) == 0) continue;
        double coef = static_cast<double>(smp.t_count) / smp.q_hat;
        std::vector<double> g = grad_log_vmf(enc_, normalize(rel));
        for (size_t i = 0; i < n_par; ++i) grad[i] -= coef * g[i];
    }
    double inv_n = 1.0 / static_cast<double>(batch.size());
    for (double& gi : grad) gi *= inv_n;
    adam_.step(enc_.params, grad, lr_schedule(fit_step, total_fit_steps));
    // Renormalize the raw means in place so Adam's moments keep tracking the
    // same parameters; kappa/weight raws stay untouched.
    for (size_t i = 0; i < enc_.lobe_count(); ++i) {
        Vec3 nu{enc_.params[5 * i], enc_.params[5 * i + 1], enc_.params[5 * i + 2]};
        double len = length(nu);
        Vec3 unit = len > 0 ? nu / len : Vec3{0, 0, 1};
        enc_.params[5 * i] = unit.x;
        enc_.params[5 * i + 1] = unit.y;
        enc_.params[5 * i + 2] = unit.z;
    }
    vm_ = decode_vmf(enc_);
}

// --- H2DGuider ---------------------------------------------------------------

EmissionSample H2DGuider::emit(const Scene& scene, const Light& light, double beta,
                               Pcg32& rng) const {
    if (light.kind == Light::kDirectional)
        return infinite_light_emit(light, nullptr, 0.0, scene, rng);
    H2DDirModel model(&h_);
    return finite_light_emit(scene, light, &model, beta, rng);
}

double H2DGuider::pdf(const Scene& scene, const Light& light, double beta, const Vec3& x0,
                      const Direction& w0) const {
    if (light.kind == Light::kDirectional)
        return infinite_light_pdf(light, nullptr, 0.0, scene, x0);
    H2DDirModel model(&h_);
    return finite_light_pdf(light, &model, beta, x0, w0);
}

void H2DGuider::train(const Scene&, const Light&, const std::vector<TrainingSample>& batch,
                      long, long) {
    for (const auto& smp : batch) {
        if (smp.t_count == 0) continue;
        Vec3 rel = smp.x - anchor_;
        if (length_sq(rel) == 0) continue;
        h_.record(normalize(rel), static_cast<double>(smp.t_count) / smp.q_hat);
    }
}

// --- BoundGuider --------------------------------------------------------------

BoundGuider::BoundGuider(const Scene& scene) {
    std::vector<AABB> boxes;
    std::vector<int> surfaces;
    double pad = 1e-4 * scene.bound_diameter();
    for (size_t s = 0; s < scene.surfaces.size(); ++s) {
        if (!scene.surfaces[s].caster) continue;
        AABB box = surface_bounds(scene, scene.surfaces[s]);
        box.lo -= Vec3{pad, pad, pad};  // flat casters get positive thickness
        box.hi += Vec3{pad, pad, pad};
        boxes.push_back(box);
        surfaces.push_back(static_cast<int>(s));
    }
    bg_ = make_bound_guide(boxes, surfaces);
    surface_to_box_.assign(scene.surfaces.size(), -1);
    for (size_t i = 0; i < surfaces.size(); ++i) surface_to_box_[surfaces[i]] = static_cast<int>(i);
}

EmissionSample BoundGuider::emit(const Scene& scene, const Light& light, double beta,
                                 Pcg32& rng) const {
    if (light.kind == Light::kDirectional)
        return infinite_light_emit(light, nullptr, 0.0, scene, rng);
    BoundDirModel model(&bg_);
    return finite_light_emit(scene, light, &model, beta, rng);
}

double BoundGuider::pdf(const Scene& scene, const Light& light, double beta, const Vec3& x0,
                        const Direction& w0) const {
    if (light.kind == Light::kDirectional)
        return infinite_light_pdf(light, nullptr, 0.0, scene, x0);
    BoundDirModel model(&bg_);
    return finite_light_pdf(light, &model, beta, x0, w0);
}

void BoundGuider::train(const Scene&, const Light&, const std::vector<TrainingSample>& batch,
                        long, long) {
    std::vector<double> counts(bg_.boxes.size(), 0.0);
    for (const auto& smp : batch) {
        if (smp.t_count == 0 || smp.first_surface < 0) continue;
        int box = surface_to_box_[smp.first_surface];
        if (box >= 0) counts[box] += smp.t_count;
    }
    bound_weight_update(bg_, counts);
}

// --- factory -------------------------------------------------------------------

std::unique_ptr<Guider> make_guider(GuiderKind kind, const Scene& scene, int light_index,
                                    int components, uint64_t seed) {
    const Light& light = scene.lights.at(light_index);
    Vec3 anchor = light.anchor(scene.bound_center, scene.bound_radius);
    bool has_caster = false;
    for (const auto& s : scene.surfaces) has_caster = has_caster || s.caster;
    switch (kind) {
        case GuiderKind::kUniform:
            return std::make_unique<UniformGuider>();
        case GuiderKind::kG3D:
            return std::make_unique<GaussianGuider>(scale_factor(scene.bound_diameter()));
        case GuiderKind::kVMF:
            return std::make_unique<VMFGuider>(
                components, anchor, splitmix64(seed ^ (static_cast<uint64_t>(light_index) + 1)));
        case GuiderKind::kH2D: {
            Vec3 axis = light.kind == Light::kRectArea ? light.rect_normal() : Vec3{0, 0, 1};
            return std::make_unique<H2DGuider>(256, axis, anchor);
        }
        case GuiderKind::kBound:
            if (!has_caster) return std::make_unique<UniformGuider>();
            return std::make_unique<BoundGuider>(scene);
        case GuiderKind::kMCMC:
            break;
    }
    throw std::invalid_argument("make_guider: kMCMC is not a per-light guider");
}

}  // namespace pg
