#pragma once
#include <memory>
#include <vector>
#include "pg/adam.hpp"
#include "pg/bound_guide.hpp"
#include "pg/directional.hpp"
#include "pg/encoding.hpp"
#include "pg/gaussian.hpp"
#include "pg/histogram2d.hpp"
#include "pg/kl_fit.hpp"
#include "pg/scene.hpp"
#include "pg/vmf.hpp"

namespace pg {

// One photon emission. `pdf` is the joint positional x directional density in
// the light's natural measure (solid angle for point lights, area x solid
// angle for rect lights, plane area for directional lights; the point light's
// positional delta contributes a factor 1). `flux` carries the emitted
// differential power matched to that measure, so flux / pdf is watts once the
// light-selection pmf has been folded into pdf by the caller.
struct EmissionSample {
    Vec3 x0{0, 0, 0};
    Direction w0{0, 0, 1};
    double pdf = 1;
    RGB flux{0, 0, 0};
};

enum class GuiderKind { kG3D, kUniform, kBound, kH2D, kVMF, kMCMC };

// Classical unguided emission, also the beta = 0 / fallback branch of every
// guider: uniform sphere for point lights, uniform position + cosine
// hemisphere for rect lights, uniform disk of the bounding-sphere radius for
// directional lights.
EmissionSample emit_uniform(const Scene& scene, const Light& light, Pcg32& rng);
// Scripted overload: replays primary-sample coordinates (position draws first
// for rect lights, then direction/disk draws) through the same formulas.
EmissionSample emit_uniform(const Scene& scene, const Light& light, ScriptedRng& rng);
double emission_pdf_uniform(const Scene& scene, const Light& light, const Vec3& x0,
                            const Direction& w0);

// Gaussian-mixture-guided emission. With probability beta the direction (or,
// for directional lights, the plane point) comes from the mixture, otherwise
// from the uniform fallback; the reported pdf is the beta-blend either way.
// An empty mixture degrades to emit_uniform exactly (pure uniform pdf).
EmissionSample emit_guided(const Light& light, const GaussianMixture& mixture, double beta,
                           const Scene& scene, Pcg32& rng);
double emission_pdf(const Light& light, const GaussianMixture& mixture, double beta,
                    const Scene& scene, const Vec3& x0, const Direction& w0);

// Per-light emission strategy. emit() reports exactly the density pdf()
// evaluates (emit computes its pdf by calling pdf() on the drawn sample, so
// the two agree bit-for-bit). train() consumes one iteration's samples for
// this light; q_hat in the samples includes the light-selection pmf.
class Guider {
public:
    virtual ~Guider() = default;
    virtual EmissionSample emit(const Scene& scene, const Light& light, double beta,
                                Pcg32& rng) const = 0;
    virtual double pdf(const Scene& scene, const Light& light, double beta, const Vec3& x0,
                       const Direction& w0) const = 0;
    virtual void train(const Scene&, const Light&, const std::vector<TrainingSample>&, long, long) {
    }
    // Spatial mixture for visualization / initialization, when the guider has one.
    virtual const GaussianMixture* mixture() const { return nullptr; }
    virtual void set_mixture(const GaussianMixture&) {}
};

class UniformGuider : public Guider {
public:
    EmissionSample emit(const Scene&, const Light&, double beta, Pcg32&) const override;
    double pdf(const Scene&, const Light&, double beta, const Vec3&, const Direction&) const override;
};

class GaussianGuider : public Guider {
public:
    explicit GaussianGuider(double scale) : B_(scale) {}
    EmissionSample emit(const Scene&, const Light&, double beta, Pcg32&) const override;
    double pdf(const Scene&, const Light&, double beta, const Vec3&, const Direction&) const override;
    void train(const Scene&, const Light&, const std::vector<TrainingSample>&, long, long) override;
    const GaussianMixture* mixture() const override { return &mix_; }
    void set_mixture(const GaussianMixture& m) override;
    double scale() const { return B_; }

private:
    GaussianMixture mix_;
    EncodedMixture enc_;
    AdamState adam_;
    double B_;
};

class VMFGuider : public Guider {
public:
    VMFGuider(int lobes, const Vec3& anchor, uint64_t seed);
    EmissionSample emit(const Scene&, const Light&, double beta, Pcg32&) const override;
    double pdf(const Scene&, const Light&, double beta, const Vec3&, const Direction&) const override;
    void train(const Scene&, const Light&, const std::vector<TrainingSample>&, long, long) override;
    const VMFMixture& lobes() const { return vm_; }

private:
    VMFMixture vm_;
    EncodedVMF enc_;
    AdamState adam_;
    Vec3 anchor_;
};

class H2DGuider : public Guider {
public:
    H2DGuider(int res, const Vec3& axis, const Vec3& anchor) : h_(res, axis), anchor_(anchor) {}
    EmissionSample emit(const Scene&, const Light&, double beta, Pcg32&) const override;
    double pdf(const Scene&, const Light&, double beta, const Vec3&, const Direction&) const override;
    void train(const Scene&, const Light&, const std::vector<TrainingSample>&, long, long) override;
    const Histogram2D& histogram() const { return h_; }

private:
    mutable Histogram2D h_;  // sample() caches its cell CDF
    Vec3 anchor_;
};

class BoundGuider : public Guider {
public:
    explicit BoundGuider(const Scene& scene);
    EmissionSample emit(const Scene&, const Light&, double beta, Pcg32&) const override;
    double pdf(const Scene&, const Light&, double beta, const Vec3&, const Direction&) const override;
    void train(const Scene&, const Light&, const std::vector<TrainingSample>&, long, long) override;
    const BoundGuide& guide() const { return bg_; }

private:
    BoundGuide bg_;
    std::vector<int> surface_to_box_;  // -1 where the surface has no box
};

// Factory. `components` feeds the G3D/vMF mixture size and the H2D resolution
// is fixed at 256; `seed` controls deterministic baseline initialization.
// Guiders that need casters (bound) fall back to UniformGuider when the scene
// has none. kMCMC is not a per-light guider and is rejected here.
std::unique_ptr<Guider> make_guider(GuiderKind kind, const Scene& scene, int light_index,
                                    int components, uint64_t seed);

}  // namespace pg
