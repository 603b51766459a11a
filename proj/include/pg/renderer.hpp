#pragma once
#include <functional>
#include <memory>
#include <vector>
#include "pg/guider.hpp"
#include "pg/light_tree.hpp"
#include "pg/mcmc.hpp"
#include "pg/photon_map.hpp"
#include "pg/scene.hpp"

namespace pg {

enum class InitMode { kGeometry, kNaive, kOff };
enum class GatherMode { kAdaptive, kFixed };
enum class LightSamplerKind { kAdaptive, kUniform };

struct RenderConfig {
    GuiderKind guider = GuiderKind::kG3D;
    int iterations = 32;  // total passes, including the discarded iteration 0
    int photons_per_iteration = 1 << 16;
    double beta = 0.8;    // guided-vs-uniform blend for iterations >= 1
    int components = 32;  // mixture size for the parametric guiders
    uint64_t seed = 0;
    InitMode init_mode = InitMode::kGeometry;
    LightSamplerKind light_sampler = LightSamplerKind::kAdaptive;
    GatherMode gather_mode = GatherMode::kAdaptive;
    double max_radius_scale = 0.05;  // gather radius cap, fraction of the bounding diameter
    int max_depth = 8;
    int branch_threshold = 64;  // light-tree leaf split threshold
    int mcmc_chains = 64;
    double mcmc_sigma = 0.001;
};

// Accumulated render state: running means over the accumulated iterations
// plus the last iteration's per-pixel gather radius (density heatmap) and
// Welford moments of the per-iteration caustic luminance (error bars).
struct Framebuffer {
    int width = 0, height = 0;
    long samples = 0;  // iterations accumulated so far
    std::vector<RGB> caustic, direct;
    std::vector<double> radius;
    std::vector<double> lum_mean, lum_m2;

    void init(int w, int h);
    void accumulate(const std::vector<RGB>& c, const std::vector<RGB>& d,
                    const std::vector<double>& r);
    RGB combined(size_t i) const { return caustic[i] + direct[i]; }
    std::vector<RGB> image() const;          // caustic + direct
    std::vector<RGB> caustic_image() const;  // caustic only
    // standard error of the mean caustic luminance at pixel i (0 until 2 samples)
    double lum_stderr(size_t i) const;
};

struct MetricsRow {
    int iteration = 0;
    double mse = std::numeric_limits<double>::quiet_NaN();        // vs reference
    double ssim_comp = std::numeric_limits<double>::quiet_NaN();  // 1 - SSIM vs reference
    long gathered = 0;  // photon-gather increments this iteration
    double seconds = 0; // wall clock for the iteration
};

// Outcome of one photon emission trace.
struct TraceResult {
    bool has_first_bounce = false;  // the emitted ray hit some geometry
    Vec3 first_bounce{0, 0, 0};
    int first_surface = -1;
    bool deposited = false;  // `photon` is valid
    Photon photon;
};

// Traces one emission through specular chains: the first hit must be a
// caster or the path dies; mirrors reflect, dielectrics choose reflection or
// refraction by Fresnel-weighted roulette (flux unscaled); a diffuse hit
// terminates, depositing a photon with flux = e.flux / e.pdf when the
// surface is a receiver and a caster was crossed first. RNG draws happen
// only at dielectric events.
template <class Rng>
TraceResult trace_photon(const Scene& scene, const EmissionSample& e, int max_depth, Rng& rng);

extern template TraceResult trace_photon<Pcg32>(const Scene&, const EmissionSample&, int,
                                                Pcg32&);
extern template TraceResult trace_photon<ScriptedRng>(const Scene&, const EmissionSample&, int,
                                                      ScriptedRng&);

struct GatherResult {
    RGB radiance{0, 0, 0};
    double used_radius = 0;
    std::vector<int> ids;  // photon indices used (caller bumps gather_count)
};

// Density estimate at x on a diffuse receiver with the given albedo:
// radiance = sum(flux) * (albedo/pi) / (pi * r^2 * n_emitted). The adaptive
// form uses the 4 nearest photons, r = distance to the farthest of them
// (r = max_radius when fewer than 4 are in range); the fixed form uses every
// photon within max_radius and r = max_radius.
GatherResult gather(const PhotonMap& map, const Vec3& x, const RGB& albedo, double max_radius,
                    long n_emitted);
GatherResult gather_fixed(const PhotonMap& map, const Vec3& x, const RGB& albedo,
                          double max_radius, long n_emitted);

// Everything one photon+camera pass produces.
struct IterationOutput {
    std::vector<RGB> caustic, direct;  // per-pixel radiance, this pass only
    std::vector<double> radius;        // per-pixel gather radius (0 where no gather ran)
    std::vector<std::vector<TrainingSample>> batches;  // per light; empty for MCMC
    std::vector<long> gather_totals;                   // per light
    std::vector<double> deposited_flux;  // per light: luminance flux per emission
    long gathered = 0;                   // total gather increments
    long deposited = 0;                  // photons stored this pass
};

struct RunResult {
    std::vector<MetricsRow> metrics;  // one row per iteration, including iteration 0
    std::vector<double> light_flux;   // per light, summed over accumulated iterations
};

// Fired after each iteration with the accumulated framebuffer; fill in the
// row's mse/ssim_comp when a reference is at hand.
using IterationCallback = std::function<void(int, const Framebuffer&, MetricsRow&)>;

// Two-pass progressive photon renderer. Iteration 0 always emits uniformly,
// feeds the initializer, and is discarded from the image; iterations >= 1
// emit through the per-light guiders at the configured beta, train them on
// the gathered counts, and accumulate into the framebuffer.
class Renderer {
public:
    Renderer(const Scene& scene, const RenderConfig& cfg);

    // One full photon+camera pass; advances guiders, light tree, and MCMC
    // chains, but does not touch the accumulated framebuffer (run() does).
    IterationOutput render_iteration(int iteration);

    RunResult run(const IterationCallback& on_iteration = {});

    // Seeds the per-light mixtures from a uniform pass's training batches
    // (run() calls this with iteration 0's). Geometry mode ranks the caster
    // seed set by gathered first bounces; naive mode k-means the deposited
    // first bounces directly; off leaves every mixture untouched.
    void init_light_mixtures(const std::vector<std::vector<TrainingSample>>& batches);

    const Framebuffer& framebuffer() const { return fb_; }
    const Scene& scene() const { return scene_; }
    const RenderConfig& config() const { return cfg_; }
    Guider& guider(int light) { return *guiders_[light]; }
    const LightTree& light_tree() const { return tree_; }
    double max_radius() const { return max_radius_; }

private:
    Scene scene_;
    RenderConfig cfg_;
    std::vector<std::unique_ptr<Guider>> guiders_;
    LightTree tree_;
    Framebuffer fb_;
    std::unique_ptr<McmcEmitter> mcmc_;
    double max_radius_ = 0;
    bool initialized_ = false;
};

}  // namespace pg
