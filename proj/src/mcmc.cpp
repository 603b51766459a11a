#include "pg/mcmc.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pg/guider.hpp"
#include "pg/renderer.hpp"

namespace pg {

namespace {

double wrap01(double x) {
    double w = x - std::floor(x);
    return w < 1.0 ? w : 0.0;
}

uint64_t hash_state(uint64_t seed, const std::vector<double>& v) {
    uint64_t h = splitmix64(seed ^ 0x9e3779b97f4a7c15ULL);
    for (double d : v) {
        uint64_t bits;
        std::memcpy(&bits, &d, sizeof bits);
        h = splitmix64(h ^ bits);
    }
    return h;
}

struct EvalResult {
    bool deposited = false;
    Photon photon;
};

// Deterministic evaluation of the binary visibility target: the state picks
// the light and replays the uniform emission formulas (position, direction,
// then the specular lobe decisions), overflowing into a state-hashed stream
// when a chain consumes more than three lobe draws. The same state always
// produces the same emission, which Metropolis-Hastings requires.
EvalResult eval_state(const Scene& scene, const std::vector<double>& v, int max_depth,
                      uint64_t seed) {
    EvalResult out;
    const int L = static_cast<int>(scene.lights.size());
    int li = std::min(L - 1, static_cast<int>(v[0] * L));
    const Light& light = scene.lights[li];

    ScriptedRng rng;
    switch (light.kind) {
        case Light::kPoint: rng.script = {v[3], v[4]}; break;
        case Light::kRectArea: rng.script = {v[1], v[2], v[3], v[4]}; break;
        default: rng.script = {v[1], v[2]}; break;
    }
    rng.script.insert(rng.script.end(), {v[5], v[6], v[7]});
    uint64_t h = hash_state(seed, v);
    rng.overflow = Pcg32(h, splitmix64(h ^ 0x5851f42d4c957f2dULL));

    EmissionSample e = emit_uniform(scene, light, rng);
    e.pdf *= 1.0 / L;
    TraceResult tr = trace_photon(scene, e, max_depth, rng);
    if (tr.deposited) {
        out.deposited = true;
        out.photon = tr.photon;
        out.photon.light_id = li;
    }
    return out;
}

}  // namespace

McmcRecord mcmc_step(McmcChain& chain, const TargetFn& target, double sigma, int dim,
                     Pcg32& rng, long& uniform_proposed, long& uniform_accepted) {
    std::vector<double> cand(dim);
    for (double& c : cand) c = rng.next_double();
    ++uniform_proposed;
    if (target(cand)) {
        ++uniform_accepted;
        chain.state = std::move(cand);
        chain.seeded = true;
        return McmcRecord::kUniformAccept;
    }
    if (!chain.seeded) return McmcRecord::kNone;
    for (int i = 0; i < dim; ++i)
        cand[i] = wrap01(chain.state[i] + sigma * rng.next_gaussian());
    if (target(cand)) {
        chain.state = std::move(cand);
        return McmcRecord::kMutationAccept;
    }
    return McmcRecord::kReplay;
}

McmcEmitter::McmcEmitter(int chains, double sigma, uint64_t seed)
    : sigma_(sigma), seed_(seed) {
    if (chains < 1) throw std::invalid_argument("McmcEmitter: needs at least one chain");
    if (!(sigma > 0)) throw std::invalid_argument("McmcEmitter: sigma must be positive");
    chains_.resize(chains);
}

double McmcEmitter::visibility() const {
    return proposed_ > 0 ? static_cast<double>(accepted_) / static_cast<double>(proposed_)
                         : 1.0;
}

void McmcEmitter::bootstrap(const Scene& scene, int max_depth) {
    const int C = chain_count();
    const int M = 64 * C;
    Pcg32 rng = make_stream(seed_, 0, kStreamMcmc, static_cast<uint64_t>(C));

    std::vector<std::pair<std::vector<double>, Photon>> pool;
    std::vector<double> v(kDim);
    for (int m = 0; m < M; ++m) {
        for (double& c : v) c = rng.next_double();
        ++proposed_;
        EvalResult ev = eval_state(scene, v, max_depth, seed_);
        if (ev.deposited) {
            ++accepted_;
            pool.emplace_back(v, ev.photon);
        }
    }
    if (!pool.empty()) {
        for (McmcChain& ch : chains_) {
            const auto& pick = pool[rng.next_below(static_cast<uint32_t>(pool.size()))];
            ch.state = pick.first;
            ch.photon = pick.second;
            ch.seeded = true;
        }
    }
    bootstrapped_ = true;
}

std::vector<Photon> McmcEmitter::photon_pass(const Scene& scene, int n_proposals,
                                             int iteration, int max_depth, long* n_emitted) {
    if (scene.lights.empty())
        throw std::invalid_argument("McmcEmitter: scene has no lights");
    if (!bootstrapped_) bootstrap(scene, max_depth);

    const int C = chain_count();
    const long steps = (n_proposals + C - 1) / C;
    std::vector<Photon> records;
    records.reserve(static_cast<size_t>(steps) * C);

    for (int c = 0; c < C; ++c) {
        Pcg32 rng = make_stream(seed_, static_cast<uint64_t>(iteration), kStreamMcmc,
                                static_cast<uint64_t>(c));
        McmcChain& ch = chains_[c];
        EvalResult last;
        TargetFn target = [&](const std::vector<double>& v) {
            last = eval_state(scene, v, max_depth, seed_);
            return last.deposited;
        };
        for (long s = 0; s < steps; ++s) {
            McmcRecord rec = mcmc_step(ch, target, sigma_, kDim, rng, proposed_, accepted_);
            if (rec == McmcRecord::kUniformAccept || rec == McmcRecord::kMutationAccept) {
                ch.photon = last.photon;
                records.push_back(ch.photon);
            } else if (rec == McmcRecord::kReplay) {
                records.push_back(ch.photon);
            }
        }
    }

    // Stored fluxes stay unscaled inside the chains; the emitted copies carry
    // the visibility correction so the density estimate stays calibrated
    // against the per-chain step count reported through n_emitted.
    double scale = visibility() / static_cast<double>(C);
    for (Photon& p : records) p.flux *= scale;
    if (n_emitted) *n_emitted = steps;
    return records;
}

}  // namespace pg
