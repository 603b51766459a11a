#pragma once
#include <functional>
#include <vector>
#include "pg/photon_map.hpp"
#include "pg/rng.hpp"
#include "pg/scene.hpp"

namespace pg {

// Binary visibility target over the primary sample space: true when the
// state's emission deposits a photon.
using TargetFn = std::function<bool(const std::vector<double>&)>;

struct McmcChain {
    std::vector<double> state;  // last accepted point, coordinates in [0,1)
    bool seeded = false;        // false until the first acceptance
    Photon photon;              // deposit of the last accepted state (flux unscaled)
};

enum class McmcRecord {
    kNone,            // unseeded chain, uniform proposal rejected
    kUniformAccept,   // fresh uniform state accepted
    kMutationAccept,  // wrapped-Gaussian mutation of the last state accepted
    kReplay,          // both rejected; the last accepted state is re-recorded
};

// One replica-exchange step. A uniform proposal is drawn and accepted iff the
// target holds there; otherwise the last accepted state is mutated
// per-coordinate with a wrapped Gaussian of width sigma and accepted iff the
// target holds; otherwise the last accepted state is recorded again. With a
// binary target both moves are exact Metropolis-Hastings kernels, so the
// recorded states are stationary for "uniform restricted to the target set".
// Uniform proposals (and only those) update the proposed/accepted tallies
// that feed the visibility estimate. Unseeded chains skip the mutation and
// record nothing until their first acceptance.
McmcRecord mcmc_step(McmcChain& chain, const TargetFn& target, double sigma, int dim,
                     Pcg32& rng, long& uniform_proposed, long& uniform_accepted);

// Replica-exchange photon emitter: one chain per worker slot over an
// 8-dimensional primary sample space (light choice; position pair; direction
// pair; three lobe decisions, overflowing into a state-hashed stream for
// deeper chains). The first pass bootstraps a pool of 64*chains uniform
// states and seeds every chain from the target-satisfying ones.
class McmcEmitter {
public:
    McmcEmitter(int chains, double sigma, uint64_t seed);

    // Runs ~n_proposals replica-exchange steps spread round-robin over the
    // chains and returns every recorded deposit, flux pre-scaled by
    // b_hat / chain-count where b_hat is the running fraction of uniform
    // proposals that deposited. n_emitted receives the per-chain step count,
    // the matching normalizer for density estimation.
    std::vector<Photon> photon_pass(const Scene& scene, int n_proposals, int iteration,
                                    int max_depth, long* n_emitted);

    double visibility() const;  // b_hat so far (1 before any proposal)
    int chain_count() const { return static_cast<int>(chains_.size()); }
    static constexpr int kDim = 8;

private:
    void bootstrap(const Scene& scene, int max_depth);

    std::vector<McmcChain> chains_;
    double sigma_;
    uint64_t seed_;
    long proposed_ = 0, accepted_ = 0;
    bool bootstrapped_ = false;
};

}  // namespace pg
