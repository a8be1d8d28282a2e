#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kacsim/flow.hpp"
#include "kacsim/kernel.hpp"
#include "kacsim/rng.hpp"
#include "kacsim/vec3.hpp"

namespace kacsim {

// Event-driven simulation of the regularized Kac N-particle jump process.
//
// Proposals arrive at the constant dominating rate
//     Lambda = (N/2) * eps^gamma * angular_mass_eps,
// obtained by summing, over the N(N-1) ordered pairs, the per-pair intensity
// bound (beta ^ eps^-1) dtheta dphi * eps^gamma / (2(N-1)). Each proposal
// draws an ordered pair (i,j), a deflection angle from the exact capped
// angular law, a uniform azimuth, and is accepted (thinning) with probability
// alpha_eps(|v_i - v_j|) / eps^gamma in (0,1]. Accepted proposals apply the
// elastic two-body collision map. The law of the resulting process is exactly
// the regularized system; there is no time-discretization error.

struct InitialCondition {
    enum class Kind {
        standard_gaussian,   // N(0, I)
        two_bump,            // equal-variance bumps at +/- separation/2 along x
        isotropic_mixture,   // scale mixture of centered isotropic Gaussians
        custom_samples,      // whitespace text file of vx vy vz rows
    };
    Kind kind = Kind::standard_gaussian;
    double separation = 2.0;   // two_bump: center distance before normalization
    double mix = 0.5;          // two_bump: weight of the +x bump
    double scale_ratio = 3.0;  // isotropic_mixture: wide/narrow variance ratio
    double weight = 0.5;       // isotropic_mixture: weight of narrow component
    std::string path;          // custom_samples
    // Shift and rescale the drawn sample so the empirical mean is 0 and
    // (1/N) sum |v_i|^2 = 3 exactly.
    bool normalize = true;
};

struct EngineConfig {
    int n_particles = 1024;
    KernelSpec kernel;
    double t_final = 1.0;
    std::uint64_t seed = 1;
    std::vector<double> snapshot_times;  // sorted, within [0, t_final]; empty = {0, t_final}
    InitialCondition init;
    bool record_events = false;

    void validate() const;  // throws std::invalid_argument
};

struct SystemState {
    std::vector<Vec3> v;
    double t = 0.0;
    std::uint64_t n_proposals = 0;
    std::uint64_t n_collisions = 0;
    Vec3 momentum0{};     // conserved reference values, fixed at construction
    double energy0 = 0.0;
};

struct EventRecord {
    double t;
    int i;
    int j;
    double theta;
    double phi;
    bool accepted;
};

struct ConservationAudit {
    double t;
    double momentum_err;  // |sum v - momentum0| / sqrt(energy0)
    double energy_err;    // |sum|v|^2 - energy0| / energy0
};

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunResult {
    EmpiricalFlow flow;
    std::vector<ConservationAudit> audit;
    std::uint64_t n_proposals = 0;
    std::uint64_t n_collisions = 0;
    double lambda = 0.0;
    std::vector<EventRecord> events;  // populated when record_events is set
};

std::vector<Vec3> draw_initial(const InitialCondition& init, int n, Rng& rng);

// Rescale in place: empirical mean 0 and (1/N) sum |v|^2 = 3.
void normalize_sample(std::vector<Vec3>& v);

SystemState make_state(const EngineConfig& config, Rng& rng);

// Total proposal rate Lambda of the dominating Poisson clock.
double total_proposal_rate(int n_particles, const Kernel& kernel);
double total_proposal_rate(const EngineConfig& config);

// One proposal: advance the clock by an Exp(Lambda) increment, then draw and
// (maybe) apply a collision. Velocity conservation is exact by construction;
// a non-finite velocity aborts with the offending event attached.
EventRecord step(SystemState& state, const Kernel& kernel, double lambda, Rng& rng);

RunResult run(const EngineConfig& config);

// Independent replicas with seeds derive_seed(config.seed, k); each replica
// reproduces bit-identically when run alone. Failures are collected per
// replica and reported together.
std::vector<RunResult> run_replicas(const EngineConfig& config, int n_replicas);

}  // namespace kacsim
